// `rcc report`: latent-structure report over a partial-mode fit. Summarizes
// the sampled covers (observation probability, latent-only edge fraction,
// membership counts) and writes the observed vs latent-only edge lists for
// the final sample.
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "cli_util.hpp"
#include "commands.hpp"
#include "rcc/graph_build.hpp"
#include "rcc/inference.hpp"

namespace rcccli {

namespace {

struct ReportOpts {
    std::string fit;
    std::string input;  // override for the observed graph path
    std::string out;
    std::string config;
    std::uint32_t max_listed = 50;
};

struct ParsedSample {
    rcc::CliqueMatrix cover;
    double pi = 0.0;  // shared value or mean over nonempty rows
};

void run_report(ReportOpts& o) {
    ConfigBinder binder;
    binder.bind("fit", o.fit);
    binder.bind("input", o.input);
    binder.bind("out", o.out);
    binder.bind("max-listed", o.max_listed);
    binder.apply(o.config);

    if (o.fit.empty()) throw ValidationError("--fit directory is required");
    const std::filesystem::path fit_dir(o.fit);
    const nlohmann::json fitted = load_json_file((fit_dir / "fitted.json").string());
    if (!fitted.contains("mode") || fitted["mode"] != "partial")
        throw ValidationError("report needs a partial-mode fit output");

    std::string graph_path = o.input;
    if (graph_path.empty() && fitted.contains("input"))
        graph_path = fitted["input"].get<std::string>();
    if (graph_path.empty()) throw ValidationError("no observed graph path; pass --input");
    const rcc::Graph g = load_graph_checked(graph_path);

    std::ifstream in(fit_dir / "samples.jsonl");
    if (!in) throw ValidationError("cannot read " + (fit_dir / "samples.jsonl").string());
    std::vector<ParsedSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const nlohmann::json row = nlohmann::json::parse(line);
            ParsedSample s;
            s.cover = rcc::CliqueMatrix::from_json(row.at("cover").dump());
            if (row.contains("per_clique_pi") && row["per_clique_pi"].is_array()) {
                double sum = 0;
                std::size_t n = 0;
                const auto& pis = row["per_clique_pi"];
                for (std::size_t r = 0; r < pis.size() && r < s.cover.n_cliques(); ++r)
                    if (!s.cover.row(r).empty()) {
                        sum += pis[r].get<double>();
                        ++n;
                    }
                s.pi = n ? sum / double(n) : row.value("pi", 0.0);
            } else {
                s.pi = row.at("pi").get<double>();
            }
            samples.push_back(std::move(s));
        } catch (const std::exception& e) {
            throw ValidationError("samples.jsonl line " + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    if (samples.empty()) throw ValidationError("samples.jsonl holds no samples");

    double mean_pi = 0, mean_latent = 0, mean_cliques = 0, mean_single = 0;
    for (const ParsedSample& s : samples) {
        mean_pi += s.pi;
        mean_latent += rcc::latent_only_edge_fraction(s.cover, g);
        std::uint32_t nonempty = 0;
        for (const rcc::Clique& row : s.cover.rows())
            if (!row.empty()) ++nonempty;
        mean_cliques += nonempty;
        const auto counts = s.cover.column_counts();
        std::size_t single = 0;
        for (auto m : counts)
            if (m == 1) ++single;
        mean_single += counts.empty() ? 0.0 : double(single) / double(counts.size());
    }
    const double ns = double(samples.size());
    mean_pi /= ns;
    mean_latent /= ns;
    mean_cliques /= ns;
    mean_single /= ns;

    // Final sample carries the concrete structures: membership lists, the
    // membership histogram, and the latent-only edge list.
    const ParsedSample& last = samples.back();
    const auto counts = last.cover.column_counts();
    std::map<std::uint32_t, std::uint32_t> membership_hist;
    for (auto m : counts) ++membership_hist[m];
    rcc::Vertex top_vertex = 0;
    std::uint32_t top_count = 0;
    for (std::size_t v = 0; v < counts.size(); ++v)
        if (counts[v] > top_count) {
            top_count = counts[v];
            top_vertex = rcc::Vertex(v);
        }

    const rcc::Graph inferred = rcc::cover_to_graph(last.cover);
    std::vector<std::pair<rcc::Vertex, rcc::Vertex>> latent_only;
    for (auto [u, v] : inferred.edges())
        if (!g.has_edge(u, v)) latent_only.emplace_back(u, v);
    const double latent_final =
        inferred.edge_count() ? double(latent_only.size()) / double(inferred.edge_count()) : 0.0;

    const auto dir = ensure_out_dir(o.out);
    rcc::save_edge_list(g, (dir / "observed_edges.txt").string());
    rcc::save_edge_list(rcc::Graph(g.vertex_count(), latent_only),
                        (dir / "latent_only_edges.txt").string());

    auto hist_csv = open_output(dir / "membership_hist.csv");
    hist_csv << "cliques_per_vertex,count\n";
    for (const auto& [m, k] : membership_hist) hist_csv << m << ',' << k << '\n';

    nlohmann::json rep;
    rep["n_samples"] = samples.size();
    rep["pi_posterior_mean"] = mean_pi;
    rep["pi_final"] = last.pi;
    rep["latent_only_fraction_mean"] = mean_latent;
    rep["latent_only_fraction_final"] = latent_final;
    rep["n_cliques_mean"] = mean_cliques;
    rep["single_clique_fraction_mean"] = mean_single;
    rep["observed_edges"] = g.edge_count();
    rep["inferred_edges_final"] = inferred.edge_count();
    rep["latent_only_edges_final"] = latent_only.size();
    rep["top_vertex"] = {{"id", top_vertex}, {"cliques", top_count}};
    rep["membership_hist_final"] = nlohmann::json::object();
    for (const auto& [m, k] : membership_hist)
        rep["membership_hist_final"][std::to_string(m)] = k;
    open_output(dir / "report.json") << rep.dump(2) << '\n';

    auto txt = open_output(dir / "report.txt");
    txt << "samples:                      " << samples.size() << "\n"
        << "posterior mean pi:            " << fmt(mean_pi) << "\n"
        << "latent-only edge fraction:    " << fmt(mean_latent) << " (final sample "
        << fmt(latent_final) << ")\n"
        << "mean nonempty cliques:        " << fmt(mean_cliques) << "\n"
        << "vertices in a single clique:  " << fmt(mean_single) << " (fraction, mean)\n"
        << "observed edges:               " << g.edge_count() << "\n"
        << "latent-only edges (final):    " << latent_only.size() << "\n"
        << "busiest vertex:               " << top_vertex << " (" << top_count << " cliques)\n\n"
        << "final-sample cliques (up to " << o.max_listed << "):\n";
    std::uint32_t listed = 0;
    for (std::size_t r = 0; r < last.cover.n_cliques() && listed < o.max_listed; ++r) {
        const rcc::Clique& row = last.cover.row(r);
        if (row.empty()) continue;
        ++listed;
        txt << "  [" << r << "]";
        for (rcc::Vertex v : row) txt << ' ' << v;
        txt << '\n';
    }

    nlohmann::json opts;
    opts["fit"] = o.fit;
    opts["input"] = o.input;
    opts["max-listed"] = o.max_listed;
    write_manifest(dir, "report", opts,
                   {"report.json", "report.txt", "membership_hist.csv", "observed_edges.txt",
                    "latent_only_edges.txt"});

    std::cout << rep.dump(2) << "\n";
}

}  // namespace

void register_report(CLI::App& app) {
    auto o = std::make_shared<ReportOpts>();
    CLI::App* cmd =
        app.add_subcommand("report", "Latent-structure report from a partial-mode fit");
    cmd->add_option("--fit", o->fit, "fit output directory")->required();
    cmd->add_option("--input", o->input, "observed edge list (default: path recorded by the fit)");
    cmd->add_option("--out", o->out, "output directory")->required();
    cmd->add_option("--config", o->config, "JSON file whose entries override the other flags");
    cmd->add_option("--max-listed", o->max_listed, "cliques listed in report.txt");
    cmd->callback([o] { run_report(*o); });
}

}  // namespace rcccli
