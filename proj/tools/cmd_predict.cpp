// `rcc predict`: posterior-predictive check. Draws graphs from fitted
// hyperparameters, summarizes each, and tabulates mean and standard error per
// statistic next to the observed graph's value.
#include <cmath>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>

#include "cli_util.hpp"
#include "commands.hpp"
#include "rcc/graph_build.hpp"
#include "rcc/graph_stats.hpp"
#include "rcc/sbibp.hpp"

namespace rcccli {

namespace {

struct PredictOpts {
    std::string fit;     // directory holding fitted.json
    std::string fitted;  // explicit fitted.json path, overrides --fit
    std::string truth;   // edge list for the Truth column
    std::string out;
    std::string config;
    std::uint32_t samples = 25;
    std::uint32_t cliques = 0;  // 0 = Poisson(tau) per sample
    std::uint64_t seed = 1;
    int threads = 0;
    bool use_final = false;  // point estimate instead of the posterior mean
    bool skip_max_clique = false;
    std::uint64_t clique_budget = 1000000;
    // NaN = take the value from the fit output.
    double alpha = std::nan(""), sigma = std::nan(""), c = std::nan(""), tau = std::nan("");
};

struct SampleStats {
    bool degenerate = false;  // under two vertices; excluded from the table
    rcc::GraphSummary summary;
};

struct TableRow {
    std::string name;
    std::optional<double> mean, stderr_, truth;
};

void append_stat(std::vector<TableRow>& rows, const std::string& name,
                 const std::vector<double>& values, std::optional<double> truth) {
    TableRow row;
    row.name = name;
    row.truth = truth;
    if (!values.empty()) {
        double m = 0;
        for (double v : values) m += v;
        m /= double(values.size());
        row.mean = m;
        if (values.size() > 1) {
            double ss = 0;
            for (double v : values) ss += (v - m) * (v - m);
            row.stderr_ = std::sqrt(ss / double(values.size() - 1) / double(values.size()));
        }
    }
    rows.push_back(std::move(row));
}

std::string cell(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void run_predict(PredictOpts& o) {
    ConfigBinder binder;
    binder.bind("fit", o.fit);
    binder.bind("fitted", o.fitted);
    binder.bind("truth", o.truth);
    binder.bind("out", o.out);
    binder.bind("samples", o.samples);
    binder.bind("cliques", o.cliques);
    binder.bind("seed", o.seed);
    binder.bind("threads", o.threads);
    binder.bind("use-final", o.use_final);
    binder.bind("skip-max-clique", o.skip_max_clique);
    binder.bind("clique-budget", o.clique_budget);
    binder.bind("alpha", o.alpha);
    binder.bind("sigma", o.sigma);
    binder.bind("c", o.c);
    binder.bind("tau", o.tau);
    binder.apply(o.config);

    if (o.samples < 1) throw ValidationError("samples must be >= 1");

    // Hyperparameters come from the fit output, with per-field overrides; a
    // run without any fit directory must override all four.
    nlohmann::json fitted;
    std::string recorded_input;
    if (!o.fitted.empty() || !o.fit.empty()) {
        const std::string path =
            !o.fitted.empty() ? o.fitted : (std::filesystem::path(o.fit) / "fitted.json").string();
        fitted = load_json_file(path);
        if (fitted.contains("input") && fitted["input"].is_string())
            recorded_input = fitted["input"].get<std::string>();
    }
    auto pick = [&](const char* key, double override_value) {
        if (!std::isnan(override_value)) return override_value;
        const std::string source = o.use_final ? "hp_final" : "hp_posterior_mean";
        if (!fitted.contains(source) || !fitted[source].contains(key))
            throw ValidationError(std::string("no fitted value for '") + key +
                                  "'; pass --fit/--fitted or override the flag");
        return fitted[source][key].get<double>();
    };
    rcc::Hyperparams hp(pick("alpha", o.alpha), pick("sigma", o.sigma), pick("c", o.c),
                        pick("tau", o.tau));

    // Truth column: explicit path wins; otherwise fall back to the graph the
    // fit ran on, skipping quietly if it is gone.
    std::optional<rcc::GraphSummary> truth;
    if (!o.truth.empty()) {
        truth = rcc::summarize(load_graph_checked(o.truth), o.skip_max_clique, o.clique_budget);
    } else if (!recorded_input.empty()) {
        try {
            truth = rcc::summarize(rcc::load_edge_list(recorded_input), o.skip_max_clique,
                                   o.clique_budget);
        } catch (const std::exception& e) {
            std::cerr << "note: truth column skipped (" << e.what() << ")\n";
        }
    }

    const auto dir = ensure_out_dir(o.out);
    const int threads = resolve_threads(o.threads);
    std::vector<SampleStats> stats(o.samples);
    parallel_tasks(o.samples, threads, [&](std::size_t i) {
        rcc::Rng rng(rcc::derive_seed(o.seed, i, 1));
        const auto n = o.cliques > 0 ? std::optional<std::uint32_t>(o.cliques) : std::nullopt;
        const rcc::CliqueMatrix z = rcc::sample_clique_matrix(hp, n, rng);
        const rcc::Graph g = rcc::cover_to_graph(z);
        if (g.vertex_count() < 2) {
            stats[i].degenerate = true;
            return;
        }
        stats[i].summary = rcc::summarize(g, o.skip_max_clique, o.clique_budget);
    });

    auto per_sample = open_output(dir / "samples.csv");
    per_sample << "sample,vertices,edges,triangles_per_vertex,density_x1k,avg_degree,"
                  "max_clique,clustering\n";
    std::vector<double> v_verts, v_edges, v_tri, v_dens, v_deg, v_maxcl, v_clust;
    std::uint32_t degenerate = 0;
    for (std::uint32_t i = 0; i < o.samples; ++i) {
        if (stats[i].degenerate) {
            ++degenerate;
            per_sample << i << ",,,,,,,\n";
            continue;
        }
        const rcc::GraphSummary& s = stats[i].summary;
        per_sample << i << ',' << s.vertices << ',' << s.edges << ','
                   << fmt(s.triangles_per_vertex) << ',' << fmt(s.density * 1000.0) << ','
                   << fmt(s.average_degree) << ','
                   << (s.average_max_clique ? fmt(*s.average_max_clique) : std::string()) << ','
                   << fmt(s.clustering_coefficient) << '\n';
        v_verts.push_back(double(s.vertices));
        v_edges.push_back(double(s.edges));
        v_tri.push_back(s.triangles_per_vertex);
        v_dens.push_back(s.density * 1000.0);
        v_deg.push_back(s.average_degree);
        if (s.average_max_clique) v_maxcl.push_back(*s.average_max_clique);
        v_clust.push_back(s.clustering_coefficient);
    }

    auto truth_of = [&](auto get) -> std::optional<double> {
        if (!truth) return std::nullopt;
        return get(*truth);
    };
    std::vector<TableRow> rows;
    append_stat(rows, "vertices", v_verts,
                truth_of([](const rcc::GraphSummary& s) { return double(s.vertices); }));
    append_stat(rows, "edges", v_edges,
                truth_of([](const rcc::GraphSummary& s) { return double(s.edges); }));
    append_stat(rows, "triang./vertex", v_tri,
                truth_of([](const rcc::GraphSummary& s) { return s.triangles_per_vertex; }));
    append_stat(rows, "density (x1k)", v_dens,
                truth_of([](const rcc::GraphSummary& s) { return s.density * 1000.0; }));
    append_stat(rows, "av. degree", v_deg,
                truth_of([](const rcc::GraphSummary& s) { return s.average_degree; }));
    {
        std::optional<double> t;
        if (truth && truth->average_max_clique) t = *truth->average_max_clique;
        append_stat(rows, "max. clique", v_maxcl, t);
    }
    append_stat(rows, "cluster. coeff.", v_clust,
                truth_of([](const rcc::GraphSummary& s) { return s.clustering_coefficient; }));

    auto table = open_output(dir / "predict.csv");
    table << "statistic,mean,stderr,truth\n";
    for (const TableRow& r : rows)
        table << r.name << ',' << cell(r.mean) << ',' << cell(r.stderr_) << ',' << cell(r.truth)
              << '\n';

    nlohmann::json out_json;
    out_json["hp"] = hp_to_json(hp);
    out_json["n_samples"] = o.samples;
    out_json["n_degenerate"] = degenerate;
    out_json["rows"] = nlohmann::json::array();
    for (const TableRow& r : rows) {
        nlohmann::json jr;
        jr["statistic"] = r.name;
        jr["mean"] = r.mean ? nlohmann::json(*r.mean) : nlohmann::json();
        jr["stderr"] = r.stderr_ ? nlohmann::json(*r.stderr_) : nlohmann::json();
        jr["truth"] = r.truth ? nlohmann::json(*r.truth) : nlohmann::json();
        out_json["rows"].push_back(jr);
    }
    open_output(dir / "predict.json") << out_json.dump(2) << '\n';

    nlohmann::json opts;
    opts["fit"] = o.fit;
    opts["fitted"] = o.fitted;
    opts["truth"] = o.truth;
    opts["samples"] = o.samples;
    opts["cliques"] = o.cliques;
    opts["seed"] = o.seed;
    opts["use-final"] = o.use_final;
    opts["skip-max-clique"] = o.skip_max_clique;
    opts["clique-budget"] = o.clique_budget;
    opts["hp"] = hp_to_json(hp);
    write_manifest(dir, "predict", opts, {"samples.csv", "predict.csv", "predict.json"});

    // Console table, Truth first like the reference layout.
    std::cout << std::left << std::setw(18) << "statistic" << std::setw(16) << "truth"
              << std::setw(16) << "mean" << "s.e.\n";
    for (const TableRow& r : rows)
        std::cout << std::left << std::setw(18) << r.name << std::setw(16)
                  << (r.truth ? fmt(*r.truth) : "-") << std::setw(16)
                  << (r.mean ? fmt(*r.mean) : "-") << (r.stderr_ ? fmt(*r.stderr_) : "-") << "\n";
    if (degenerate > 0)
        std::cout << "( " << degenerate << " degenerate draw(s) excluded )\n";
}

}  // namespace

void register_predict(CLI::App& app) {
    auto o = std::make_shared<PredictOpts>();
    CLI::App* cmd = app.add_subcommand(
        "predict", "Posterior-predictive graph statistics from fitted hyperparameters");
    cmd->add_option("--fit", o->fit, "fit output directory (reads fitted.json)");
    cmd->add_option("--fitted", o->fitted, "explicit fitted.json path");
    cmd->add_option("--truth", o->truth, "edge list for the Truth column");
    cmd->add_option("--out", o->out, "output directory")->required();
    cmd->add_option("--config", o->config, "JSON file whose entries override the other flags");
    cmd->add_option("--samples", o->samples, "number of predictive draws");
    cmd->add_option("--cliques", o->cliques, "cliques per draw (0 = Poisson(tau))");
    cmd->add_option("--seed", o->seed, "master seed; per-draw seeds are derived");
    cmd->add_option("--threads", o->threads, "worker threads (0 = auto, capped by RCC_THREADS)");
    cmd->add_flag("--use-final", o->use_final, "use hp_final instead of hp_posterior_mean");
    cmd->add_flag("--skip-max-clique", o->skip_max_clique, "skip maximal-clique enumeration");
    cmd->add_option("--clique-budget", o->clique_budget, "maximal-clique enumeration budget");
    cmd->add_option("--alpha", o->alpha, "override fitted alpha");
    cmd->add_option("--sigma", o->sigma, "override fitted sigma");
    cmd->add_option("--c", o->c, "override fitted c");
    cmd->add_option("--tau", o->tau, "override fitted tau");
    cmd->callback([o] { run_predict(*o); });
}

}  // namespace rcccli
