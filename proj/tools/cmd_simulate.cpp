// `rcc simulate`: draw clique covers over a (sigma, c) grid, track |V| and
// |E| as cliques accumulate, and summarize the resulting graphs. The CSVs
// feed the growth-exponent and degree-distribution plots.
#include <array>
#include <cmath>
#include <memory>
#include <unordered_set>

#include "cli_util.hpp"
#include "commands.hpp"
#include "rcc/graph_build.hpp"
#include "rcc/graph_stats.hpp"
#include "rcc/sbibp.hpp"

namespace rcccli {

namespace {

struct SimulateOpts {
    std::string out;
    std::string config;
    double alpha = 20.0;
    std::vector<double> sigmas = {0.2, 0.5, 0.8};
    std::vector<double> cs = {1.0, 3.0, 5.0};
    std::uint32_t replicates = 10;
    std::uint32_t cliques = 100;
    std::uint32_t trajectory_every = 1;
    std::uint64_t seed = 1;
    int threads = 0;
    bool skip_max_clique = false;
    std::uint64_t clique_budget = 1000000;
};

struct TrajectoryPoint {
    std::uint32_t cliques = 0;
    std::uint32_t vertices = 0;
    std::uint64_t edges = 0;
    std::uint64_t multi_edges = 0;
};

struct ReplicateResult {
    std::vector<TrajectoryPoint> trajectory;
    std::vector<std::uint64_t> degree_hist;
    rcc::GraphSummary summary;
    bool degenerate = false;  // fewer than two vertices: no stats, no slopes
    bool graph_slope_ok = false, multi_slope_ok = false;
    rcc::RegressionResult graph_slope, multi_slope;
};

ReplicateResult run_replicate(const SimulateOpts& o, double sigma, double c, std::uint64_t seed) {
    ReplicateResult res;
    rcc::Rng rng(seed);
    const rcc::Hyperparams hp(o.alpha, sigma, c, double(std::max<std::uint32_t>(o.cliques, 1)));
    const rcc::CliqueMatrix z = rcc::sample_clique_matrix(hp, o.cliques, rng);

    // New vertices take fresh contiguous ids, so the vertex count after k
    // rows is just one past the largest id seen so far.
    std::unordered_set<std::uint64_t> pairs;
    std::uint32_t vertices = 0;
    std::uint64_t multi = 0;
    std::vector<double> xs_graph, ys_graph, ys_multi;
    for (std::uint32_t k = 0; k < z.n_cliques(); ++k) {
        const rcc::Clique& row = z.row(k);
        if (!row.empty()) vertices = std::max(vertices, row.back() + 1);
        for (std::size_t a = 0; a < row.size(); ++a)
            for (std::size_t b = a + 1; b < row.size(); ++b) {
                pairs.insert(rcc::pair_key(row[a], row[b]));
                ++multi;
            }
        if ((k + 1) % o.trajectory_every == 0 || k + 1 == z.n_cliques())
            res.trajectory.push_back({k + 1, vertices, pairs.size(), multi});
        if (vertices >= 2 && !pairs.empty()) {
            xs_graph.push_back(double(vertices));
            ys_graph.push_back(double(pairs.size()));
            ys_multi.push_back(double(multi));
        }
    }

    const rcc::Graph g = rcc::cover_to_graph(z);
    if (g.vertex_count() < 2) {
        res.degenerate = true;
        return res;
    }
    res.summary = rcc::summarize(g, o.skip_max_clique, o.clique_budget);
    res.degree_hist = rcc::degree_distribution(g);
    try {
        res.graph_slope = rcc::sparsity_regression(xs_graph, ys_graph);
        res.graph_slope_ok = true;
        res.multi_slope = rcc::sparsity_regression(xs_graph, ys_multi);
        res.multi_slope_ok = true;
    } catch (const std::invalid_argument&) {
        // Too few usable trajectory points; slope cells stay empty.
    }
    return res;
}

void run_simulate(SimulateOpts& o) {
    ConfigBinder binder;
    binder.bind("out", o.out);
    binder.bind("alpha", o.alpha);
    binder.bind("sigma", o.sigmas);
    binder.bind("c", o.cs);
    binder.bind("replicates", o.replicates);
    binder.bind("cliques", o.cliques);
    binder.bind("trajectory-every", o.trajectory_every);
    binder.bind("seed", o.seed);
    binder.bind("threads", o.threads);
    binder.bind("skip-max-clique", o.skip_max_clique);
    binder.bind("clique-budget", o.clique_budget);
    binder.apply(o.config);

    if (o.sigmas.empty() || o.cs.empty()) throw ValidationError("grid must be nonempty");
    if (o.replicates < 1) throw ValidationError("replicates must be >= 1");
    if (o.cliques < 1) throw ValidationError("cliques must be >= 1");
    if (o.trajectory_every < 1) throw ValidationError("trajectory-every must be >= 1");
    for (double s : o.sigmas)
        for (double c : o.cs) rcc::Hyperparams(o.alpha, s, c, 1.0);  // domain check per grid point

    const auto dir = ensure_out_dir(o.out);
    const int threads = resolve_threads(o.threads);

    const std::size_t n_grid = o.sigmas.size() * o.cs.size();
    const std::size_t n_tasks = n_grid * o.replicates;
    std::vector<ReplicateResult> results(n_tasks);
    parallel_tasks(n_tasks, threads, [&](std::size_t t) {
        const std::size_t gi = t / o.replicates, rep = t % o.replicates;
        const double sigma = o.sigmas[gi / o.cs.size()];
        const double c = o.cs[gi % o.cs.size()];
        results[t] = run_replicate(o, sigma, c, rcc::derive_seed(o.seed, gi, rep));
    });

    auto traj = open_output(dir / "trajectories.csv");
    traj << "sigma,c,replicate,cliques,vertices,edges,multi_edges\n";
    auto deg = open_output(dir / "degree_hist.csv");
    deg << "sigma,c,replicate,degree,count\n";
    auto slopes = open_output(dir / "slopes.csv");
    slopes << "sigma,c,replicate,graph_slope,graph_stderr,multi_slope,multi_stderr\n";
    auto grid = open_output(dir / "grid_summary.csv");
    grid << "sigma,c,replicates_used,mean_vertices,mean_edges,mean_multi_edges,mean_density,"
            "mean_avg_degree,mean_clustering,mean_max_clique,mean_graph_slope,mean_multi_slope\n";

    for (std::size_t gi = 0; gi < n_grid; ++gi) {
        const double sigma = o.sigmas[gi / o.cs.size()];
        const double c = o.cs[gi % o.cs.size()];
        const std::string prefix = fmt(sigma) + "," + fmt(c) + ",";

        std::size_t used = 0;
        double sum_v = 0, sum_e = 0, sum_me = 0, sum_dens = 0, sum_deg = 0, sum_clust = 0;
        double sum_maxcl = 0, sum_gs = 0, sum_ms = 0;
        std::size_t n_maxcl = 0, n_gs = 0, n_ms = 0;

        for (std::uint32_t rep = 0; rep < o.replicates; ++rep) {
            const ReplicateResult& r = results[gi * o.replicates + rep];
            for (const TrajectoryPoint& p : r.trajectory)
                traj << prefix << rep << ',' << p.cliques << ',' << p.vertices << ',' << p.edges
                     << ',' << p.multi_edges << '\n';
            for (std::size_t d = 0; d < r.degree_hist.size(); ++d)
                deg << prefix << rep << ',' << d << ',' << r.degree_hist[d] << '\n';

            slopes << prefix << rep << ',';
            if (r.graph_slope_ok)
                slopes << fmt(r.graph_slope.slope) << ',' << fmt(r.graph_slope.slope_stderr);
            else
                slopes << ',';
            slopes << ',';
            if (r.multi_slope_ok)
                slopes << fmt(r.multi_slope.slope) << ',' << fmt(r.multi_slope.slope_stderr);
            else
                slopes << ',';
            slopes << '\n';

            if (r.degenerate) continue;
            ++used;
            sum_v += r.summary.vertices;
            sum_e += double(r.summary.edges);
            sum_me += double(r.trajectory.back().multi_edges);
            sum_dens += r.summary.density;
            sum_deg += r.summary.average_degree;
            sum_clust += r.summary.clustering_coefficient;
            if (r.summary.average_max_clique) {
                sum_maxcl += *r.summary.average_max_clique;
                ++n_maxcl;
            }
            if (r.graph_slope_ok) {
                sum_gs += r.graph_slope.slope;
                ++n_gs;
            }
            if (r.multi_slope_ok) {
                sum_ms += r.multi_slope.slope;
                ++n_ms;
            }
        }

        grid << prefix << used << ',';
        if (used > 0) {
            const double n = double(used);
            grid << fmt(sum_v / n) << ',' << fmt(sum_e / n) << ',' << fmt(sum_me / n) << ','
                 << fmt(sum_dens / n) << ',' << fmt(sum_deg / n) << ',' << fmt(sum_clust / n)
                 << ',';
        } else {
            grid << ",,,,,,";
        }
        if (n_maxcl > 0) grid << fmt(sum_maxcl / double(n_maxcl));
        grid << ',';
        if (n_gs > 0) grid << fmt(sum_gs / double(n_gs));
        grid << ',';
        if (n_ms > 0) grid << fmt(sum_ms / double(n_ms));
        grid << '\n';
    }

    nlohmann::json opts;
    opts["alpha"] = o.alpha;
    opts["sigma"] = o.sigmas;
    opts["c"] = o.cs;
    opts["replicates"] = o.replicates;
    opts["cliques"] = o.cliques;
    opts["trajectory-every"] = o.trajectory_every;
    opts["seed"] = o.seed;
    opts["skip-max-clique"] = o.skip_max_clique;
    opts["clique-budget"] = o.clique_budget;
    // Thread count is deliberately left out: parallel and sequential runs of
    // the same spec must produce identical bytes.
    write_manifest(dir, "simulate", opts,
                   {"trajectories.csv", "degree_hist.csv", "slopes.csv", "grid_summary.csv"});
}

}  // namespace

void register_simulate(CLI::App& app) {
    auto o = std::make_shared<SimulateOpts>();
    CLI::App* cmd = app.add_subcommand(
        "simulate", "Sample clique covers over a hyperparameter grid and record growth statistics");
    cmd->add_option("--out", o->out, "output directory")->required();
    cmd->add_option("--config", o->config, "JSON file whose entries override the other flags");
    cmd->add_option("--alpha", o->alpha, "clique-size intensity");
    cmd->add_option("--sigma", o->sigmas, "grid of sigma values")->delimiter(',');
    cmd->add_option("--c", o->cs, "grid of c values")->delimiter(',');
    cmd->add_option("--replicates", o->replicates, "independent draws per grid point");
    cmd->add_option("--cliques", o->cliques, "number of cliques per draw");
    cmd->add_option("--trajectory-every", o->trajectory_every,
                    "record every k-th trajectory point (the last is always kept)");
    cmd->add_option("--seed", o->seed, "master seed; per-task seeds are derived");
    cmd->add_option("--threads", o->threads, "worker threads (0 = auto, capped by RCC_THREADS)");
    cmd->add_flag("--skip-max-clique", o->skip_max_clique, "skip maximal-clique enumeration");
    cmd->add_option("--clique-budget", o->clique_budget, "maximal-clique enumeration budget");
    cmd->callback([o] { run_simulate(*o); });
}

}  // namespace rcccli
