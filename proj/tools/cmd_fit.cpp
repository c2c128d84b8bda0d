// `rcc fit`: posterior inference over clique covers for an observed graph.
// Fully-observed runs interleave gradient re-estimation of the
// hyperparameters with the cover moves; partially-observed runs sample the
// hyperparameters by Metropolis-Hastings inside the chain.
#include <fstream>
#include <memory>
#include <numeric>

#include "cli_util.hpp"
#include "commands.hpp"
#include "rcc/inference.hpp"

namespace rcccli {

namespace {

struct FitOpts {
    std::string input;
    std::string out;
    std::string config;
    std::string mode = "full";
    std::string init;  // empty = per-mode default, else "edges" or "greedy"
    std::string resume;
    std::uint64_t iterations = 10000;
    std::uint64_t burn_in = 1000;
    std::uint64_t thin = 10;
    std::uint64_t seed = 1;
    double alpha = 1.0, sigma = 0.5, c = 1.0;
    double tau = 0.0;  // 0 = start from the initial cover's row count
    double pi = 0.5, pi_step = 1.0, hyper_step = 0.15;
    bool per_clique_pi = false;
    bool learn_hyper = true;
    std::uint64_t hyper_opt_every = 500;  // gradient refit cadence in full mode
    // Negative weights keep the per-mode defaults.
    double w_split_merge = -1, w_gibbs = -1, w_empty = -1, w_pi = -1, w_hyper = -1;
    std::uint64_t check_every = 0;
    std::uint64_t trace_every = 100;
};

void run_fit(FitOpts& o) {
    ConfigBinder binder;
    binder.bind("input", o.input);
    binder.bind("out", o.out);
    binder.bind("mode", o.mode);
    binder.bind("init", o.init);
    binder.bind("resume", o.resume);
    binder.bind("iterations", o.iterations);
    binder.bind("burn-in", o.burn_in);
    binder.bind("thin", o.thin);
    binder.bind("seed", o.seed);
    binder.bind("alpha", o.alpha);
    binder.bind("sigma", o.sigma);
    binder.bind("c", o.c);
    binder.bind("tau", o.tau);
    binder.bind("pi", o.pi);
    binder.bind("pi-step", o.pi_step);
    binder.bind("hyper-step", o.hyper_step);
    binder.bind("per-clique-pi", o.per_clique_pi);
    binder.bind("learn-hyper", o.learn_hyper);
    binder.bind("hyper-opt-every", o.hyper_opt_every);
    binder.bind("w-split-merge", o.w_split_merge);
    binder.bind("w-gibbs", o.w_gibbs);
    binder.bind("w-empty", o.w_empty);
    binder.bind("w-pi", o.w_pi);
    binder.bind("w-hyper", o.w_hyper);
    binder.bind("check-every", o.check_every);
    binder.bind("trace-every", o.trace_every);
    binder.apply(o.config);

    if (o.mode != "full" && o.mode != "partial")
        throw ValidationError("mode must be 'full' or 'partial', got '" + o.mode + "'");
    if (!o.init.empty() && o.init != "edges" && o.init != "greedy")
        throw ValidationError("init must be 'edges' or 'greedy', got '" + o.init + "'");
    if (o.iterations < 1) throw ValidationError("iterations must be >= 1");
    if (o.thin < 1) throw ValidationError("thin must be >= 1");
    if (o.burn_in >= o.iterations)
        throw ValidationError("burn-in must be below iterations or no samples are kept");

    const rcc::Graph g = load_graph_checked(o.input);
    const auto mode =
        o.mode == "full" ? rcc::ObservationMode::full : rcc::ObservationMode::partial;

    rcc::McmcConfig cfg = rcc::McmcConfig::defaults(mode);
    cfg.iterations = o.iterations;
    cfg.burn_in = o.burn_in;
    cfg.thinning = o.thin;
    cfg.seed = o.seed;
    cfg.per_clique_pi = o.per_clique_pi;
    cfg.pi_init = o.pi;
    cfg.pi_step = o.pi_step;
    cfg.hyper_step = o.hyper_step;
    cfg.check_every = o.check_every;
    if (o.init == "edges") cfg.init = rcc::InitStrategy::two_cliques;
    if (o.init == "greedy") cfg.init = rcc::InitStrategy::greedy_cover;
    // In partial mode the hyperparameters are sampled inside the chain unless
    // the caller pinned the weight (or disabled learning) explicitly.
    if (mode == rcc::ObservationMode::partial && o.learn_hyper && o.w_hyper < 0)
        cfg.moves.hyper = 0.15;
    if (!o.learn_hyper) cfg.moves.hyper = 0.0;
    if (o.w_split_merge >= 0) cfg.moves.split_merge = o.w_split_merge;
    if (o.w_gibbs >= 0) cfg.moves.gibbs = o.w_gibbs;
    if (o.w_empty >= 0) cfg.moves.empty_clique = o.w_empty;
    if (o.w_pi >= 0) cfg.moves.pi = o.w_pi;
    if (o.w_hyper >= 0) cfg.moves.hyper = o.w_hyper;
    cfg.moves.validate();

    double tau0 = o.tau;
    if (tau0 <= 0.0)
        tau0 = std::max<double>(1.0, rcc::init_cover(g, cfg.init).n_cliques());
    const rcc::Hyperparams hp0(o.alpha, o.sigma, o.c, tau0);

    const auto dir = ensure_out_dir(o.out);
    std::unique_ptr<rcc::McmcState> state;
    if (o.resume.empty()) {
        state = std::make_unique<rcc::McmcState>(g, cfg, hp0);
    } else {
        std::ifstream in(o.resume);
        if (!in) throw ValidationError("cannot read checkpoint " + o.resume);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            state = std::make_unique<rcc::McmcState>(
                rcc::McmcState::from_checkpoint(g, cfg, text));
        } catch (const std::exception& e) {
            throw ValidationError("checkpoint: " + std::string(e.what()));
        }
    }
    if (state->iteration() >= cfg.iterations)
        throw ValidationError("checkpoint is already at or past the requested iteration count");

    auto trace = open_output(dir / "trace.csv");
    trace << rcc::trace_csv_header() << '\n';
    std::uint64_t last_traced = std::uint64_t(-1);
    auto observer = [&](const rcc::TraceRow& row) {
        if (row.iteration == last_traced) return;  // chunk boundaries double-fire
        last_traced = row.iteration;
        trace << rcc::trace_csv_row(row) << '\n';
    };

    const bool grad_refits =
        mode == rcc::ObservationMode::full && o.learn_hyper && o.hyper_opt_every > 0;
    auto mle_at_cover = [&] {
        rcc::GradientFitConfig gcfg;
        gcfg.init = state->hyperparams();
        gcfg.max_iters = 2000;
        gcfg.tol = 1e-6;
        return rcc::fit_hyperparams_gradient(state->cover(), gcfg).hp;
    };

    // Refits land on absolute iteration milestones so a resumed run crosses
    // exactly the same ones as an uninterrupted run would.
    std::vector<rcc::McmcSample> samples;
    rcc::MoveStats move_stats;
    while (state->iteration() < cfg.iterations) {
        rcc::McmcConfig chunk = cfg;
        if (grad_refits) {
            const std::uint64_t milestone =
                (state->iteration() / o.hyper_opt_every + 1) * o.hyper_opt_every;
            chunk.iterations = std::min(cfg.iterations, milestone);
        }
        rcc::McmcResult part = rcc::run_mcmc(*state, chunk, observer, o.trace_every);
        move_stats = part.stats;
        samples.insert(samples.end(), std::make_move_iterator(part.samples.begin()),
                       std::make_move_iterator(part.samples.end()));
        if (grad_refits && state->iteration() % o.hyper_opt_every == 0)
            state->set_hyperparams(mle_at_cover());
    }

    // The checkpoint reflects milestone refits only; the end-of-run point
    // estimate below is reporting-only and must not shift a resumed chain.
    open_output(dir / "checkpoint.json") << state->checkpoint_to_json() << '\n';
    const rcc::Hyperparams hp_final = grad_refits ? mle_at_cover() : state->hyperparams();

    auto sample_file = open_output(dir / "samples.jsonl");
    for (const rcc::McmcSample& s : samples) {
        nlohmann::json row;
        row["iteration"] = s.iteration;
        row["cover"] = nlohmann::json::parse(s.cover.to_json());
        row["hp"] = hp_to_json(s.hp);
        row["pi"] = s.pi;
        if (cfg.per_clique_pi) row["per_clique_pi"] = s.per_clique_pi;
        row["log_joint"] = s.log_joint;
        row["log_lik"] = s.log_lik;
        sample_file << row.dump() << '\n';
    }

    // Posterior means over the kept samples; fall back to the final state if
    // thinning kept nothing (prevented by the burn-in check above).
    double m_alpha = 0, m_sigma = 0, m_c = 0, m_tau = 0, m_pi = 0;
    for (const rcc::McmcSample& s : samples) {
        m_alpha += s.hp.alpha;
        m_sigma += s.hp.sigma;
        m_c += s.hp.c;
        m_tau += s.hp.tau;
        if (cfg.per_clique_pi) {
            // Empty rows keep prior-sampled probabilities; average the rows
            // that actually touch the likelihood.
            double sum = 0;
            std::size_t n = 0;
            for (std::size_t r = 0; r < s.per_clique_pi.size(); ++r)
                if (!s.cover.row(r).empty()) {
                    sum += s.per_clique_pi[r];
                    ++n;
                }
            m_pi += n ? sum / double(n) : s.pi;
        } else {
            m_pi += s.pi;
        }
    }
    const double ns = double(samples.size());

    nlohmann::json fitted;
    fitted["mode"] = o.mode;
    fitted["input"] = o.input;
    fitted["graph"] = {{"vertices", g.vertex_count()}, {"edges", g.edge_count()}};
    fitted["iterations"] = cfg.iterations;
    fitted["burn_in"] = cfg.burn_in;
    fitted["thinning"] = cfg.thinning;
    fitted["seed"] = cfg.seed;
    fitted["per_clique_pi"] = cfg.per_clique_pi;
    fitted["hp_init"] = hp_to_json(hp0);
    fitted["hp_final"] = hp_to_json(hp_final);
    fitted["hp_posterior_mean"] =
        samples.empty() ? hp_to_json(state->hyperparams())
                        : nlohmann::json{{"alpha", m_alpha / ns},
                                         {"sigma", m_sigma / ns},
                                         {"c", m_c / ns},
                                         {"tau", m_tau / ns}};
    fitted["pi_final"] = state->shared_pi();
    fitted["pi_posterior_mean"] = samples.empty() ? state->shared_pi() : m_pi / ns;
    fitted["n_samples"] = samples.size();
    fitted["n_cliques_final"] = state->n_rows();
    fitted["n_empty_final"] = state->n_empty_rows();
    fitted["final_log_joint"] = state->log_joint_cached();
    fitted["final_log_lik"] = state->log_lik_cached();
    fitted["acceptance"] = {{"split", move_stats.rate(rcc::MoveKind::split)},
                            {"merge", move_stats.rate(rcc::MoveKind::merge)},
                            {"gibbs", move_stats.rate(rcc::MoveKind::gibbs)},
                            {"empty", move_stats.rate(rcc::MoveKind::empty_clique)},
                            {"pi", move_stats.rate(rcc::MoveKind::pi)},
                            {"hyper", move_stats.rate(rcc::MoveKind::hyper)}};
    open_output(dir / "fitted.json") << fitted.dump(2) << '\n';

    nlohmann::json opts;
    opts["input"] = o.input;
    opts["mode"] = o.mode;
    opts["init"] = o.init;
    opts["resume"] = o.resume;
    opts["iterations"] = o.iterations;
    opts["burn-in"] = o.burn_in;
    opts["thin"] = o.thin;
    opts["seed"] = o.seed;
    opts["alpha"] = o.alpha;
    opts["sigma"] = o.sigma;
    opts["c"] = o.c;
    opts["tau"] = o.tau;
    opts["pi"] = o.pi;
    opts["pi-step"] = o.pi_step;
    opts["hyper-step"] = o.hyper_step;
    opts["per-clique-pi"] = o.per_clique_pi;
    opts["learn-hyper"] = o.learn_hyper;
    opts["hyper-opt-every"] = o.hyper_opt_every;
    opts["moves"] = {{"split_merge", cfg.moves.split_merge},
                     {"gibbs", cfg.moves.gibbs},
                     {"empty_clique", cfg.moves.empty_clique},
                     {"pi", cfg.moves.pi},
                     {"hyper", cfg.moves.hyper}};
    opts["check-every"] = o.check_every;
    opts["trace-every"] = o.trace_every;
    write_manifest(dir, "fit", opts,
                   {"trace.csv", "samples.jsonl", "checkpoint.json", "fitted.json"});
}

}  // namespace

void register_fit(CLI::App& app) {
    auto o = std::make_shared<FitOpts>();
    CLI::App* cmd =
        app.add_subcommand("fit", "Posterior inference over clique covers of an observed graph");
    cmd->add_option("--input", o->input, "edge-list file")->required();
    cmd->add_option("--out", o->out, "output directory")->required();
    cmd->add_option("--config", o->config, "JSON file whose entries override the other flags");
    cmd->add_option("--mode", o->mode, "'full' (exact cover) or 'partial' (noisy-OR)");
    cmd->add_option("--init", o->init, "initial cover: 'edges' or 'greedy' (default per mode)");
    cmd->add_option("--resume", o->resume, "checkpoint.json to continue from");
    cmd->add_option("--iterations", o->iterations, "total MCMC iterations");
    cmd->add_option("--burn-in", o->burn_in, "iterations discarded before sampling");
    cmd->add_option("--thin", o->thin, "keep every k-th post-burn-in state");
    cmd->add_option("--seed", o->seed, "RNG seed");
    cmd->add_option("--alpha", o->alpha, "initial alpha");
    cmd->add_option("--sigma", o->sigma, "initial sigma");
    cmd->add_option("--c", o->c, "initial c");
    cmd->add_option("--tau", o->tau, "initial tau (0 = initial cover size)");
    cmd->add_option("--pi", o->pi, "initial observation probability (partial mode)");
    cmd->add_option("--pi-step", o->pi_step, "logit-scale random-walk sd for pi");
    cmd->add_option("--hyper-step", o->hyper_step, "unconstrained random-walk sd for hp moves");
    cmd->add_flag("--per-clique-pi", o->per_clique_pi, "one observation probability per clique");
    cmd->add_flag("--learn-hyper,!--no-learn-hyper", o->learn_hyper,
                  "learn hyperparameters (gradient refits in full mode, MH moves in partial)");
    cmd->add_option("--hyper-opt-every", o->hyper_opt_every,
                    "full mode: gradient refit cadence in iterations (0 = off)");
    cmd->add_option("--w-split-merge", o->w_split_merge, "move weight override");
    cmd->add_option("--w-gibbs", o->w_gibbs, "move weight override");
    cmd->add_option("--w-empty", o->w_empty, "move weight override");
    cmd->add_option("--w-pi", o->w_pi, "move weight override");
    cmd->add_option("--w-hyper", o->w_hyper, "move weight override");
    cmd->add_option("--check-every", o->check_every,
                    "audit cadence: rebuild caches from scratch and compare (0 = off)");
    cmd->add_option("--trace-every", o->trace_every, "trace row cadence");
    cmd->callback([o] { run_fit(*o); });
}

}  // namespace rcccli
