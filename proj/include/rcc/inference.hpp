// Posterior inference over clique covers: reversible split/merge proposals,
// per-entry resampling, empty-clique count moves, observation-probability
// moves, and hyperparameter fitting by gradient ascent or random-walk MH.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rcc/clique_matrix.hpp"
#include "rcc/graph.hpp"
#include "rcc/graph_build.hpp"
#include "rcc/hyperparams.hpp"
#include "rcc/rng.hpp"

namespace rcc {

enum class ObservationMode { full, partial };
enum class InitStrategy { two_cliques, greedy_cover };

// Exact cover of g: one row per edge, plus singleton rows for isolated
// vertices (two_cliques), or greedily grown cliques absorbing common
// neighbors (greedy_cover). Either way cover_to_graph(result) == g.
CliqueMatrix init_cover(const Graph& g, InitStrategy strategy);

// 0 when min(Z^T Z - diag, 1) reproduces g exactly, -infinity otherwise.
double full_log_likelihood(const CliqueMatrix& z, const Graph& g);

// Noisy-OR observation: covered edges contribute log(1 - prod(1-pi)), covered
// non-edges prod of log(1-pi); an uncovered edge makes the result -infinity.
double partial_log_likelihood(const CliqueMatrix& z, const Graph& g, const NoisyOrParams& pi);

// Fraction of covered vertex pairs that are not observed edges.
double latent_only_edge_fraction(const CliqueMatrix& z, const Graph& g);

struct MoveMix {
    double split_merge = 1.0;
    double gibbs = 0.0;
    double empty_clique = 0.0;
    double pi = 0.0;
    double hyper = 0.0;
    void validate() const;
};

struct McmcConfig {
    ObservationMode mode = ObservationMode::full;
    InitStrategy init = InitStrategy::two_cliques;
    std::uint64_t iterations = 10000;
    std::uint64_t burn_in = 1000;
    std::uint64_t thinning = 10;
    MoveMix moves;                // defaulted per mode when left all-zero except split_merge
    bool per_clique_pi = false;
    double pi_init = 0.5;
    double pi_step = 1.0;         // logit-scale random-walk sd
    double hyper_step = 0.15;     // unconstrained-scale random-walk sd
    std::uint64_t seed = 1;
    // Every k iterations rebuild all caches from scratch and compare (1e-8);
    // 0 disables the audit.
    std::uint64_t check_every = 0;

    static McmcConfig defaults(ObservationMode mode);
};

enum class MoveKind { split, merge, gibbs, empty_clique, pi, hyper };

struct MoveStats {
    std::uint64_t proposed[6] = {0, 0, 0, 0, 0, 0};
    std::uint64_t accepted[6] = {0, 0, 0, 0, 0, 0};
    double rate(MoveKind k) const {
        auto i = static_cast<std::size_t>(k);
        return proposed[i] ? double(accepted[i]) / double(proposed[i]) : 0.0;
    }
};

// Live sampler state. Keeps incremental structures (pair coverage counts,
// membership histograms, duplicate-row and duplicate-column bookkeeping) so
// that the joint density and likelihood update in time proportional to the
// cliques a move touches. debug_check() rebuilds everything from the rows and
// verifies the caches.
class McmcState {
  public:
    McmcState(const Graph& g, const McmcConfig& cfg, const Hyperparams& hp);
    static McmcState from_checkpoint(const Graph& g, const McmcConfig& cfg,
                                     const std::string& checkpoint_json);

    // One move drawn from the configured mix.
    void step();

    bool move_split_merge();
    // Resamples every (clique, vertex) entry whose removal keeps the vertex
    // covered elsewhere; returns the number of entries that changed.
    std::uint64_t move_gibbs_sweep();
    bool move_resample_empty();
    bool move_resample_pi();
    bool move_resample_hyperparams();

    // Conditional inclusion probability behind the sweep, for a row index in
    // cover() order. No state change.
    double gibbs_inclusion_probability(std::uint32_t row, Vertex v) const;

    double log_joint_cached() const { return lj_; }
    double log_lik_cached() const { return ll_; }
    const Hyperparams& hyperparams() const { return hp_; }
    void set_hyperparams(const Hyperparams& hp);
    double shared_pi() const { return shared_pi_; }
    std::uint32_t n_rows() const { return n_alive_; }
    std::uint32_t n_empty_rows() const { return n_empty_; }
    std::uint64_t iteration() const { return iteration_; }
    const MoveStats& stats() const { return stats_; }
    ObservationMode mode() const { return cfg_.mode; }
    const Graph& graph() const { return *g_; }
    Rng& rng() { return rng_; }

    // Materializes the current cover (alive rows in slot order, empty rows
    // included) with the graph's vertex count.
    CliqueMatrix cover() const;
    std::vector<double> per_clique_pis() const;

    // True iff every observed edge is covered and (in full mode) no covered
    // pair is a non-edge.
    bool cover_matches_graph() const;

    void debug_check(double tol = 1e-8) const;

    std::string checkpoint_to_json() const;

  private:
    struct Row {
        Clique verts;
        double pi = 1.0;
        bool alive = false;
    };

    const Graph* g_;
    McmcConfig cfg_;
    Hyperparams hp_;
    double shared_pi_;
    Rng rng_;
    std::uint64_t iteration_ = 0;
    MoveStats stats_;

    std::vector<Row> rows_;
    std::vector<std::uint32_t> free_slots_;
    std::uint32_t n_alive_ = 0;
    std::uint32_t n_empty_ = 0;

    std::vector<std::vector<std::uint32_t>> vertex_rows_;  // sorted slot ids per vertex
    std::unordered_map<std::uint64_t, std::uint32_t> pair_count_;
    std::unordered_map<std::uint64_t, double> pair_logq_;  // per-clique pi mode only
    std::uint64_t uncovered_edges_ = 0;

    std::map<std::uint32_t, std::uint64_t> m_hist_;            // membership count histogram
    std::map<std::uint32_t, std::uint64_t> edge_cov_hist_;     // covered observed pairs by count
    std::map<std::uint32_t, std::uint64_t> nonedge_cov_hist_;  // covered non-pairs by count
    std::uint64_t nonedge_cov_weighted_ = 0;                   // sum m over covered non-edges
    double ll_cov_sum_ = 0.0;                                  // per-clique pi mode running sum

    struct VecHash {
        std::size_t operator()(const std::vector<std::uint32_t>& v) const;
    };
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> row_mult_;
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> pattern_mult_;
    double pattern_log_mult_fact_ = 0.0;

    mutable std::vector<double> rate_prefix_;  // cumulative new-vertex rates for hp_
    double lj_ = 0.0;
    double ll_ = 0.0;

    // --- internals ---
    McmcState(const Graph& g, const McmcConfig& cfg, const Hyperparams& hp, std::nullptr_t);
    void seed_from_cover(const CliqueMatrix& z, const std::vector<double>* pis);
    void rebuild_from_rows();
    std::uint32_t add_row(const Clique& verts, double pi);
    void remove_row(std::uint32_t slot);
    void set_entry(std::uint32_t slot, Vertex v, bool present);
    void pattern_detach(Vertex v);
    void pattern_attach(Vertex v);
    double rate_prefix_sum(std::uint32_t n) const;
    double compute_log_joint(std::uint32_t n_rows) const;
    double compute_log_joint_for(const Hyperparams& hp, std::uint32_t n_rows,
                                 double rate_sum) const;
    double compute_log_lik_shared(double pi) const;
    double compute_log_lik() const;
    void refresh_caches();
    double pair_loglik_term(bool is_edge, std::uint32_t count, double sum_log1mpi,
                            double shared_pi) const;
    double inclusion_log_odds(std::uint32_t slot, Vertex v) const;
    std::uint32_t find_empty_slot() const;

    bool try_split(Vertex i, Vertex j, std::uint32_t slot);
    bool try_merge(Vertex i, Vertex j, std::uint32_t slot_a, std::uint32_t slot_b);
    double split_assignment_log_prob(const Clique& parent, Vertex i, Vertex j, bool filter,
                                     bool sample, Clique& c1, Clique& c2, bool& feasible);
    std::uint32_t count_rows_equal(const Clique& verts) const;
};

struct TraceRow {
    std::uint64_t iteration = 0;
    double log_joint = 0.0;
    double log_lik = 0.0;
    std::uint32_t n_cliques = 0;
    std::uint32_t n_empty = 0;
    std::uint32_t n_vertices = 0;
    double pi = 0.0;
    double accept_split = 0.0;
    double accept_merge = 0.0;
    double accept_empty = 0.0;
    double accept_pi = 0.0;
    double accept_hyper = 0.0;
};
std::string trace_csv_header();
std::string trace_csv_row(const TraceRow& r);
TraceRow make_trace_row(const McmcState& s);

struct McmcSample {
    std::uint64_t iteration = 0;
    CliqueMatrix cover;
    double pi = 0.0;
    std::vector<double> per_clique_pi;
    Hyperparams hp;
    double log_joint = 0.0;
    double log_lik = 0.0;
};

struct McmcResult {
    std::vector<McmcSample> samples;
    MoveStats stats;
    double final_log_joint = 0.0;
    double final_log_lik = 0.0;
};

// Runs cfg.iterations moves, collecting every cfg.thinning-th state after
// cfg.burn_in. The observer (if any) fires every trace_every iterations.
McmcResult run_mcmc(const Graph& g, const McmcConfig& cfg, const Hyperparams& hp,
                    const std::function<void(const TraceRow&)>& observer = nullptr,
                    std::uint64_t trace_every = 100);
McmcResult run_mcmc(McmcState& state, const McmcConfig& cfg,
                    const std::function<void(const TraceRow&)>& observer = nullptr,
                    std::uint64_t trace_every = 100);

// --- hyperparameter fitting ---

// Unconstrained coordinates (log alpha, logit sigma, log(c+sigma), log tau).
std::array<double, 4> hp_to_unconstrained(const Hyperparams& hp);
Hyperparams hp_from_unconstrained(const std::array<double, 4>& x);

// Analytic gradient of log_joint in the unconstrained coordinates.
std::array<double, 4> log_joint_gradient(const CliqueMatrix& z, const Hyperparams& hp,
                                         bool include_n_prior);

struct GradientFitConfig {
    Hyperparams init;
    std::uint32_t max_iters = 2000;
    double tol = 1e-9;  // on the gradient sup-norm
    bool include_n_prior = true;
};
struct GradientFitResult {
    Hyperparams hp;
    double log_joint = 0.0;
    std::uint32_t iterations = 0;
    bool converged = false;
};
GradientFitResult fit_hyperparams_gradient(const CliqueMatrix& z, const GradientFitConfig& cfg);

struct MhFitConfig {
    Hyperparams init;
    std::uint64_t iterations = 20000;
    std::uint64_t burn_in = 2000;
    double step = 0.15;
    std::uint64_t seed = 1;
    bool include_n_prior = true;
};
struct MhFitResult {
    std::vector<Hyperparams> samples;
    Hyperparams posterior_mean;
    double acceptance_rate = 0.0;
};
MhFitResult fit_hyperparams_mh(const CliqueMatrix& z, const MhFitConfig& cfg);

// Log prior density of the hyperparameters in unconstrained coordinates
// (Exp(1) on alpha, flat on sigma, Exp(1) on c+sigma, Gamma(1, 0.01) on tau,
// plus the change-of-variables terms).
double hyper_log_prior_unconstrained(const Hyperparams& hp);

}  // namespace rcc
