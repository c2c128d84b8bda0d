// Sequential urn scheme for random clique covers: membership of each new
// clique in existing vertex columns, Poisson counts of fresh vertices, the
// matching joint density, and the moment/asymptotic predictions used to
// validate simulations.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rcc/clique_matrix.hpp"
#include "rcc/hyperparams.hpp"
#include "rcc/rng.hpp"

namespace rcc {

// P(clique n contains an existing vertex seen m times before) = (m - sigma) / (n + c - 1).
// Rows are 1-indexed here; n must be >= 2 and 1 <= m <= n-1.
double predictive_prob(std::uint32_t m, std::uint32_t n, const Hyperparams& hp);

// Poisson rate for brand-new vertices in row n (1-indexed):
// alpha * Gamma(1+c) * Gamma(n+c+sigma-1) / (Gamma(n+c) * Gamma(c+sigma)).
double new_vertex_rate(std::uint32_t n, const Hyperparams& hp);

// Prefix sums of new_vertex_rate, computed by the exact ratio recurrence
// rate_{n+1} = rate_n * (n+c+sigma-1) / (n+c). Entry [n] holds sum_{k<=n}.
std::vector<double> new_vertex_rate_prefix(std::uint32_t n_max, const Hyperparams& hp);

// Draws a clique matrix with n_cliques rows (Poisson(tau)-many when nullopt).
CliqueMatrix sample_clique_matrix(const Hyperparams& hp, std::optional<std::uint32_t> n_cliques,
                                  Rng& rng);

// Vertex totals after each of the first n_cliques rows. Identity-free
// shortcut: the number of fresh vertices per row is an independent Poisson,
// so this matches sample_clique_matrix's |V| trajectory in distribution at a
// fraction of the cost.
std::vector<std::uint32_t> sample_vertex_count_trajectory(const Hyperparams& hp,
                                                          std::uint32_t n_cliques, Rng& rng);

// Histogram of per-vertex membership counts after n_cliques rows, evolved on
// count classes only (vertices with equal counts are exchangeable). Entry [m]
// is the number of vertices appearing in exactly m cliques, m >= 1.
std::vector<std::uint64_t> sample_membership_count_histogram(const Hyperparams& hp,
                                                             std::uint32_t n_cliques, Rng& rng);

// Log probability of the multiset of membership columns of Z (row order does
// not matter). With include_n_prior, adds log PoissonPMF(n_cliques; tau).
// All-zero columns are rejected; all-zero rows are fine.
double log_joint(const CliqueMatrix& z, const Hyperparams& hp, bool include_n_prior);

// Exact E|V| after n_cliques rows (= sum of the new-vertex rates), and its
// large-N companion (alpha/sigma) * Gamma(c+1)/Gamma(c+sigma) * N^sigma.
double expected_vertex_count(const Hyperparams& hp, std::uint32_t n_cliques);
double expected_vertex_count_asymptotic(const Hyperparams& hp, std::uint32_t n_cliques);

// Expected number of vertices belonging to exactly j cliques out of N:
// alpha * Gamma(j-sigma) * Gamma(1+c) / (j! * Gamma(1-sigma) * Gamma(c+sigma)) * N^sigma.
double zipf_count_prediction(const Hyperparams& hp, std::uint32_t n_cliques, std::uint32_t j);

// Expected shared-vertex count between two cliques: alpha * (1-sigma) / (1+c).
double expected_clique_overlap(const Hyperparams& hp);

// Density of the atom intensity at mu in (0, 1]:
// alpha * Gamma(1+c) / (Gamma(1-sigma) * Gamma(c+sigma)) * mu^(-sigma-1) * (1-mu)^(c+sigma-1).
double levy_density(double mu, const Hyperparams& hp);

// One realization of the atom weights above the truncation level, drawn by
// thinning a two-piece power-law envelope (exact on (truncation, 1]).
struct AtomMeasure {
    double truncation_level = 0.0;
    std::vector<double> weights;  // each in (truncation_level, 1]
};
AtomMeasure sample_atoms(const Hyperparams& hp, double truncation_level, Rng& rng);

// Monte-Carlo estimate of the expected number of distinct graph edges after
// n_cliques rows, E|E| = 1/2 * integral of (1 - (1-wv)^N) d(nu x nu), using
// independent atom realizations truncated at `truncation`. The returned
// truncation_bound estimates the mass lost below the cutoff; a warning flag
// is set when it exceeds 1% of the estimate.
struct EdgeCountEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double truncation_bound = 0.0;
    bool truncation_warning = false;
    std::uint32_t replicates = 0;
};
EdgeCountEstimate expected_edge_count_mc(const Hyperparams& hp, std::uint32_t n_cliques,
                                         double truncation, std::uint32_t replicates, Rng& rng);

// Default truncation heuristic for the estimator above.
double default_edge_count_truncation(std::uint32_t n_cliques);

// First moment of the atom intensity restricted to (0, upper): used for the
// truncation bound. The full integral (upper = 1) equals alpha.
double levy_first_moment_below(const Hyperparams& hp, double upper);

}  // namespace rcc
