#include "rcc/sbibp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace rcc {

namespace {

double log_poisson_pmf(std::uint64_t k, double rate) {
    return double(k) * std::log(rate) - rate - std::lgamma(double(k) + 1.0);
}

// alpha * Gamma(1+c) / (Gamma(1-sigma) * Gamma(c+sigma)), the constant in
// front of the intensity density.
double levy_constant(const Hyperparams& hp) {
    return hp.alpha * std::exp(std::lgamma(1.0 + hp.c) - std::lgamma(1.0 - hp.sigma) -
                               std::lgamma(hp.c + hp.sigma));
}

}  // namespace

double predictive_prob(std::uint32_t m, std::uint32_t n, const Hyperparams& hp) {
    if (n < 2) throw std::invalid_argument("predictive_prob: defined for rows n >= 2");
    if (m < 1 || m > n - 1)
        throw std::invalid_argument("predictive_prob: need 1 <= m <= n-1, got m=" +
                                    std::to_string(m) + " n=" + std::to_string(n));
    return (double(m) - hp.sigma) / (double(n) + hp.c - 1.0);
}

double new_vertex_rate(std::uint32_t n, const Hyperparams& hp) {
    if (n < 1) throw std::invalid_argument("new_vertex_rate: rows are 1-indexed");
    return hp.alpha * std::exp(std::lgamma(1.0 + hp.c) + std::lgamma(double(n) + hp.c + hp.sigma - 1.0) -
                               std::lgamma(double(n) + hp.c) - std::lgamma(hp.c + hp.sigma));
}

std::vector<double> new_vertex_rate_prefix(std::uint32_t n_max, const Hyperparams& hp) {
    std::vector<double> prefix(std::size_t(n_max) + 1, 0.0);
    double rate = hp.alpha;  // row 1
    for (std::uint32_t n = 1; n <= n_max; ++n) {
        prefix[n] = prefix[n - 1] + rate;
        rate *= (double(n) + hp.c + hp.sigma - 1.0) / (double(n) + hp.c);
    }
    return prefix;
}

CliqueMatrix sample_clique_matrix(const Hyperparams& hp, std::optional<std::uint32_t> n_cliques,
                                  Rng& rng) {
    std::uint32_t n_rows = n_cliques ? *n_cliques : [&] {
        std::poisson_distribution<std::uint32_t> pois(hp.tau);
        return pois(rng);
    }();

    std::vector<Clique> rows;
    rows.reserve(n_rows);
    std::vector<std::uint32_t> counts;  // membership count per vertex so far
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double rate = hp.alpha;
    for (std::uint32_t n = 1; n <= n_rows; ++n) {
        Clique row;
        double denom = double(n) + hp.c - 1.0;
        for (Vertex v = 0; v < counts.size(); ++v)
            if (unif(rng) * denom < double(counts[v]) - hp.sigma) row.push_back(v);
        std::poisson_distribution<std::uint32_t> fresh(rate);
        std::uint32_t k_new = fresh(rng);
        for (std::uint32_t k = 0; k < k_new; ++k) row.push_back(Vertex(counts.size() + k));
        for (Vertex v : row) {
            if (v < counts.size())
                ++counts[v];
            else
                counts.push_back(1);
        }
        rows.push_back(std::move(row));
        rate *= (double(n) + hp.c + hp.sigma - 1.0) / (double(n) + hp.c);
    }
    return CliqueMatrix(std::uint32_t(counts.size()), std::move(rows));
}

std::vector<std::uint32_t> sample_vertex_count_trajectory(const Hyperparams& hp,
                                                          std::uint32_t n_cliques, Rng& rng) {
    std::vector<std::uint32_t> totals(n_cliques, 0);
    std::uint32_t total = 0;
    double rate = hp.alpha;
    for (std::uint32_t n = 1; n <= n_cliques; ++n) {
        std::poisson_distribution<std::uint32_t> fresh(rate);
        total += fresh(rng);
        totals[n - 1] = total;
        rate *= (double(n) + hp.c + hp.sigma - 1.0) / (double(n) + hp.c);
    }
    return totals;
}

std::vector<std::uint64_t> sample_membership_count_histogram(const Hyperparams& hp,
                                                             std::uint32_t n_cliques, Rng& rng) {
    // Vertices with equal membership count are exchangeable under the urn, so
    // the histogram is itself Markov: each class m promotes a Binomial
    // thinning to m+1 and fresh vertices enter at m = 1.
    std::map<std::uint32_t, std::uint64_t> hist;
    double rate = hp.alpha;
    for (std::uint32_t n = 1; n <= n_cliques; ++n) {
        double denom = double(n) + hp.c - 1.0;
        // Thin each class against its pre-row count. Iterating the live map
        // while inserting m+1 keys is unsafe (the end() sentinel re-binds), so
        // walk a snapshot instead.
        std::vector<std::pair<std::uint32_t, std::uint64_t>> classes(hist.begin(), hist.end());
        for (auto it = classes.rbegin(); it != classes.rend(); ++it) {
            double p = (double(it->first) - hp.sigma) / denom;
            std::binomial_distribution<std::uint64_t> bin(it->second, p);
            std::uint64_t up = bin(rng);
            if (up > 0) {
                hist[it->first + 1] += up;
                hist[it->first] -= up;
            }
        }
        std::poisson_distribution<std::uint64_t> fresh(rate);
        std::uint64_t k_new = fresh(rng);
        if (k_new > 0) hist[1] += k_new;
        for (auto it = hist.begin(); it != hist.end();)
            it = it->second == 0 ? hist.erase(it) : std::next(it);
        rate *= (double(n) + hp.c + hp.sigma - 1.0) / (double(n) + hp.c);
    }
    std::vector<std::uint64_t> out(hist.empty() ? 1 : hist.rbegin()->first + 1, 0);
    for (auto [m, h] : hist) out[m] = h;
    return out;
}

double log_joint(const CliqueMatrix& z, const Hyperparams& hp, bool include_n_prior) {
    const std::uint32_t n = z.n_cliques();
    const auto counts = z.column_counts();  // throws on an uncovered vertex
    const double cs = hp.c + hp.sigma;

    double lj = 0.0;
    const double per_vertex_const = std::log(hp.alpha) + std::lgamma(1.0 + hp.c) -
                                    std::lgamma(cs) - std::lgamma(1.0 - hp.sigma) -
                                    std::lgamma(double(n) + hp.c);
    for (std::uint32_t m : counts)
        lj += per_vertex_const + std::lgamma(double(m) - hp.sigma) +
              std::lgamma(double(n) - double(m) + cs);
    lj -= new_vertex_rate_prefix(n, hp)[n];

    // Columns with identical membership patterns are indistinguishable, so
    // the multiset density divides by the pattern multiplicities.
    std::map<std::vector<std::uint32_t>, std::uint64_t> patterns;
    std::vector<std::vector<std::uint32_t>> vertex_rows(z.vertex_count());
    for (std::uint32_t r = 0; r < n; ++r)
        for (Vertex v : z.row(r)) vertex_rows[v].push_back(r);
    for (auto& p : vertex_rows) ++patterns[p];
    for (const auto& [p, mult] : patterns) lj -= std::lgamma(double(mult) + 1.0);

    if (include_n_prior) lj += log_poisson_pmf(n, hp.tau);
    return lj;
}

double expected_vertex_count(const Hyperparams& hp, std::uint32_t n_cliques) {
    return new_vertex_rate_prefix(n_cliques, hp)[n_cliques];
}

double expected_vertex_count_asymptotic(const Hyperparams& hp, std::uint32_t n_cliques) {
    return hp.alpha / hp.sigma *
           std::exp(std::lgamma(hp.c + 1.0) - std::lgamma(hp.c + hp.sigma)) *
           std::pow(double(n_cliques), hp.sigma);
}

double zipf_count_prediction(const Hyperparams& hp, std::uint32_t n_cliques, std::uint32_t j) {
    if (j < 1) throw std::invalid_argument("zipf_count_prediction: j >= 1");
    return hp.alpha *
           std::exp(std::lgamma(double(j) - hp.sigma) + std::lgamma(1.0 + hp.c) -
                    std::lgamma(double(j) + 1.0) - std::lgamma(1.0 - hp.sigma) -
                    std::lgamma(hp.c + hp.sigma)) *
           std::pow(double(n_cliques), hp.sigma);
}

double expected_clique_overlap(const Hyperparams& hp) {
    return hp.alpha * (1.0 - hp.sigma) / (1.0 + hp.c);
}

double levy_density(double mu, const Hyperparams& hp) {
    if (!(mu > 0.0) || !(mu <= 1.0))
        throw std::invalid_argument("levy_density: mu must lie in (0, 1]");
    return levy_constant(hp) * std::pow(mu, -hp.sigma - 1.0) *
           std::pow(1.0 - mu, hp.c + hp.sigma - 1.0);
}

AtomMeasure sample_atoms(const Hyperparams& hp, double truncation_level, Rng& rng) {
    if (!(truncation_level > 0.0) || !(truncation_level < 1.0))
        throw std::invalid_argument("sample_atoms: truncation level must lie in (0, 1)");
    const double cs = hp.c + hp.sigma;
    const double cons = levy_constant(hp);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    AtomMeasure out;
    out.truncation_level = truncation_level;

    // Piece 1, (eps, 1/2]: dominate (1-mu)^(cs-1) by its sup and propose from
    // the pure power law mu^(-sigma-1), exact by inverse cdf.
    if (truncation_level < 0.5) {
        const double bound = cs >= 1.0 ? 1.0 : std::pow(2.0, 1.0 - cs);
        const double lo_pow = std::pow(truncation_level, -hp.sigma);
        const double hi_pow = std::pow(0.5, -hp.sigma);
        const double mass = cons * bound * (lo_pow - hi_pow) / hp.sigma;
        std::poisson_distribution<std::uint32_t> pois(mass);
        std::uint32_t n_prop = pois(rng);
        for (std::uint32_t k = 0; k < n_prop; ++k) {
            double u = unif(rng);
            double mu = std::pow(lo_pow - u * (lo_pow - hi_pow), -1.0 / hp.sigma);
            if (unif(rng) * bound <= std::pow(1.0 - mu, cs - 1.0)) out.weights.push_back(mu);
        }
    }

    // Piece 2, (max(eps,1/2), 1]: dominate mu^(-sigma-1) by its sup and
    // propose from (1-mu)^(cs-1) via t = 1-mu, t = t_max * u^(1/cs).
    {
        const double lo = std::max(truncation_level, 0.5);
        const double t_max = 1.0 - lo;
        if (t_max > 0.0) {
            const double bound = std::pow(lo, -hp.sigma - 1.0);
            const double mass = cons * bound * std::pow(t_max, cs) / cs;
            std::poisson_distribution<std::uint32_t> pois(mass);
            std::uint32_t n_prop = pois(rng);
            for (std::uint32_t k = 0; k < n_prop; ++k) {
                double t = t_max * std::pow(unif(rng), 1.0 / cs);
                double mu = 1.0 - t;
                if (mu <= lo) continue;  // boundary guard for t == t_max
                if (unif(rng) * bound <= std::pow(mu, -hp.sigma - 1.0)) out.weights.push_back(mu);
            }
        }
    }
    return out;
}

double levy_first_moment_below(const Hyperparams& hp, double upper) {
    if (!(upper >= 0.0) || !(upper <= 1.0))
        throw std::invalid_argument("levy_first_moment_below: upper must lie in [0, 1]");
    if (upper == 0.0) return 0.0;
    // integral of mu * density = alpha * I_upper(1-sigma, c+sigma).
    return hp.alpha * boost::math::ibeta(1.0 - hp.sigma, hp.c + hp.sigma, upper);
}

double default_edge_count_truncation(std::uint32_t n_cliques) {
    return std::min(0.01, 0.1 / double(std::max<std::uint32_t>(n_cliques, 1)));
}

EdgeCountEstimate expected_edge_count_mc(const Hyperparams& hp, std::uint32_t n_cliques,
                                         double truncation, std::uint32_t replicates, Rng& rng) {
    if (replicates == 0) throw std::invalid_argument("expected_edge_count_mc: replicates >= 1");
    EdgeCountEstimate est;
    est.replicates = replicates;
    if (n_cliques == 0) return est;

    double sum = 0.0, sumsq = 0.0;
    const double n = double(n_cliques);
    for (std::uint32_t r = 0; r < replicates; ++r) {
        AtomMeasure w = sample_atoms(hp, truncation, rng);
        AtomMeasure v = sample_atoms(hp, truncation, rng);
        double s = 0.0;
        for (double wi : w.weights)
            for (double vj : v.weights) s += -std::expm1(n * std::log1p(-wi * vj));
        s *= 0.5;
        sum += s;
        sumsq += s * s;
    }
    est.estimate = sum / replicates;
    if (replicates > 1) {
        double var = (sumsq - sum * sum / replicates) / (double(replicates) - 1.0);
        est.std_error = std::sqrt(std::max(0.0, var) / replicates);
    }
    // Pairs with one weight below the cutoff contribute at most
    // N * int_{mu<eps} mu dnu * int mu dnu on either side.
    est.truncation_bound = n * levy_first_moment_below(hp, truncation) * hp.alpha;
    est.truncation_warning = est.truncation_bound > 0.01 * std::max(est.estimate, 1e-300);
    return est;
}

}  // namespace rcc
