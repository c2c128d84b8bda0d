#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "rcc/inference.hpp"
#include "rcc/sbibp.hpp"

namespace rcc {

namespace {

// Sufficient statistics of a cover for hyperparameter work: the joint
// density depends on Z only through the membership histogram, the row count
// and a constant.
struct CoverStats {
    std::uint32_t n_rows = 0;
    std::uint64_t n_vertices = 0;
    std::map<std::uint32_t, std::uint64_t> m_hist;
    double hp_free_const = 0.0;  // duplicate-column correction

    explicit CoverStats(const CliqueMatrix& z) {
        n_rows = z.n_cliques();
        auto counts = z.column_counts();
        n_vertices = counts.size();
        for (auto m : counts) ++m_hist[m];
        std::map<std::vector<std::uint32_t>, std::uint64_t> patterns;
        std::vector<std::vector<std::uint32_t>> vertex_rows(z.vertex_count());
        for (std::uint32_t r = 0; r < z.n_cliques(); ++r)
            for (Vertex v : z.row(r)) vertex_rows[v].push_back(r);
        for (auto& p : vertex_rows) ++patterns[p];
        for (const auto& [p, mult] : patterns) hp_free_const -= std::lgamma(double(mult) + 1.0);
    }

    double log_joint(const Hyperparams& hp, bool include_n_prior) const {
        const double n = double(n_rows);
        const double cs = hp.c + hp.sigma;
        const double per_vertex = std::log(hp.alpha) + std::lgamma(1.0 + hp.c) -
                                  std::lgamma(cs) - std::lgamma(1.0 - hp.sigma) -
                                  std::lgamma(n + hp.c);
        double lj = hp_free_const - new_vertex_rate_prefix(n_rows, hp)[n_rows];
        for (const auto& [m, k] : m_hist)
            lj += double(k) * (per_vertex + std::lgamma(double(m) - hp.sigma) +
                               std::lgamma(n - double(m) + cs));
        if (include_n_prior) lj += n * std::log(hp.tau) - hp.tau - std::lgamma(n + 1.0);
        return lj;
    }

    // Gradient in the unconstrained coordinates (log alpha, logit sigma,
    // log(c+sigma), log tau).
    std::array<double, 4> gradient(const Hyperparams& hp, bool include_n_prior) const {
        using boost::math::digamma;
        const double n = double(n_rows);
        const double k_total = double(n_vertices);
        const double cs = hp.c + hp.sigma;

        // Rate sums and their sigma / c partials via the digamma recurrence
        // psi(x+1) = psi(x) + 1/x along the rows.
        double s = 0.0, ds_sigma = 0.0, ds_c = 0.0;
        {
            double r = 1.0;  // rate_n / alpha
            double psi_top = digamma(cs);         // psi(n + c + sigma - 1) at n = 1
            double psi_bot = digamma(1.0 + hp.c); // psi(n + c) at n = 1
            const double psi_cs = digamma(cs);
            const double psi_c1 = digamma(1.0 + hp.c);
            for (std::uint32_t row = 1; row <= n_rows; ++row) {
                s += r;
                ds_sigma += r * (psi_top - psi_cs);
                ds_c += r * (psi_c1 + psi_top - psi_bot - psi_cs);
                double top = double(row) + cs - 1.0;
                double bot = double(row) + hp.c;
                r *= top / bot;
                psi_top += 1.0 / top;
                psi_bot += 1.0 / bot;
            }
        }

        double d_alpha = k_total / hp.alpha - s;
        double d_sigma = k_total * (digamma(1.0 - hp.sigma) - digamma(cs)) - hp.alpha * ds_sigma;
        double d_c = k_total * (digamma(1.0 + hp.c) - digamma(cs) - digamma(n + hp.c)) -
                     hp.alpha * ds_c;
        for (const auto& [m, k] : m_hist) {
            double tail = digamma(n - double(m) + cs);
            d_sigma += double(k) * (tail - digamma(double(m) - hp.sigma));
            d_c += double(k) * tail;
        }
        double d_tau = include_n_prior ? n / hp.tau - 1.0 : 0.0;

        return {hp.alpha * d_alpha, hp.sigma * (1.0 - hp.sigma) * (d_sigma - d_c), cs * d_c,
                hp.tau * d_tau};
    }
};

}  // namespace

std::array<double, 4> hp_to_unconstrained(const Hyperparams& hp) {
    return {std::log(hp.alpha), std::log(hp.sigma) - std::log1p(-hp.sigma),
            std::log(hp.c + hp.sigma), std::log(hp.tau)};
}

Hyperparams hp_from_unconstrained(const std::array<double, 4>& x) {
    double sigma = 1.0 / (1.0 + std::exp(-x[1]));
    sigma = std::min(std::max(sigma, 1e-15), 1.0 - 1e-15);
    double group = std::exp(x[2]);
    return Hyperparams(std::exp(x[0]), sigma, group - sigma, std::exp(x[3]));
}

double hyper_log_prior_unconstrained(const Hyperparams& hp) {
    const double group = hp.c + hp.sigma;
    // Exp(1) on alpha and on c+sigma, flat on sigma, Gamma(1, 0.01) on tau,
    // each with its transform Jacobian.
    return -hp.alpha + std::log(hp.alpha) + std::log(hp.sigma * (1.0 - hp.sigma)) - group +
           std::log(group) + std::log(0.01) - 0.01 * hp.tau + std::log(hp.tau);
}

std::array<double, 4> log_joint_gradient(const CliqueMatrix& z, const Hyperparams& hp,
                                         bool include_n_prior) {
    return CoverStats(z).gradient(hp, include_n_prior);
}

GradientFitResult fit_hyperparams_gradient(const CliqueMatrix& z, const GradientFitConfig& cfg) {
    CoverStats stats(z);
    GradientFitResult res;
    auto x = hp_to_unconstrained(cfg.init);
    Hyperparams hp = cfg.init;
    double f = stats.log_joint(hp, cfg.include_n_prior);
    double t = 0.1;

    std::uint32_t iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        auto g = stats.gradient(hp, cfg.include_n_prior);
        double sup = 0.0;
        for (double gi : g) sup = std::max(sup, std::abs(gi));
        if (sup < cfg.tol) {
            res.converged = true;
            break;
        }
        // Plain ascent with a doubling/halving step: cheap and monotone.
        bool improved = false;
        while (t >= 1e-18) {
            std::array<double, 4> x1;
            bool sane = true;
            for (std::size_t k = 0; k < 4; ++k) {
                x1[k] = x[k] + t * g[k];
                sane = sane && std::abs(x1[k]) < 200.0;
            }
            if (sane) {
                Hyperparams hp1 = hp_from_unconstrained(x1);
                double f1 = stats.log_joint(hp1, cfg.include_n_prior);
                if (std::isfinite(f1) && f1 > f) {
                    x = x1;
                    hp = hp1;
                    f = f1;
                    t = std::min(t * 2.0, 1.0);
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!improved) break;
    }
    res.hp = hp;
    res.log_joint = f;
    res.iterations = iter;
    return res;
}

MhFitResult fit_hyperparams_mh(const CliqueMatrix& z, const MhFitConfig& cfg) {
    CoverStats stats(z);
    MhFitResult res;
    Rng rng(cfg.seed);
    std::normal_distribution<double> step(0.0, cfg.step);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Hyperparams hp = cfg.init;
    double target = stats.log_joint(hp, cfg.include_n_prior) + hyper_log_prior_unconstrained(hp);
    std::uint64_t accepted = 0;
    double sum[4] = {0, 0, 0, 0};
    std::uint64_t kept = 0;

    for (std::uint64_t it = 1; it <= cfg.iterations; ++it) {
        auto x = hp_to_unconstrained(hp);
        bool sane = true;
        for (double& xi : x) {
            xi += step(rng);
            sane = sane && std::abs(xi) < 200.0;
        }
        if (sane) {
            Hyperparams hp1 = hp_from_unconstrained(x);
            double target1 =
                stats.log_joint(hp1, cfg.include_n_prior) + hyper_log_prior_unconstrained(hp1);
            if (std::log(unif(rng)) < target1 - target) {
                hp = hp1;
                target = target1;
                ++accepted;
            }
        }
        if (it > cfg.burn_in) {
            res.samples.push_back(hp);
            sum[0] += hp.alpha;
            sum[1] += hp.sigma;
            sum[2] += hp.c;
            sum[3] += hp.tau;
            ++kept;
        }
    }
    res.acceptance_rate = double(accepted) / double(cfg.iterations);
    if (kept > 0)
        res.posterior_mean =
            Hyperparams(sum[0] / kept, sum[1] / kept, sum[2] / kept, sum[3] / kept);
    return res;
}

}  // namespace rcc
