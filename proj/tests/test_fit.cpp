// Hyperparameter fitting: coordinate transforms, the analytic gradient
// against high-order finite differences, gradient ascent on synthetic covers,
// and the MH sampler's posterior.
#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rcc/inference.hpp"
#include "rcc/sbibp.hpp"

using namespace rcc;

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

// Fourth-order central difference of log_joint along unconstrained axis k.
double fd_gradient(const CliqueMatrix& z, const std::array<double, 4>& x, std::size_t k, double h,
                   bool include_n_prior) {
    auto at = [&](double offset) {
        auto xs = x;
        xs[k] += offset;
        return log_joint(z, hp_from_unconstrained(xs), include_n_prior);
    };
    return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("unconstrained coordinates round trip") {
    const Hyperparams cases[] = {
        Hyperparams(1.0, 0.5, 1.0, 100.0),
        Hyperparams(0.05, 0.02, 3.7, 0.5),
        Hyperparams(20.0, 0.93, -0.4, 12.0),  // c negative but c + sigma > 0
        Hyperparams(3.0, 0.5, 1.0, 50.0),
    };
    for (const Hyperparams& hp : cases) {
        const Hyperparams back = hp_from_unconstrained(hp_to_unconstrained(hp));
        CHECK(back.alpha == doctest::Approx(hp.alpha).epsilon(1e-12));
        CHECK(back.sigma == doctest::Approx(hp.sigma).epsilon(1e-12));
        CHECK(back.c == doctest::Approx(hp.c).epsilon(1e-11));
        CHECK(back.tau == doctest::Approx(hp.tau).epsilon(1e-12));
    }
    // And the other direction, starting from raw coordinates.
    const std::array<double, 4> x = {0.3, -1.2, 0.9, 2.5};
    const auto x2 = hp_to_unconstrained(hp_from_unconstrained(x));
    for (std::size_t k = 0; k < 4; ++k) CHECK(x2[k] == doctest::Approx(x[k]).epsilon(1e-12));
}

TEST_CASE("unconstrained prior density matches the hand value") {
    // At (1, 0.5, 1, 100): Exp(1) terms give -1 - 1.5, the Gamma(1, 0.01) term
    // gives log(0.01) - 1, and the Jacobians contribute log(1 * 0.25 * 1.5 * 100).
    const double got = hyper_log_prior_unconstrained(Hyperparams(1.0, 0.5, 1.0, 100.0));
    const double want = -3.5 + std::log(0.375);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));

    // Doubling alpha changes the density by exactly -1 + log 2.
    const double shifted = hyper_log_prior_unconstrained(Hyperparams(2.0, 0.5, 1.0, 100.0));
    CHECK(shifted - got == doctest::Approx(-1.0 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches finite differences") {
    Rng rng(90210);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    int tested = 0;
    while (tested < 6) {
        const Hyperparams draw_hp(0.5 + 3.5 * unif(rng), 0.2 + 0.5 * unif(rng),
                                  0.1 + 1.9 * unif(rng), 5.0 + 40.0 * unif(rng));
        const auto n = std::uint32_t(10 + 50 * unif(rng));
        const CliqueMatrix z = sample_clique_matrix(draw_hp, n, rng);
        if (z.vertex_count() == 0) continue;
        ++tested;

        // Evaluate at a second point so the test is not tied to the optimum.
        const Hyperparams at_hp(0.5 + 3.5 * unif(rng), 0.2 + 0.5 * unif(rng),
                                0.1 + 1.9 * unif(rng), 5.0 + 40.0 * unif(rng));
        const auto x = hp_to_unconstrained(at_hp);
        for (const bool with_prior : {true, false}) {
            const auto grad = log_joint_gradient(z, at_hp, with_prior);
            for (std::size_t k = 0; k < 4; ++k) {
                const double fd = fd_gradient(z, x, k, 0.01, with_prior);
                CHECK(std::abs(grad[k] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("gradient ascent recovers sensible hyperparameters") {
    Rng rng(5150);
    const Hyperparams truth(3.0, 0.5, 1.0, 50.0);
    const CliqueMatrix z = sample_clique_matrix(truth, 50, rng);
    REQUIRE(z.vertex_count() > 30);

    GradientFitConfig cfg;
    cfg.init = Hyperparams(1.0, 0.3, 0.5, 10.0);
    cfg.max_iters = 20000;
    // The objective sits near -1e3, so float-level improvements dry up once
    // the gradient is around 1e-6; asking for much less than 1e-5 stalls.
    cfg.tol = 1e-5;
    const GradientFitResult res = fit_hyperparams_gradient(z, cfg);

    CHECK(res.converged);
    CHECK(res.iterations > 0);
    // Monotone ascent from the starting point, and at least as good as truth.
    CHECK(res.log_joint >= log_joint(z, cfg.init, true));
    CHECK(res.log_joint >= log_joint(z, truth, true));
    CHECK(res.log_joint == doctest::Approx(log_joint(z, res.hp, true)).epsilon(1e-12));

    // The row-count coordinate has a closed-form optimum: tau = n exactly.
    CHECK(res.hp.tau == doctest::Approx(50.0).epsilon(1e-6));
    // The shape parameters land near the generator, loosely.
    CHECK(res.hp.alpha > 1.0);
    CHECK(res.hp.alpha < 8.0);
    CHECK(res.hp.sigma > 0.25);
    CHECK(res.hp.sigma < 0.75);

    // At the reported optimum the gradient is flat.
    const auto g = log_joint_gradient(z, res.hp, true);
    for (double gk : g) CHECK(std::abs(gk) <= 1e-5);
}

TEST_CASE("gradient ascent respects the n-prior switch") {
    Rng rng(628);
    const CliqueMatrix z = sample_clique_matrix(Hyperparams(2.0, 0.4, 1.0, 20.0), 20, rng);
    GradientFitConfig cfg;
    cfg.init = Hyperparams(1.0, 0.5, 1.0, 7.0);
    cfg.include_n_prior = false;
    const GradientFitResult res = fit_hyperparams_gradient(z, cfg);
    // Without the row-count term tau has zero gradient and must not move.
    CHECK(res.hp.tau == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(res.log_joint == doctest::Approx(log_joint(z, res.hp, false)).epsilon(1e-12));
}

TEST_CASE("mh sampler bookkeeping") {
    Rng rng(31337);
    const CliqueMatrix z = sample_clique_matrix(Hyperparams(2.0, 0.5, 1.0, 15.0), 15, rng);
    REQUIRE(z.vertex_count() > 0);

    MhFitConfig cfg;
    cfg.init = Hyperparams(2.0, 0.5, 1.0, 15.0);
    cfg.iterations = 4000;
    cfg.burn_in = 1000;
    cfg.step = 0.15;
    cfg.seed = 99;
    const MhFitResult res = fit_hyperparams_mh(z, cfg);

    REQUIRE(res.samples.size() == 3000);
    CHECK(res.acceptance_rate > 0.05);
    CHECK(res.acceptance_rate < 0.9);

    // posterior_mean is the plain average of the kept draws.
    std::vector<double> a, s, c, t;
    for (const Hyperparams& hp : res.samples) {
        a.push_back(hp.alpha);
        s.push_back(hp.sigma);
        c.push_back(hp.c);
        t.push_back(hp.tau);
    }
    CHECK(res.posterior_mean.alpha == doctest::Approx(mean_of(a)).epsilon(1e-9));
    CHECK(res.posterior_mean.sigma == doctest::Approx(mean_of(s)).epsilon(1e-9));
    CHECK(res.posterior_mean.c == doctest::Approx(mean_of(c)).epsilon(1e-9));
    CHECK(res.posterior_mean.tau == doctest::Approx(mean_of(t)).epsilon(1e-9));

    // Same seed, same draws.
    const MhFitResult rerun = fit_hyperparams_mh(z, cfg);
    REQUIRE(rerun.samples.size() == res.samples.size());
    CHECK(rerun.posterior_mean.alpha == res.posterior_mean.alpha);
    CHECK(rerun.acceptance_rate == res.acceptance_rate);
}

TEST_CASE("mh posterior contracts around the generator on a large cover") {
    Rng rng(777);
    const Hyperparams truth(3.0, 0.5, 1.0, 400.0);
    const std::uint32_t n = 400;
    const CliqueMatrix z = sample_clique_matrix(truth, n, rng);
    REQUIRE(z.vertex_count() > 60);

    MhFitConfig cfg;
    cfg.init = Hyperparams(1.0, 0.3, 0.5, 100.0);
    cfg.iterations = 30000;
    cfg.burn_in = 5000;
    cfg.step = 0.12;
    cfg.seed = 4242;
    const MhFitResult res = fit_hyperparams_mh(z, cfg);

    CHECK(res.posterior_mean.alpha > 0.75 * truth.alpha);
    CHECK(res.posterior_mean.alpha < 1.25 * truth.alpha);
    CHECK(res.posterior_mean.sigma > truth.sigma - 0.08);
    CHECK(res.posterior_mean.sigma < truth.sigma + 0.08);

    // tau's conditional is conjugate: Gamma(n + 1, 1.01), mean about 397.
    const double tau_mean = double(n + 1) / 1.01;
    CHECK(res.posterior_mean.tau > 0.9 * tau_mean);
    CHECK(res.posterior_mean.tau < 1.1 * tau_mean);
}
