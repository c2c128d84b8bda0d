#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <doctest.h>

#include "rcc/sbibp.hpp"

using namespace rcc;

namespace {

double log_poisson_pmf(std::uint64_t k, double rate) {
    return static_cast<double>(k) * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1.0);
}

double sample_mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_stderr(const std::vector<double>& xs) {
    const double m = sample_mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) / static_cast<double>(xs.size()));
}

}  // namespace

TEST_CASE("hyperparameter validation") {
    CHECK_NOTHROW(Hyperparams(1.0, 0.5, 1.0, 1.0));
    CHECK_NOTHROW(Hyperparams(0.1, 0.99, -0.5, 200.0));  // c > -sigma is enough
    CHECK_THROWS_AS(Hyperparams(0.0, 0.5, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Hyperparams(1.0, 0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Hyperparams(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Hyperparams(1.0, 0.5, -0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Hyperparams(1.0, 0.5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("predictive inclusion probability") {
    // (m - sigma) / (n + c - 1) by hand: (1 - 0.5) / (2 + 1 - 1) = 1/4.
    Hyperparams hp(4.0, 0.5, 1.0, 1.0);
    CHECK(predictive_prob(1, 2, hp) == doctest::Approx(0.25).epsilon(1e-12));
    // (3 - 0.25) / (4 + 0.75 - 1) = 2.75 / 3.75 = 11/15.
    Hyperparams hp2(1.0, 0.25, 0.75, 1.0);
    CHECK(predictive_prob(3, 4, hp2) == doctest::Approx(11.0 / 15.0).epsilon(1e-12));

    CHECK_THROWS_AS(predictive_prob(0, 2, hp), std::invalid_argument);
    CHECK_THROWS_AS(predictive_prob(2, 2, hp), std::invalid_argument);
    CHECK_THROWS_AS(predictive_prob(1, 1, hp), std::invalid_argument);
}

TEST_CASE("new-vertex rates and their prefix sums") {
    Hyperparams hp(4.0, 0.5, 1.0, 1.0);
    // rate_1 = alpha; the ratio recurrence gives rate_2 = 4 * 1.5/2 = 3 and
    // rate_3 = 3 * 2.5/3 = 2.5.
    CHECK(new_vertex_rate(1, hp) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(new_vertex_rate(2, hp) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(new_vertex_rate(3, hp) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK_THROWS_AS(new_vertex_rate(0, hp), std::invalid_argument);

    const auto prefix = new_vertex_rate_prefix(40, hp);
    REQUIRE(prefix.size() == 41);
    CHECK(prefix[0] == doctest::Approx(0.0));
    double acc = 0.0;
    for (std::uint32_t n = 1; n <= 40; ++n) {
        acc += new_vertex_rate(n, hp);
        CHECK(prefix[n] == doctest::Approx(acc).epsilon(1e-11));
    }

    // A second parameter point, checked against the gamma-ratio form directly.
    Hyperparams hp2(2.5, 0.3, 0.4, 1.0);
    const double direct = 2.5 * std::exp(std::lgamma(1.4) + std::lgamma(7.0 + 0.4 + 0.3 - 1.0) -
                                         std::lgamma(7.4) - std::lgamma(0.7));
    CHECK(new_vertex_rate(7, hp2) == doctest::Approx(direct).epsilon(1e-11));
}

TEST_CASE("expected vertex counts") {
    Hyperparams hp(4.0, 0.5, 1.0, 1.0);
    CHECK(expected_vertex_count(hp, 2) == doctest::Approx(7.0).epsilon(1e-12));  // 4 + 3
    CHECK(expected_vertex_count(hp, 3) == doctest::Approx(9.5).epsilon(1e-12));  // + 2.5

    // Closed form at sigma = 1/2, c = 1: (alpha/sigma) * Gamma(2)/Gamma(1.5) * sqrt(N)
    // = 2 * alpha * 2/sqrt(pi) * sqrt(N).
    Hyperparams hp2(5.0, 0.5, 1.0, 1.0);
    const double asym = 20.0 / std::sqrt(M_PI) * std::sqrt(500.0);
    CHECK(expected_vertex_count_asymptotic(hp2, 500) == doctest::Approx(asym).epsilon(1e-12));
    // The exact sum approaches the asymptote from below at this scale.
    const double exact = expected_vertex_count(hp2, 500);
    CHECK(exact < asym);
    CHECK(exact > 0.9 * asym);
}

TEST_CASE("expected count of vertices in exactly j cliques") {
    // alpha=1, sigma=1/2, c=1, N=100: j=1 gives Gamma(1/2)Gamma(2) /
    // (Gamma(1/2)Gamma(3/2)) * 10 = 20/sqrt(pi); j=3 gives Gamma(5/2) /
    // (6 Gamma(1/2) Gamma(3/2)) * 10 = 2.5/sqrt(pi).
    Hyperparams hp(1.0, 0.5, 1.0, 1.0);
    CHECK(zipf_count_prediction(hp, 100, 1) == doctest::Approx(20.0 / std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(zipf_count_prediction(hp, 100, 3) == doctest::Approx(2.5 / std::sqrt(M_PI)).epsilon(1e-12));
    CHECK_THROWS_AS(zipf_count_prediction(hp, 100, 0), std::invalid_argument);

    // Successive terms obey the exact ratio (j - sigma) / (j + 1); the partial
    // sums approach the asymptotic vertex total from below (the tail decays
    // like j^{-1-sigma}, so it is slow but one-sided).
    Hyperparams hp3(2.0, 0.35, 0.6, 1.0);
    for (std::uint32_t j = 1; j <= 6; ++j) {
        CHECK(zipf_count_prediction(hp, 100, j + 1) / zipf_count_prediction(hp, 100, j) ==
              doctest::Approx((j - 0.5) / (j + 1.0)).epsilon(1e-11));
        CHECK(zipf_count_prediction(hp3, 50, j + 1) / zipf_count_prediction(hp3, 50, j) ==
              doctest::Approx((j - 0.35) / (j + 1.0)).epsilon(1e-11));
    }
    double total = 0.0;
    for (std::uint32_t j = 1; j <= 100; ++j) total += zipf_count_prediction(hp, 100, j);
    const double asym = expected_vertex_count_asymptotic(hp, 100);
    CHECK(total < asym);
    CHECK(total > 0.9 * asym);
}

TEST_CASE("expected overlap of two cliques") {
    CHECK(expected_clique_overlap(Hyperparams(5.0, 0.5, 1.0, 1.0)) ==
          doctest::Approx(1.25).epsilon(1e-12));
    CHECK(expected_clique_overlap(Hyperparams(3.0, 0.25, 0.5, 1.0)) ==
          doctest::Approx(1.5).epsilon(1e-12));  // 3 * 0.75 / 1.5
}

TEST_CASE("atom intensity density") {
    // alpha=1, sigma=1/2, c=1/2: the constant is Gamma(3/2)/(Gamma(1/2)Gamma(1))
    // = 1/2, and at mu = 1/2 the density is 2^{3/2}/2 = sqrt(2).
    Hyperparams hp(1.0, 0.5, 0.5, 1.0);
    CHECK(levy_density(0.5, hp) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // alpha=1, sigma=1/2, c=1: constant 2/pi, density at 1/2 is 4/pi.
    Hyperparams hp2(1.0, 0.5, 1.0, 1.0);
    CHECK(levy_density(0.5, hp2) == doctest::Approx(4.0 / M_PI).epsilon(1e-12));
    CHECK_THROWS_AS(levy_density(0.0, hp), std::invalid_argument);
    CHECK_THROWS_AS(levy_density(1.5, hp), std::invalid_argument);
}

TEST_CASE("restricted first moment of the atom intensity") {
    // sigma=1/2, c=1/2 makes the beta integrand flat in (1-mu): the regularized
    // incomplete beta is just sqrt(upper), so the moment below 1/4 is alpha/2.
    Hyperparams hp(1.0, 0.5, 0.5, 1.0);
    CHECK(levy_first_moment_below(hp, 0.25) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(levy_first_moment_below(hp, 1.0) == doctest::Approx(1.0).epsilon(1e-10));

    Hyperparams hp2(5.0, 0.5, 1.0, 1.0);
    CHECK(levy_first_moment_below(hp2, 1.0) == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(levy_first_moment_below(hp2, 0.3) < levy_first_moment_below(hp2, 0.6));
}

TEST_CASE("atom sampler matches the intensity it claims to draw from") {
    Hyperparams hp(5.0, 0.5, 1.0, 1.0);
    Rng rng(20240811);
    const double eps = 0.02;
    const int reps = 4000;

    // Expected atom count above the cutoff, by Simpson integration of the density.
    auto integrate = [&](double lo, double hi) {
        const int panels = 4000;
        const double h = (hi - lo) / panels;
        double s = levy_density(lo, hp) + levy_density(hi, hp);
        for (int k = 1; k < panels; ++k)
            s += (k % 2 ? 4.0 : 2.0) * levy_density(lo + k * h, hp);
        return s * h / 3.0;
    };
    // Stay clear of the integrable endpoint singularities.
    const double count_mid = integrate(eps, 0.999);

    std::vector<double> counts_mid, weight_sums;
    counts_mid.reserve(reps);
    weight_sums.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        const AtomMeasure atoms = sample_atoms(hp, eps, rng);
        double mid = 0.0, wsum = 0.0;
        for (double w : atoms.weights) {
            REQUIRE(w > eps);
            REQUIRE(w <= 1.0);
            if (w < 0.999) mid += 1.0;
            wsum += w;
        }
        counts_mid.push_back(mid);
        weight_sums.push_back(wsum);
    }

    const double mean_mid = sample_mean(counts_mid);
    const double se_mid = sample_stderr(counts_mid);
    CHECK(std::abs(mean_mid - count_mid) <= 4.0 * se_mid + 1e-3 * count_mid);

    // E[sum of kept weights] = alpha minus the mass below the cutoff.
    const double expect_wsum = 5.0 - levy_first_moment_below(hp, eps);
    const double mean_wsum = sample_mean(weight_sums);
    const double se_wsum = sample_stderr(weight_sums);
    CHECK(std::abs(mean_wsum - expect_wsum) <= 4.0 * se_wsum);
}

TEST_CASE("Monte-Carlo expected edge count") {
    Hyperparams hp(5.0, 0.5, 1.0, 1.0);
    Rng rng(7);

    const EdgeCountEstimate zero = expected_edge_count_mc(hp, 0, 0.01, 50, rng);
    CHECK(zero.estimate == doctest::Approx(0.0));

    // With one clique the integrand is exactly w*v, so the truncated integral
    // factorizes: E = (alpha - m1(eps))^2 / 2 with m1 the restricted moment.
    const double eps = 0.01;
    const double kept = 5.0 - levy_first_moment_below(hp, eps);
    const double truncated_expect = kept * kept / 2.0;
    const EdgeCountEstimate one = expected_edge_count_mc(hp, 1, eps, 600, rng);
    CHECK(one.replicates == 600);
    CHECK(one.std_error > 0.0);
    CHECK(std::abs(one.estimate - truncated_expect) <= 4.0 * one.std_error);

    // The reported truncation bound must cover the mass actually dropped
    // relative to the untruncated value alpha^2/2 = 12.5.
    const double dropped = 12.5 - truncated_expect;
    CHECK(one.truncation_bound >= dropped);
    CHECK(one.truncation_warning);  // 1% of 12.5 is far below the drop here

    // With a much smaller cutoff the estimate closes in on 12.5 itself.
    Rng rng2(8);
    const EdgeCountEstimate fine = expected_edge_count_mc(hp, 1, 1e-4, 120, rng2);
    CHECK(std::abs(fine.estimate - 12.5) <= 4.0 * fine.std_error + fine.truncation_bound);

    CHECK(default_edge_count_truncation(1) == doctest::Approx(0.01));
    CHECK(default_edge_count_truncation(100) == doctest::Approx(0.001));
}

TEST_CASE("log joint: one clique reduces to a Poisson size") {
    // A single row with k vertices has probability PoissonPMF(k; alpha): the
    // per-vertex gamma factors cancel and only the count term survives.
    Hyperparams hp(2.3, 0.45, 0.8, 1.0);
    for (std::uint32_t k : {0u, 1u, 2u, 5u}) {
        Clique row(k);
        for (std::uint32_t i = 0; i < k; ++i) row[i] = i;
        CliqueMatrix z(k, {row});
        CHECK(log_joint(z, hp, false) ==
              doctest::Approx(log_poisson_pmf(k, hp.alpha)).epsilon(1e-10));
    }
}

TEST_CASE("log joint: row order is irrelevant, clique-count prior is additive") {
    Hyperparams hp(2.0, 0.3, 0.7, 9.0);
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        CliqueMatrix z = sample_clique_matrix(hp, 6, rng);
        if (z.vertex_count() == 0) continue;
        const double base = log_joint(z, hp, false);

        std::vector<Clique> shuffled = z.rows();
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CliqueMatrix zp(z.vertex_count(), shuffled);
        CHECK(log_joint(zp, hp, false) == doctest::Approx(base).epsilon(1e-10));

        CHECK(log_joint(z, hp, true) - base ==
              doctest::Approx(log_poisson_pmf(6, hp.tau)).epsilon(1e-10));
    }
}

TEST_CASE("log joint matches sampler frequencies on two-clique patterns") {
    // With two rows each column pattern is one of {10, 11, 01}; a draw is
    // classified by its pattern counts (a, b, c). exp(log_joint) must equal the
    // sampling probability of that multiset.
    const Hyperparams hp(0.7, 0.4, 1.0, 1.0);
    Rng rng(20240812);
    const int draws = 200000;

    std::map<std::tuple<int, int, int>, int> freq;
    for (int d = 0; d < draws; ++d) {
        const CliqueMatrix z = sample_clique_matrix(hp, 2, rng);
        int a = 0, b = 0, c = 0;
        for (Vertex v = 0; v < z.vertex_count(); ++v) {
            const bool in0 = z.contains(0, v), in1 = z.contains(1, v);
            if (in0 && in1)
                ++b;
            else if (in0)
                ++a;
            else
                ++c;
        }
        ++freq[{a, b, c}];
    }

    auto pattern_matrix = [](int a, int b, int c) {
        Clique r0, r1;
        Vertex next = 0;
        for (int i = 0; i < a; ++i) r0.push_back(next++);
        for (int i = 0; i < b; ++i) {
            r0.push_back(next);
            r1.push_back(next);
            ++next;
        }
        for (int i = 0; i < c; ++i) r1.push_back(next++);
        return CliqueMatrix(next, {r0, r1});
    };

    int checked = 0;
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; a + b <= 2; ++b)
            for (int c = 0; a + b + c <= 2; ++c) {
                const double p = std::exp(log_joint(pattern_matrix(a, b, c), hp, false));
                const double phat = freq[{a, b, c}] / static_cast<double>(draws);
                const double se = std::sqrt(p * (1.0 - p) / draws);
                INFO("pattern a=", a, " b=", b, " c=", c, " p=", p, " phat=", phat);
                CHECK(std::abs(phat - p) <= 4.0 * se + 1e-9);
                ++checked;
            }
    CHECK(checked == 10);
}

TEST_CASE("log joint rejects uncovered vertices") {
    // Vertex 2 exists as a column but belongs to no clique.
    CliqueMatrix z(3, {Clique{0, 1}});
    Hyperparams hp(1.0, 0.5, 1.0, 1.0);
    CHECK_THROWS_AS(log_joint(z, hp, false), std::invalid_argument);
}

TEST_CASE("sampler respects the Poisson clique-count prior when unset") {
    Hyperparams hp(1.0, 0.5, 1.0, 5.0);
    Rng rng(3);
    std::vector<double> ns;
    for (int r = 0; r < 3000; ++r)
        ns.push_back(static_cast<double>(sample_clique_matrix(hp, std::nullopt, rng).n_cliques()));
    const double mean = sample_mean(ns);
    CHECK(std::abs(mean - 5.0) <= 4.0 * sample_stderr(ns));
}

TEST_CASE("first-row size is Poisson(alpha), later rows follow the urn") {
    Hyperparams hp(4.0, 0.5, 1.0, 1.0);
    Rng rng(17);
    std::vector<double> first_sizes;
    double joins = 0.0, chances = 0.0;
    for (int r = 0; r < 4000; ++r) {
        const CliqueMatrix z = sample_clique_matrix(hp, 2, rng);
        first_sizes.push_back(static_cast<double>(z.row(0).size()));
        // Each first-row vertex enters row 2 with probability (1-sigma)/(1+c) = 1/4.
        for (Vertex v : z.row(0)) {
            chances += 1.0;
            joins += z.contains(1, v) ? 1.0 : 0.0;
        }
    }
    const double mean = sample_mean(first_sizes);
    CHECK(std::abs(mean - 4.0) <= 4.0 * sample_stderr(first_sizes));
    const double pjoin = joins / chances;
    CHECK(std::abs(pjoin - 0.25) <= 4.0 * std::sqrt(0.25 * 0.75 / chances));
}

TEST_CASE("trajectory and histogram shortcuts agree with the full sampler") {
    Hyperparams hp(2.0, 0.5, 1.0, 1.0);
    const std::uint32_t n = 30;
    const int reps = 400;

    Rng rng(41);
    std::vector<double> v_full, ones_full, v_traj, v_hist, ones_hist;
    for (int r = 0; r < reps; ++r) {
        const CliqueMatrix z = sample_clique_matrix(hp, n, rng);
        v_full.push_back(z.vertex_count());
        ones_full.push_back(static_cast<double>(z.ones()));

        const auto traj = sample_vertex_count_trajectory(hp, n, rng);
        REQUIRE(traj.size() == n);
        CHECK(std::is_sorted(traj.begin(), traj.end()));
        v_traj.push_back(traj.back());

        const auto hist = sample_membership_count_histogram(hp, n, rng);
        double v = 0.0, ones = 0.0;
        for (std::size_t m = 0; m < hist.size(); ++m) {
            v += static_cast<double>(hist[m]);
            ones += static_cast<double>(m) * static_cast<double>(hist[m]);
        }
        CHECK((hist.empty() || hist[0] == 0));  // entry 0 would mean uncovered vertices
        v_hist.push_back(v);
        ones_hist.push_back(ones);
    }

    const double ev = expected_vertex_count(hp, n);
    for (const auto* xs : {&v_full, &v_traj, &v_hist}) {
        const double mean = sample_mean(*xs);
        CHECK(std::abs(mean - ev) <= 4.0 * sample_stderr(*xs));
    }
    // Total membership count has the same mean under both representations.
    const double d = sample_mean(ones_full) - sample_mean(ones_hist);
    const double se = std::hypot(sample_stderr(ones_full), sample_stderr(ones_hist));
    CHECK(std::abs(d) <= 4.0 * se);
}
