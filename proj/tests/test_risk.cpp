#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "riskplan/normal.hpp"
#include "riskplan/risk.hpp"
#include "riskplan/rng.hpp"

using namespace riskplan;
using namespace riskplan::risk;

namespace {

// Independent oracle for the standard-normal quantile: long-double bisection
// on erf down to an interval of 1e-12.
double varsigma_bisection(double alpha) {
    const long double target = 2.0L * static_cast<long double>(alpha) - 1.0L;
    long double lo = -8.0L, hi = 8.0L;
    while (hi - lo > 1e-12L) {
        const long double mid = 0.5L * (lo + hi);
        if (std::erf(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return static_cast<double>(std::sqrt(2.0L) * 0.5L * (lo + hi));
}

// Monte Carlo quantile of n seeded Gaussian draws.
double mc_quantile(const SegmentCost& cost, double alpha, int n, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<double> draws(n);
    for (auto& d : draws) d = rng.normal(cost.c, cost.sigma);
    const auto k = static_cast<std::size_t>(std::ceil(alpha * n)) - 1;
    std::nth_element(draws.begin(), draws.begin() + k, draws.end());
    return draws[k];
}

// Monte Carlo tail mean above the alpha-quantile.
double mc_tail_mean(const SegmentCost& cost, double alpha, int n, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<double> draws(n);
    for (auto& d : draws) d = rng.normal(cost.c, cost.sigma);
    std::sort(draws.begin(), draws.end());
    const auto k = static_cast<std::size_t>(std::ceil(alpha * n)) - 1;
    double acc = 0.0;
    for (std::size_t i = k; i < draws.size(); ++i) acc += draws[i];
    return acc / static_cast<double>(draws.size() - k);
}

// Simpson integration of p log(p/q) for two univariate Gaussians.
double kl_numeric(double mu1, double s1, double mu2, double s2) {
    const double lo = mu1 - 14.0 * s1;
    const double hi = mu1 + 14.0 * s1;
    const int n = 200000;  // even
    const double h = (hi - lo) / n;
    const auto f = [&](double x) {
        const double z1 = (x - mu1) / s1;
        const double z2 = (x - mu2) / s2;
        const double logp = -0.5 * z1 * z1 - std::log(s1 * std::sqrt(2.0 * 3.14159265358979323846));
        const double logq = -0.5 * z2 * z2 - std::log(s2 * std::sqrt(2.0 * 3.14159265358979323846));
        return std::exp(logp) * (logp - logq);
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("varsigma matches the bisection oracle to 1e-10") {
    const double alphas[] = {1e-6, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-4, 1.0 - 1e-6};
    for (const double a : alphas) {
        CHECK(std::fabs(varsigma(a) - varsigma_bisection(a)) < 1e-10);
    }
    // Dense sweep across the stated accuracy domain, log-spaced into both tails.
    RngStream rng(58);
    for (int i = 0; i < 4000; ++i) {
        const double u = rng.uniform(-6.0, std::log10(0.5));
        const double tail = std::pow(10.0, u);
        const double a = (i % 2) ? tail : 1.0 - tail;
        REQUIRE(std::fabs(varsigma(a) - varsigma_bisection(a)) < 1e-10);
    }
    CHECK(varsigma(0.5) == 0.0);
    CHECK(varsigma(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-12));
    CHECK(varsigma(1.0 - 0.1) == -varsigma(0.1));  // exact odd symmetry
    CHECK_THROWS_AS(varsigma(0.0), std::domain_error);
    CHECK_THROWS_AS(varsigma(1.0), std::domain_error);
    CHECK_THROWS_AS(varsigma(-0.2), std::domain_error);
    CHECK_THROWS_AS(varsigma(1.5), std::domain_error);
}

TEST_CASE("var_alpha: degenerate cases and Monte Carlo quantile oracle") {
    CHECK(var_alpha({1.0, 0.0}, 0.9) == 1.0);
    CHECK(var_alpha({0.0, 1.0}, 0.5) == 0.0);
    // Frozen from a 1e7-draw quantile during development: 2.64078 +- 1e-3.
    CHECK(var_alpha({2.0, 0.5}, 0.9) == doctest::Approx(2.6407757827723).epsilon(1e-12));
    CHECK(std::fabs(var_alpha({2.0, 0.5}, 0.9) - mc_quantile({2.0, 0.5}, 0.9, 1000000, 41)) < 4e-3);
}

TEST_CASE("cvar_alpha: degenerate cases and Monte Carlo tail-mean oracle") {
    CHECK(cvar_alpha({3.5, 0.0}, 0.1) == 3.5);
    CHECK(cvar_alpha({3.5, 0.0}, 0.9) == 3.5);
    CHECK(cvar_alpha({0.0, 1.0}, 0.5) == doctest::Approx(0.7978845608028654).epsilon(1e-12));
    CHECK(cvar_alpha({2.0, 0.5}, 0.9) == doctest::Approx(2.8774916596624345).epsilon(1e-12));
    for (const auto& [c, s, a] : {std::tuple{0.0, 1.0, 0.5}, {2.0, 0.5, 0.9}, {1.0, 2.0, 0.1}}) {
        const double tol = 6.0 * s / std::sqrt(1e6 * (1.0 - a));
        CHECK(std::fabs(cvar_alpha({c, s}, a) - mc_tail_mean({c, s}, a, 1000000, 87)) < tol);
    }
}

TEST_CASE("sample_costs: determinism, zero noise, CLT mean") {
    RiskParams params{0.5, 16, 0};
    RngStream s1(11), s2(11);
    const auto a = sample_costs({1.5, 0.25}, params, s1);
    const auto b = sample_costs({1.5, 0.25}, params, s2);
    CHECK(a.values() == b.values());

    RngStream s3(11);
    const auto zero = sample_costs({1.5, 0.0}, params, s3);
    for (const double v : zero.values()) CHECK(v == 1.5);

    params.n_c = 100000;
    RngStream s4(5);
    const auto big = sample_costs({2.0, 1.0}, params, s4);
    double mean = 0.0;
    for (const double v : big.values()) mean += v;
    mean /= static_cast<double>(big.size());
    CHECK(std::fabs(mean - 2.0) < 4.0 / std::sqrt(100000.0));
}

TEST_CASE("var_empirical picks the lowest order statistic with CDF >= alpha") {
    const auto s = EmpiricalCostSample::from_values({4.0, 2.0, 1.0, 3.0});
    CHECK(var_empirical(s, 0.5) == 2.0);
    CHECK(var_empirical(s, 0.9) == 4.0);
    CHECK(var_empirical(s, 0.25) == 1.0);

    RiskParams params{0.9, 100000, 0};
    RngStream rng(21);
    const auto g = sample_costs({1.0, 1.0}, params, rng);
    CHECK(std::fabs(var_empirical(g, 0.9) - var_alpha({1.0, 1.0}, 0.9)) < 5e-2);
}

TEST_CASE("cvar_empirical averages the tail and reports its cardinality") {
    const auto s = EmpiricalCostSample::from_values({1.0, 2.0, 3.0, 4.0});
    const auto e = cvar_empirical(s, 0.5);
    CHECK(e.cvar == 3.0);
    CHECK(e.n_cvar == 3);

    RiskParams params{0.5, 64, 0};
    RngStream rng(31);
    const auto zero = cvar_empirical(sample_costs({2.25, 0.0}, params, rng), 0.5);
    CHECK(zero.cvar == 2.25);  // exactly, so sigma=0 degenerates bit-for-bit

    params.n_c = 100000;
    RngStream rng2(33);
    const auto g = sample_costs({1.0, 1.0}, params, rng2);
    CHECK(std::fabs(cvar_empirical(g, 0.9).cvar - cvar_alpha({1.0, 1.0}, 0.9)) < 1e-1);

    // Ties with the VaR all enter the tail.
    const auto tied = cvar_empirical(EmpiricalCostSample::from_values({2.0, 2.0, 3.0}), 0.5);
    CHECK(tied.cvar == doctest::Approx(7.0 / 3.0));
    CHECK(tied.n_cvar == 3);
}

TEST_CASE("worst_case_path_length sums per-segment CVaRs") {
    const SegmentCost single{1.5, 0.3};
    CHECK(worst_case_path_length(std::vector{single}, 0.8) == cvar_alpha(single, 0.8));

    const std::vector<SegmentCost> det{{1.0, 0.0}, {2.0, 0.0}, {0.5, 0.0}};
    CHECK(worst_case_path_length(det, 0.9) == 3.5);

    const std::vector<SegmentCost> two{{1.0, 1.0}, {1.0, 1.0}};
    CHECK(worst_case_path_length(two, 0.5) == doctest::Approx(3.5957691216057308).epsilon(1e-12));

    CHECK_THROWS_AS(worst_case_path_length(std::vector<SegmentCost>{}, 0.5), std::invalid_argument);
}

TEST_CASE("kl_gaussian matches numerical integration and is a divergence") {
    CHECK(kl_gaussian(1.2, 0.7, 1.2, 0.7) == 0.0);
    CHECK(kl_gaussian(0.0, 1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::fabs(kl_gaussian(0.0, 1.0, 1.0, 1.0) - kl_numeric(0, 1, 1, 1)) < 1e-6);

    const double fwd = kl_gaussian(0.0, 1.0, 0.0, 2.0);
    const double bwd = kl_gaussian(0.0, 2.0, 0.0, 1.0);
    CHECK(fwd != bwd);
    CHECK(std::fabs(fwd - kl_numeric(0, 1, 0, 2)) < 1e-6);
    CHECK(std::fabs(bwd - kl_numeric(0, 2, 0, 1)) < 1e-6);

    for (const double m1 : {-1.0, 0.0, 2.0}) {
        for (const double s1 : {0.5, 1.0, 3.0}) {
            for (const double m2 : {-1.0, 0.0, 2.0}) {
                for (const double s2 : {0.5, 1.0, 3.0}) {
                    const double kl = kl_gaussian(m1, s1, m2, s2);
                    CHECK(kl >= 0.0);
                    if (m1 == m2 && s1 == s2) {
                        CHECK(kl == 0.0);
                    } else {
                        CHECK(kl > 0.0);
                    }
                }
            }
        }
    }
    CHECK_THROWS_AS(kl_gaussian(0, 0.0, 0, 1), std::domain_error);
    CHECK_THROWS_AS(kl_gaussian(0, 1, 0, -1), std::domain_error);
}

TEST_CASE("markov_upper_bound formula, limits, and clamping") {
    GuaranteeInputs g{5.0, 10.0, 0.1, 0.0, 0.5};
    CHECK(markov_upper_bound(g).raw == 0.5);

    g = GuaranteeInputs{5.0, 1e9, 0.1, 0.0, 0.5};
    CHECK(markov_upper_bound(g).raw < 1e-8);

    g = GuaranteeInputs{5.29, 10.0, 0.1, 0.1, 0.5};
    CHECK(markov_upper_bound(g).raw == doctest::Approx(0.549).epsilon(1e-12));

    g = GuaranteeInputs{15.0, 10.0, 0.1, 0.0, 0.5};
    const auto b = markov_upper_bound(g);
    CHECK(b.raw == 1.5);
    CHECK(b.clamped == 1.0);

    g.l_max = -1.0;
    CHECK_THROWS_AS(markov_upper_bound(g), std::invalid_argument);
}

TEST_CASE("sigma_delta uses the exact 99% two-sided quantile") {
    CHECK(sigma_delta(2.5758293035489004) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sigma_delta(2.5758293) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sigma_delta(0.1) == doctest::Approx(0.038822448312946435).epsilon(1e-12));
    const double sd = sigma_delta(0.1);
    const double coverage = std_normal_cdf(0.1 / sd) - std_normal_cdf(-0.1 / sd);
    CHECK(std::fabs(coverage - 0.99) < 1e-4);
    CHECK_THROWS_AS(sigma_delta(0.0), std::invalid_argument);
}

TEST_CASE("CVaR coherence properties") {
    const double alphas[] = {0.1, 0.5, 0.9};
    const double sigmas[] = {0.1, 0.5, 2.0};
    const double cs[] = {0.0, 1.0, 10.0};
    for (const double a : alphas) {
        for (const double s : sigmas) {
            for (const double c : cs) {
                const SegmentCost cost{c, s};
                CHECK(cvar_alpha(cost, a) > var_alpha(cost, a));  // strict for sigma > 0
                CHECK(std::fabs(cvar_alpha({c, 0.0}, a) - var_alpha({c, 0.0}, a)) <= 1e-12);
                // Translation equivariance and positive homogeneity.
                CHECK(cvar_alpha({c + 2.5, s}, a) ==
                      doctest::Approx(2.5 + cvar_alpha(cost, a)).epsilon(1e-12));
                CHECK(cvar_alpha({3.0 * c, 3.0 * s}, a) ==
                      doctest::Approx(3.0 * cvar_alpha(cost, a)).epsilon(1e-12));
            }
        }
    }
    // Monotonicity in alpha and sigma.
    CHECK(cvar_alpha({1, 1}, 0.5) < cvar_alpha({1, 1}, 0.9));
    CHECK(cvar_alpha({1, 0.5}, 0.5) < cvar_alpha({1, 1.0}, 0.5));
}

TEST_CASE("empirical estimators converge at the stated rate") {
    const int n_c = 100000;
    RiskParams params{0.9, n_c, 0};
    int stream_label = 0;
    for (const auto& [c, s, a] : {std::tuple{1.0, 0.5, 0.1}, {2.0, 1.0, 0.5}, {0.0, 2.0, 0.9}}) {
        params.alpha = a;
        RngStream rng = RngStream(1234).stream(static_cast<std::uint64_t>(stream_label++));
        const auto sample = sample_costs({c, s}, params, rng);
        const double bound = 4.0 * s / std::sqrt(n_c * (1.0 - a));
        CHECK(std::fabs(cvar_empirical(sample, a).cvar - cvar_alpha({c, s}, a)) <= bound);
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((RiskParams{1.0, 10, 0}.validate()), std::domain_error);
    CHECK_THROWS_AS((RiskParams{0.0, 10, 0}.validate()), std::domain_error);
    CHECK_THROWS_AS((RiskParams{0.5, 1, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS(EmpiricalCostSample::from_values({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(cvar_alpha({-1.0, 1.0}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(cvar_alpha({1.0, -1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("markov bound dominates Monte Carlo exceedance on Gaussian sums") {
    // Synthetic instances satisfying the KL premise: epsilon is set to the
    // lemma's divergence value, so the premise holds with equality.
    RngStream master(777);
    for (int inst = 0; inst < 4; ++inst) {
        RngStream rng = master.stream(static_cast<std::uint64_t>(inst));
        const int n_seg = 3 + inst * 2;
        std::vector<SegmentCost> segs;
        double sum_c = 0.0, var_sum = 0.0, cvar_sum = 0.0;
        const double alpha = 0.5;
        for (int i = 0; i < n_seg; ++i) {
            const SegmentCost sc{rng.uniform(0.5, 2.0), rng.uniform(0.05, 0.3)};
            segs.push_back(sc);
            sum_c += sc.c;
            var_sum += sc.sigma * sc.sigma;
            cvar_sum += cvar_alpha(sc, alpha);
        }
        const double l_max = 1.3 * sum_c;
        const double delta = 0.2;
        const double sl = std::sqrt(var_sum);
        const double eps =
            kl_gaussian(sum_c, sigma_delta(delta) * std::sqrt(n_seg), sum_c, sl);
        const auto bound = markov_upper_bound({cvar_sum, l_max, delta, std::max(eps, 0.0), alpha});

        int exceed = 0;
        const int trials = 100000;
        for (int t = 0; t < trials; ++t) {
            double total = 0.0;
            for (const auto& sc : segs) total += rng.normal(sc.c, sc.sigma);
            if (total >= l_max) ++exceed;
        }
        CHECK(static_cast<double>(exceed) / trials <= bound.raw);
    }
}
