#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "helpers.hpp"
#include "projcvm/permutation.hpp"

using namespace projcvm;
using oracle::mat;

TEST_CASE("p-value formula, grid, floor and ceiling") {
    RandomStream rng(301);
    SampleMatrix x = oracle::gaussian(12, 2, rng);
    SampleMatrix y = oracle::gaussian(12, 2, rng);
    y.array() += 8.0;  // separated: the observed labeling maximizes the statistic

    PermConfig cfg;
    cfg.n_perms = 200;
    cfg.master_seed = 17;
    const PermResult res = perm_pvalue(x, y, StatKind::CvM, cfg);
    CHECK(res.p_value == doctest::Approx(1.0 / 201.0));
    REQUIRE(res.permuted_values.has_value());
    std::int64_t ge = 0;
    for (double v : *res.permuted_values) ge += v >= res.observed ? 1 : 0;
    CHECK(res.p_value == static_cast<double>(ge + 1) / 201.0);
    const double steps = res.p_value * 201.0;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
    CHECK(res.reject == (res.p_value <= cfg.alpha));

    // constant data: Cq is 0 for every labeling, ties count as ">=", p = 1
    const SampleMatrix c = SampleMatrix::Constant(6, 2, 1.0);
    cfg.n_perms = 99;
    const PermResult flat = perm_pvalue(c, c, StatKind::Cq, cfg);
    CHECK(flat.p_value == 1.0);
    CHECK_FALSE(flat.reject);
}

TEST_CASE("determinism across thread counts and repeated runs") {
    RandomStream rng(302);
    const SampleMatrix x = oracle::gaussian(10, 3, rng);
    const SampleMatrix y = oracle::gaussian(9, 3, rng);
    PermConfig cfg;
    cfg.n_perms = 63;
    cfg.master_seed = 99;

    const PermResult a = perm_pvalue(x, y, StatKind::CvM, cfg, {}, 1);
    const PermResult b = perm_pvalue(x, y, StatKind::CvM, cfg, {}, 4);
    CHECK(a.observed == b.observed);
    CHECK(a.p_value == b.p_value);
    REQUIRE(a.permuted_values.has_value());
    REQUIRE(b.permuted_values.has_value());
    for (std::size_t i = 0; i < a.permuted_values->size(); ++i) {
        CHECK((*a.permuted_values)[i] == (*b.permuted_values)[i]);
    }
    const PermResult c = perm_pvalue(x, y, StatKind::CvM, cfg, {}, 2);
    CHECK(c.p_value == a.p_value);
}

TEST_CASE("relabeling equals physically permuted rows") {
    RandomStream rng(303);
    const SampleMatrix x = oracle::gaussian(7, 3, rng);
    const SampleMatrix y = oracle::gaussian(6, 3, rng);
    const PooledData pd(x, y);
    SampleMatrix z(13, 3);
    z.topRows(7) = x;
    z.bottomRows(6) = y;

    for (int t = 0; t < 50; ++t) {
        RandomStream perm_rng = rng.substream(static_cast<std::uint64_t>(t));
        const std::vector<Index> assignment = perm_rng.permutation(13);
        SampleMatrix px(7, 3), py(6, 3);
        for (Index i = 0; i < 7; ++i) px.row(i) = z.row(assignment[static_cast<std::size_t>(i)]);
        for (Index i = 0; i < 6; ++i) py.row(i) = z.row(assignment[static_cast<std::size_t>(7 + i)]);
        for (StatKind k : {StatKind::CvM, StatKind::Energy, StatKind::Cq, StatKind::Wmw}) {
            const StatValue via_idx = eval_two_sample(
                k, pd, std::span<const Index>(assignment.data(), 7),
                std::span<const Index>(assignment.data() + 7, 6), {});
            StatValue direct;
            switch (k) {
                case StatKind::CvM: direct = u_cvm(px, py); break;
                case StatKind::Energy: direct = u_energy(px, py); break;
                case StatKind::Cq: direct = u_cq(px, py); break;
                default: direct = u_wmw(px, py); break;
            }
            CHECK(via_idx.value == doctest::Approx(direct.value).epsilon(1e-10));
        }
    }
}

TEST_CASE("exact enumeration of label splits") {
    RandomStream rng(304);
    const SampleMatrix x = oracle::gaussian(2, 1, rng);
    const SampleMatrix y = oracle::gaussian(2, 1, rng);
    const auto values = exact_perm_distribution(x, y, StatKind::CvM);
    CHECK(values.size() == 6);
    CHECK(std::is_sorted(values.begin(), values.end()));
    const double obs = u_cvm(x, y).value;
    bool found = false;
    for (double v : values) found |= std::abs(v - obs) < 1e-12;
    CHECK(found);

    // constant data: every split gives the same Cq value
    const SampleMatrix c = SampleMatrix::Constant(3, 1, 2.0);
    const auto flat = exact_perm_distribution(c, c, StatKind::Cq);
    CHECK(flat.size() == 20);
    CHECK(flat.front() == flat.back());

    CHECK_THROWS_AS(exact_perm_distribution(oracle::gaussian(15, 1, rng), oracle::gaussian(15, 1, rng),
                                            StatKind::Cq),
                    TooManySplits);
}

TEST_CASE("exact p-value agrees with Monte Carlo") {
    RandomStream rng(305);
    const SampleMatrix x = oracle::gaussian(2, 1, rng);
    SampleMatrix y = oracle::gaussian(2, 1, rng);
    y.array() += 1.0;

    PermConfig cfg;
    cfg.exact = true;
    cfg.master_seed = 5;
    const PermResult exact = perm_pvalue(x, y, StatKind::CvM, cfg);
    CHECK(exact.n_perms == 6);

    cfg.exact = false;
    cfg.n_perms = 10000;
    const PermResult mc = perm_pvalue(x, y, StatKind::CvM, cfg);
    CHECK(std::abs(exact.p_value - mc.p_value) < 0.02);
}

TEST_CASE("Monte-Carlo split frequencies match enumeration") {
    RandomStream rng(306);
    const SampleMatrix x = oracle::gaussian(3, 1, rng);
    const SampleMatrix y = oracle::gaussian(3, 1, rng);
    const auto values = exact_perm_distribution(x, y, StatKind::CvM);  // C(6,3) = 20 splits
    CHECK(values.size() == 20);

    PermConfig cfg;
    cfg.n_perms = 100000;
    cfg.master_seed = 8;
    const PermResult res = perm_pvalue(x, y, StatKind::CvM, cfg);
    REQUIRE(res.permuted_values.has_value());

    // the rank statistic collides across splits, so compare frequencies of
    // value classes against (class size) / 20
    std::vector<std::pair<double, int>> classes;  // representative, multiplicity
    for (double v : values) {
        bool found = false;
        for (auto& [rep, count] : classes) {
            if (std::abs(v - rep) < 1e-9) {
                ++count;
                found = true;
                break;
            }
        }
        if (!found) classes.emplace_back(v, 1);
    }
    for (const auto& [rep, count] : classes) {
        const double p0 = static_cast<double>(count) / 20.0;
        const double se = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(cfg.n_perms));
        std::int64_t hits = 0;
        for (double pv : *res.permuted_values) hits += std::abs(pv - rep) < 1e-9 ? 1 : 0;
        const double freq = static_cast<double>(hits) / static_cast<double>(cfg.n_perms);
        CHECK(std::abs(freq - p0) <= 3.0 * se);
    }
}

TEST_CASE("mmd permutation reuses one pooled bandwidth") {
    RandomStream rng(307);
    const SampleMatrix x = oracle::gaussian(8, 2, rng);
    const SampleMatrix y = oracle::gaussian(8, 2, rng);
    PermConfig cfg;
    cfg.n_perms = 50;
    cfg.master_seed = 3;
    const PermResult auto_bw = perm_pvalue(x, y, StatKind::Mmd, cfg);
    TwoSampleOptions opt;
    opt.mmd_bandwidth_sq = median_heuristic_bandwidth_sq(PooledData(x, y));
    const PermResult fixed_bw = perm_pvalue(x, y, StatKind::Mmd, cfg, opt);
    CHECK(auto_bw.observed == fixed_bw.observed);
    CHECK(auto_bw.p_value == fixed_bw.p_value);
}

TEST_CASE("null_quantile_d1 series") {
    RandomStream rng(308);
    auto q = null_quantile_d1(20, 200000, 0.5, rng);
    // E sum lambda_k (xi^2 - 1) = 0
    double mean = 0.0;
    for (double v : q.sorted) mean += v;
    mean /= static_cast<double>(q.sorted.size());
    CHECK(std::abs(mean) < 0.02);
    CHECK(q(0.5) <= q(0.9));
    CHECK(q(0.9) <= q(0.99));

    // k_trunc = 1: the law is 4 * lambda_1 (xi^2 - 1)
    RandomStream rng2(309);
    auto q1 = null_quantile_d1(1, 400000, 0.5, rng2);
    const double lambda1 = 1.0 / (kPi * kPi);
    auto theory = [&](double p) {
        // quantile of xi^2 via abs-normal: P(xi^2 <= t) = 2 Phi(sqrt(t)) - 1
        // invert numerically
        double lo = 0.0, hi = 40.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double cdf = std::erf(std::sqrt(mid / 2.0));
            (cdf < p ? lo : hi) = mid;
        }
        return 4.0 * lambda1 * (0.5 * (lo + hi) - 1.0);
    };
    for (double p : {0.25, 0.5, 0.9, 0.95}) {
        CHECK(q1(p) == doctest::Approx(theory(p)).epsilon(0.02));
    }

    CHECK_THROWS_AS(null_quantile_d1(0, 1000, 0.5, rng), InvalidConfig);
    CHECK_THROWS_AS(null_quantile_d1(5, 10, 0.5, rng), InvalidConfig);
    CHECK_THROWS_AS(null_quantile_d1(5, 1000, 1.5, rng), InvalidConfig);
}

TEST_CASE("invalid permutation configs") {
    RandomStream rng(310);
    const SampleMatrix x = oracle::gaussian(4, 1, rng);
    const SampleMatrix y = oracle::gaussian(4, 1, rng);
    PermConfig cfg;
    cfg.n_perms = 0;
    CHECK_THROWS_AS(perm_pvalue(x, y, StatKind::CvM, cfg), InvalidConfig);
    cfg.n_perms = 10;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(perm_pvalue(x, y, StatKind::CvM, cfg), InvalidConfig);
}

TEST_CASE("linear statistic under permutation keeps its own blocking stream") {
    RandomStream rng(311);
    const SampleMatrix x = oracle::gaussian(8, 2, rng);
    const SampleMatrix y = oracle::gaussian(8, 2, rng);
    PermConfig cfg;
    cfg.n_perms = 30;
    cfg.master_seed = 12;
    const PermResult a = perm_pvalue(x, y, StatKind::CvMLinear, cfg);
    const PermResult b = perm_pvalue(x, y, StatKind::CvMLinear, cfg);
    CHECK(a.observed == b.observed);
    CHECK(a.p_value == b.p_value);
}
