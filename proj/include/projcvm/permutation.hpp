#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "projcvm/random.hpp"
#include "projcvm/two_sample.hpp"
#include "projcvm/types.hpp"

namespace projcvm {

struct PermConfig {
    int n_perms = 199;                 // B
    double alpha = 0.05;
    std::uint64_t master_seed = 0;
    bool exact = false;                // enumerate label splits when C(N, m) <= 50,000
};

struct PermResult {
    double observed = 0.0;
    double p_value = 1.0;
    std::optional<std::vector<double>> permuted_values;
    bool reject = false;
    std::uint64_t seed = 0;
    std::int64_t n_perms = 0;          // B (Monte Carlo) or the number of splits (exact)
    std::int64_t skipped_tuples = 0;   // of the observed statistic
};

// Monte-Carlo permutation p-value per hat{p}^(B) = (1 + #{permuted >= observed}) / (B + 1);
// ties count as ">=". The pooled Gram is computed once; permutations only
// relabel index sets. Deterministic given (data, cfg) for any thread count.
PermResult perm_pvalue(const SampleMatrix& x, const SampleMatrix& y, StatKind kind,
                       const PermConfig& cfg, const TwoSampleOptions& opt = {}, int threads = 0);

inline constexpr std::int64_t kMaxExactSplits = 50000;

// Statistic values over all C(N, m) label splits, sorted ascending; the
// observed split is among them. Throws TooManySplits above kMaxExactSplits.
std::vector<double> exact_perm_distribution(const SampleMatrix& x, const SampleMatrix& y, StatKind kind,
                                            const TwoSampleOptions& opt = {});

// Empirical quantile function of sorted draws.
struct EmpiricalQuantile {
    std::vector<double> sorted;
    double operator()(double p) const;
};

// d = 1 null oracle: quantiles of (theta_x * theta_y)^{-1} *
// sum_{k=1..k_trunc} lambda_k (xi_k^2 - 1) with lambda_k = 1 / (k*pi)^2,
// the limiting law of N * U_CvM for continuous univariate data.
EmpiricalQuantile null_quantile_d1(int k_trunc, Index n_draws, double theta_x, RandomStream& rng,
                                   int threads = 0);

}  // namespace projcvm
