#include "projcvm/permutation.hpp"

#include <algorithm>
#include <cmath>

#include "projcvm/errors.hpp"
#include "projcvm/parallel.hpp"

namespace projcvm {

namespace {

std::int64_t n_choose_k_capped(Index n, Index k, std::int64_t cap) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t c = 1;
    for (Index i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > cap) return cap + 1;
    }
    return c;
}

StatValue eval_assignment(StatKind kind, const PooledData& pd, const std::vector<Index>& assignment,
                          Index m, const TwoSampleOptions& opt, const RandomStream& base,
                          std::uint64_t eval_index) {
    const std::span<const Index> xs(assignment.data(), static_cast<std::size_t>(m));
    const std::span<const Index> ys(assignment.data() + m, assignment.size() - static_cast<std::size_t>(m));
    if (kind == StatKind::CvMLinear) {
        RandomStream block_rng = base.substream(0x10000000ull + eval_index);
        return l_cvm_indexed(pd, xs, ys, block_rng);
    }
    return eval_two_sample(kind, pd, xs, ys, opt);
}

}  // namespace

PermResult perm_pvalue(const SampleMatrix& x, const SampleMatrix& y, StatKind kind,
                       const PermConfig& cfg, const TwoSampleOptions& opt_in, int threads) {
    if (cfg.n_perms < 1) throw InvalidConfig("perm_pvalue: need B >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InvalidConfig("perm_pvalue: alpha must be in (0, 1)");

    const Index m = x.rows();
    const Index n = y.rows();
    const Index N = m + n;
    PooledData pd(x, y, opt_in.angle);

    TwoSampleOptions opt = opt_in;
    if (kind == StatKind::Mmd && !opt.mmd_bandwidth_sq) {
        opt.mmd_bandwidth_sq = median_heuristic_bandwidth_sq(pd);
    }
    opt.threads = 1;

    std::vector<Index> identity(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) identity[static_cast<std::size_t>(i)] = i;
    const RandomStream base(cfg.master_seed);

    PermResult res;
    res.seed = cfg.master_seed;
    const StatValue observed = eval_assignment(kind, pd, identity, m, opt, base, 0);
    res.observed = observed.value;
    res.skipped_tuples = observed.skipped_tuples;

    if (cfg.exact) {
        const std::vector<double> values = exact_perm_distribution(x, y, kind, opt);
        std::int64_t ge = 0;
        for (double v : values) ge += v >= res.observed ? 1 : 0;
        res.n_perms = static_cast<std::int64_t>(values.size());
        res.p_value = static_cast<double>(ge) / static_cast<double>(values.size());
        res.permuted_values = values;
        res.reject = res.p_value <= cfg.alpha;
        return res;
    }

    const int B = cfg.n_perms;
    std::vector<double> permuted(static_cast<std::size_t>(B));
    parallel_chunks(B, threads, [&](Index, Index lo, Index hi) {
        std::vector<Index> assignment;
        for (Index b = lo; b < hi; ++b) {
            RandomStream rng = base.substream(static_cast<std::uint64_t>(b) + 1);
            assignment = identity;
            rng.shuffle(assignment);
            permuted[static_cast<std::size_t>(b)] =
                eval_assignment(kind, pd, assignment, m, opt, base, static_cast<std::uint64_t>(b) + 1).value;
        }
    });

    std::int64_t ge = 0;
    for (double v : permuted) ge += v >= res.observed ? 1 : 0;
    res.n_perms = B;
    res.p_value = static_cast<double>(ge + 1) / static_cast<double>(B + 1);
    res.permuted_values = std::move(permuted);
    res.reject = res.p_value <= cfg.alpha;
    return res;
}

std::vector<double> exact_perm_distribution(const SampleMatrix& x, const SampleMatrix& y, StatKind kind,
                                            const TwoSampleOptions& opt_in) {
    const Index m = x.rows();
    const Index n = y.rows();
    const Index N = m + n;
    if (n_choose_k_capped(N, m, kMaxExactSplits) > kMaxExactSplits) {
        throw TooManySplits("exact_perm_distribution: more than 50,000 label splits");
    }
    if (kind == StatKind::CvMLinear) {
        throw InvalidConfig("exact_perm_distribution: linear statistic is not split-invariant");
    }
    PooledData pd(x, y, opt_in.angle);
    TwoSampleOptions opt = opt_in;
    if (kind == StatKind::Mmd && !opt.mmd_bandwidth_sq) {
        opt.mmd_bandwidth_sq = median_heuristic_bandwidth_sq(pd);
    }
    opt.threads = 1;

    std::vector<double> values;
    std::vector<Index> comb(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) comb[static_cast<std::size_t>(i)] = i;
    std::vector<Index> assignment(static_cast<std::size_t>(N));
    for (;;) {
        std::vector<bool> in_x(static_cast<std::size_t>(N), false);
        for (Index i : comb) in_x[static_cast<std::size_t>(i)] = true;
        Index xi = 0, yi = m;
        for (Index i = 0; i < N; ++i) {
            assignment[static_cast<std::size_t>(in_x[static_cast<std::size_t>(i)] ? xi++ : yi++)] = i;
        }
        values.push_back(eval_two_sample(kind, pd,
                                         std::span<const Index>(assignment.data(), static_cast<std::size_t>(m)),
                                         std::span<const Index>(assignment.data() + m, static_cast<std::size_t>(n)),
                                         opt)
                             .value);
        // next combination in lexicographic order
        Index i = m - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == N - m + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < m; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    std::sort(values.begin(), values.end());
    return values;
}

double EmpiricalQuantile::operator()(double p) const {
    if (sorted.empty()) throw InvalidConfig("EmpiricalQuantile: no draws");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const auto n = static_cast<double>(sorted.size());
    auto idx = static_cast<std::size_t>(std::ceil(p * n)) - 1;
    if (idx >= sorted.size()) idx = sorted.size() - 1;
    return sorted[idx];
}

EmpiricalQuantile null_quantile_d1(int k_trunc, Index n_draws, double theta_x, RandomStream& rng,
                                   int threads) {
    if (k_trunc < 1) throw InvalidConfig("null_quantile_d1: need k_trunc >= 1");
    if (n_draws < 100) throw InvalidConfig("null_quantile_d1: need n_draws >= 100");
    if (!(theta_x > 0.0 && theta_x < 1.0)) throw InvalidConfig("null_quantile_d1: theta_x must be in (0, 1)");

    // Eigenvalues of the symmetrized order-two kernel's conditional operator
    // for continuous univariate data: with F uniform, h~_{2,0}(s,t) =
    // (1-max)^2/2 + min^2/2 - 1/6 has eigenfunctions cos(k pi t) and
    // eigenvalues 1/(k pi)^2. (The doubled kernel has 2/(k pi)^2.)
    std::vector<double> lambda(static_cast<std::size_t>(k_trunc));
    for (int k = 1; k <= k_trunc; ++k) {
        lambda[static_cast<std::size_t>(k - 1)] = 1.0 / (k * kPi * (k * kPi));
    }
    const double scale = 1.0 / (theta_x * (1.0 - theta_x));

    EmpiricalQuantile q;
    q.sorted.resize(static_cast<std::size_t>(n_draws));
    const RandomStream base = rng.substream(0x5eeded);
    parallel_chunks(n_draws, threads, [&](Index chunk, Index lo, Index hi) {
        RandomStream local = base.substream(static_cast<std::uint64_t>(chunk));
        for (Index i = lo; i < hi; ++i) {
            double s = 0.0;
            for (int k = 0; k < k_trunc; ++k) {
                const double xi = local.gaussian();
                s += lambda[static_cast<std::size_t>(k)] * (xi * xi - 1.0);
            }
            q.sorted[static_cast<std::size_t>(i)] = scale * s;
        }
    });
    std::sort(q.sorted.begin(), q.sorted.end());
    return q;
}

}  // namespace projcvm
