#include "projcvm/angular_distance.hpp"

#include <cmath>

#include "projcvm/errors.hpp"
#include "projcvm/parallel.hpp"

namespace projcvm {

namespace {

struct PartAccum {
    double sum = 0.0;
    Index used = 0;
    Index skipped = 0;
};

// Angles at the reference rows in [begin, end); unusable rows are skipped.
PartAccum accumulate_part(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& zp,
                          const SampleMatrix& ref, Index begin, Index end, double eps,
                          const AngleConfig& cfg, Vector& a, Vector& b) {
    PartAccum acc;
    for (Index r = begin; r < end; ++r) {
        a = z - ref.row(r).transpose();
        b = zp - ref.row(r).transpose();
        if (a.norm() <= eps || b.norm() <= eps) {
            ++acc.skipped;
            continue;
        }
        acc.sum += angle(a, b, cfg);
        ++acc.used;
    }
    return acc;
}

double reference_scale(const AngularDistanceCtx& ctx) {
    return ctx.reference.size() > 0 ? ctx.reference.cwiseAbs().maxCoeff() : 0.0;
}

double rho_angle_with_eps(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& zp,
                          const AngularDistanceCtx& ctx, double eps, Index* skipped, Vector& a, Vector& b) {
    const Index n = ctx.reference.rows();
    if (ctx.split <= 0 || ctx.split >= n) {
        const PartAccum acc = accumulate_part(z, zp, ctx.reference, 0, n, eps, ctx.cfg, a, b);
        if (skipped) *skipped = acc.skipped;
        if (acc.used == 0) throw NoUsableReference("rho_angle: no usable reference row");
        return acc.sum / (kPi * static_cast<double>(acc.used));
    }
    const PartAccum lo = accumulate_part(z, zp, ctx.reference, 0, ctx.split, eps, ctx.cfg, a, b);
    const PartAccum hi = accumulate_part(z, zp, ctx.reference, ctx.split, n, eps, ctx.cfg, a, b);
    if (skipped) *skipped = lo.skipped + hi.skipped;
    if (lo.used == 0 || hi.used == 0) throw NoUsableReference("rho_angle: a mixture part has no usable row");
    return 0.5 * (lo.sum / static_cast<double>(lo.used) + hi.sum / static_cast<double>(hi.used)) / kPi;
}

}  // namespace

AngularDistanceCtx make_pooled_ctx(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg) {
    if (x.cols() != y.cols()) throw DimMismatch("make_pooled_ctx: dimension mismatch");
    AngularDistanceCtx ctx;
    ctx.reference.resize(x.rows() + y.rows(), x.cols());
    ctx.reference.topRows(x.rows()) = x;
    ctx.reference.bottomRows(y.rows()) = y;
    ctx.split = x.rows();
    ctx.cfg = cfg;
    return ctx;
}

double rho_angle_point(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& zp,
                       const Eigen::Ref<const Vector>& w, const AngleConfig& cfg) {
    return angle(z - w, zp - w, cfg) / kPi;
}

double rho_angle(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& zp,
                 const AngularDistanceCtx& ctx, Index* skipped) {
    const Index n = ctx.reference.rows();
    if (n < 1) throw NoUsableReference("rho_angle: empty reference");
    if (ctx.reference.cols() != z.size() || z.size() != zp.size()) {
        throw DimMismatch("rho_angle: dimension mismatch");
    }
    const double scale = std::max({reference_scale(ctx), z.cwiseAbs().maxCoeff(), zp.cwiseAbs().maxCoeff()});
    const double eps = scaled_epsilon(ctx.cfg, scale);
    Vector a(z.size()), b(z.size());
    return rho_angle_with_eps(z, zp, ctx, eps, skipped, a, b);
}

double negative_type_form(const std::vector<Vector>& points, const std::vector<double>& weights,
                          const AngularDistanceCtx& ctx) {
    if (points.size() != weights.size()) throw InvalidConfig("negative_type_form: size mismatch");
    if (points.size() < 2) throw TooFewSamples("negative_type_form: need at least two points");
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (std::abs(wsum) > 1e-12) throw WeightsNotBalanced("negative_type_form: weights must sum to zero");

    const auto n = static_cast<Index>(points.size());
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double rho = rho_angle(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)], ctx);
            total += 2.0 * weights[static_cast<std::size_t>(i)] * weights[static_cast<std::size_t>(j)] * rho;
        }
    }
    return total;  // rho(z, z) = 0, so the diagonal contributes nothing
}

double generalized_energy_from_rho(const SampleMatrix& x, const SampleMatrix& y,
                                   const AngularDistanceCtx& ctx, int threads) {
    const Index m = x.rows();
    const Index n = y.rows();
    if (m < 2 || n < 2) throw TooFewSamples("generalized_energy_from_rho: need m, n >= 2");
    if (x.cols() != y.cols() || x.cols() != ctx.reference.cols()) {
        throw DimMismatch("generalized_energy_from_rho: dimension mismatch");
    }
    if (ctx.reference.rows() < 1) throw NoUsableReference("generalized_energy_from_rho: empty reference");

    const double scale = std::max({reference_scale(ctx), x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0,
                                   y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0});
    const double eps = scaled_epsilon(ctx.cfg, scale);
    const Index d = x.cols();

    auto unrank_pair = [](Index t, Index size) {
        // t-th unordered pair (i < j) of [0, size)
        Index i = 0;
        Index row = size - 1;
        while (t >= row) {
            t -= row;
            --row;
            ++i;
        }
        return std::pair<Index, Index>(i, i + 1 + t);
    };

    const Index cross = m * n;
    const Index wx = m * (m - 1) / 2;
    const Index wy = n * (n - 1) / 2;
    const Index total_pairs = cross + wx + wy;

    // Value-tied pairs are excluded from each average (the tie policy), so
    // literally equal samples make the cross and within averages coincide.
    struct Part {
        double sum[3] = {0.0, 0.0, 0.0};
        Index used[3] = {0, 0, 0};
    };
    const Index chunk = detail::chunk_size_for(total_pairs);
    const Index n_chunks = (total_pairs + chunk - 1) / chunk;
    std::vector<Part> partial(static_cast<std::size_t>(n_chunks));
    parallel_chunks(total_pairs, threads, [&](Index c, Index lo, Index hi) {
        Vector a(d), b(d);
        Part part;
        auto add = [&](int slot, const auto& za, const auto& zb) {
            if ((za - zb).norm() <= eps) return;
            part.sum[slot] += rho_angle_with_eps(za.transpose(), zb.transpose(), ctx, eps, nullptr, a, b);
            ++part.used[slot];
        };
        for (Index t = lo; t < hi; ++t) {
            if (t < cross) {
                add(0, x.row(t / n), y.row(t % n));
            } else if (t < cross + wx) {
                const auto [i, j] = unrank_pair(t - cross, m);
                add(1, x.row(i), x.row(j));
            } else {
                const auto [i, j] = unrank_pair(t - cross - wx, n);
                add(2, y.row(i), y.row(j));
            }
        }
        partial[static_cast<std::size_t>(c)] = part;
    });

    double mean[3];
    for (int slot = 0; slot < 3; ++slot) {
        const double s = pairwise_sum(0, n_chunks, [&](Index c) { return partial[static_cast<std::size_t>(c)].sum[slot]; });
        Index used = 0;
        for (const Part& p : partial) used += p.used[slot];
        if (used == 0) throw AllTuplesTied("generalized_energy_from_rho: an average has no usable pair");
        mean[slot] = s / static_cast<double>(used);
    }
    return (2.0 * mean[0] - mean[1] - mean[2]) / 2.0;
}

}  // namespace projcvm
