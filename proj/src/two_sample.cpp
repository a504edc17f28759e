#include "projcvm/two_sample.hpp"

#include <algorithm>
#include <cmath>

#include "projcvm/errors.hpp"
#include "projcvm/parallel.hpp"

namespace projcvm {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

std::vector<Index> iota_indices(Index begin, Index count) {
    std::vector<Index> v(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = begin + i;
    return v;
}

}  // namespace

const char* to_string(StatKind kind) {
    switch (kind) {
        case StatKind::CvM: return "cvm";
        case StatKind::CvM3: return "cvm3";
        case StatKind::CvMLinear: return "linear";
        case StatKind::Energy: return "energy";
        case StatKind::Mmd: return "mmd";
        case StatKind::Cq: return "cq";
        case StatKind::Wmw: return "wmw";
        case StatKind::SignProj: return "sign";
    }
    return "?";
}

StatKind stat_kind_from_string(const std::string& name) {
    if (name == "cvm") return StatKind::CvM;
    if (name == "cvm3") return StatKind::CvM3;
    if (name == "linear") return StatKind::CvMLinear;
    if (name == "energy") return StatKind::Energy;
    if (name == "mmd") return StatKind::Mmd;
    if (name == "cq") return StatKind::Cq;
    if (name == "wmw") return StatKind::Wmw;
    if (name == "sign") return StatKind::SignProj;
    throw InvalidConfig("unknown statistic: " + name);
}

PooledGram pooled_gram(const SampleMatrix& x, const SampleMatrix& y) {
    if (x.cols() != y.cols()) throw DimMismatch("pooled_gram: dimension mismatch");
    const Index m = x.rows(), n = y.rows();
    SampleMatrix z(m + n, x.cols());
    z.topRows(m) = x;
    z.bottomRows(n) = y;
    PooledGram pg;
    pg.g.noalias() = Matrix(z) * Matrix(z).transpose();
    pg.sq_norms = pg.g.diagonal();
    return pg;
}

PooledData::PooledData(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg) : cfg_(cfg) {
    if (x.cols() != y.cols()) throw DimMismatch("pooled data: dimension mismatch");
    if (x.cols() < 1) throw DimMismatch("pooled data: need at least one coordinate");
    m_ = x.rows();
    n_ = y.rows();
    rows_.resize(m_ + n_, x.cols());
    rows_.topRows(m_) = x;
    rows_.bottomRows(n_) = y;

    const Index N = rows_.rows();
    gram_.g.noalias() = Matrix(rows_) * Matrix(rows_).transpose();
    gram_.sq_norms = gram_.g.diagonal();

    dist_.setZero(N, N);
    for (Index a = 0; a < N; ++a) {
        for (Index b = a + 1; b < N; ++b) {
            const double d = (rows_.row(a) - rows_.row(b)).norm();
            dist_(a, b) = d;
            dist_(b, a) = d;
        }
    }

    const double scale = N > 0 ? rows_.cwiseAbs().maxCoeff() : 0.0;
    eps_ = scaled_epsilon(cfg_, scale);
    small_norm_ = 1e-6 * std::max(1.0, scale);
}

double PooledData::angle_between_diffs(Index a, Index b, Index c, Index e) const {
    if (dim() == 1) {
        const double u = rows_(a, 0) - rows_(b, 0);
        const double v = rows_(c, 0) - rows_(e, 0);
        return u * v > 0.0 ? 0.0 : kPi;
    }
    const double nu = dist_(b, a);
    const double nv = dist_(e, c);
    if (nu >= small_norm_ && nv >= small_norm_) {
        const double dot = gram_.g(c, a) - gram_.g(e, a) - gram_.g(c, b) + gram_.g(e, b);
        double cc = dot / (nu * nv);
        if (cc > 1.0) cc = 1.0;
        if (cc < -1.0) cc = -1.0;
        if (std::abs(cc) <= detail::kColinearCos) return std::acos(cc);
    }
    // Ill-conditioned for the Gram route: tiny norms or near-colinear.
    return angle(rows_.row(a) - rows_.row(b), rows_.row(c) - rows_.row(e), cfg_);
}

double h_cvm(Index x1, Index x2, Index y1, Index y2, const PooledData& pd) {
    if (pd.tied(x1, y1) || pd.tied(x2, y1) || pd.tied(y2, x1)) {
        throw TieEncountered("h_cvm: tied difference vector");
    }
    const double a1 = pd.angle_between_diffs(x1, y1, x2, y1);
    const double a2 = pd.angle_between_diffs(y1, x1, y2, x1);
    return 1.0 / 3.0 - a1 / kTwoPi - a2 / kTwoPi;
}

namespace {

struct Accum {
    double sum = 0.0;
    std::int64_t count = 0;
};

// Combines fixed-index chunk partials; deterministic for any worker count.
Accum reduce_chunks(Index items, int threads,
                    const std::function<void(Index, Index, Accum&)>& body) {
    const Index chunk = detail::chunk_size_for(items);
    const Index n_chunks = items > 0 ? (items + chunk - 1) / chunk : 0;
    std::vector<Accum> partial(static_cast<std::size_t>(n_chunks));
    parallel_chunks(items, threads, [&](Index c, Index b, Index e) {
        Accum acc;
        for (Index t = b; t < e; ++t) body(c, t, acc);
        partial[static_cast<std::size_t>(c)] = acc;
    });
    Accum total;
    total.sum = pairwise_sum(0, n_chunks, [&](Index c) { return partial[static_cast<std::size_t>(c)].sum; });
    for (const Accum& a : partial) total.count += a.count;
    return total;
}

StatValue eval_cvm(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys,
                   const TwoSampleOptions& opt) {
    const Index m = static_cast<Index>(xs.size());
    const Index n = static_cast<Index>(ys.size());
    if (m < 2 || n < 2) throw TooFewSamples("u_cvm: need m, n >= 2");

    // Each kernel angle involves three points, so the quadruple sum over
    // (i1,i2,j1,j2) groups exactly by (i1,j1); the usable-tuple count keeps
    // the tie-skipping normalizer identical to the literal quadruple loop.
    const Index items = m * n;
    Accum total = reduce_chunks(items, opt.threads, [&](Index, Index t, Accum& acc) {
        const Index i1 = t / n;
        const Index j1 = t % n;
        const Index A = xs[static_cast<std::size_t>(i1)];
        const Index B = ys[static_cast<std::size_t>(j1)];
        if (pd.tied(A, B)) return;
        std::int64_t bcnt = 0, ccnt = 0;
        double s1 = 0.0, s2 = 0.0;
        for (Index i2 = 0; i2 < m; ++i2) {
            if (i2 == i1) continue;
            const Index X2 = xs[static_cast<std::size_t>(i2)];
            if (pd.tied(X2, B)) continue;
            ++bcnt;
            s1 += pd.angle_between_diffs(A, B, X2, B);
        }
        for (Index j2 = 0; j2 < n; ++j2) {
            if (j2 == j1) continue;
            const Index Y2 = ys[static_cast<std::size_t>(j2)];
            if (pd.tied(Y2, A)) continue;
            ++ccnt;
            s2 += pd.angle_between_diffs(B, A, Y2, A);
        }
        acc.sum += static_cast<double>(bcnt) * static_cast<double>(ccnt) / 3.0 -
                   (static_cast<double>(ccnt) * s1 + static_cast<double>(bcnt) * s2) / kTwoPi;
        acc.count += bcnt * ccnt;
    });

    if (total.count == 0) throw AllTuplesTied("u_cvm: all tuples tied");
    StatValue out;
    out.kind = StatKind::CvM;
    out.value = total.sum / static_cast<double>(total.count);
    out.skipped_tuples = static_cast<std::int64_t>(m) * (m - 1) * n * (n - 1) - total.count;
    return out;
}

StatValue eval_cvm3(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys,
                    const TwoSampleOptions& opt) {
    const Index m = static_cast<Index>(xs.size());
    const Index n = static_cast<Index>(ys.size());
    if (m < 3 || n < 3) throw TooFewSamples("u_cvm_third_order: need m, n >= 3");

    auto o2 = [&](Index p, Index q, Index r) {  // orthant2(Z_p - Z_r, Z_q - Z_r)
        return 0.5 - pd.angle_between_diffs(p, r, q, r) / kTwoPi;
    };

    Accum total = reduce_chunks(m, opt.threads, [&](Index, Index i1, Accum& acc) {
        const Index X1 = xs[static_cast<std::size_t>(i1)];
        for (Index i2 = 0; i2 < m; ++i2) {
            if (i2 == i1) continue;
            const Index X2 = xs[static_cast<std::size_t>(i2)];
            for (Index i3 = 0; i3 < m; ++i3) {
                if (i3 == i1 || i3 == i2) continue;
                const Index X3 = xs[static_cast<std::size_t>(i3)];
                for (Index j1 = 0; j1 < n; ++j1) {
                    const Index Y1 = ys[static_cast<std::size_t>(j1)];
                    for (Index j2 = 0; j2 < n; ++j2) {
                        if (j2 == j1) continue;
                        const Index Y2 = ys[static_cast<std::size_t>(j2)];
                        for (Index j3 = 0; j3 < n; ++j3) {
                            if (j3 == j1 || j3 == j2) continue;
                            const Index Y3 = ys[static_cast<std::size_t>(j3)];
                            if (pd.tied(X1, X3) || pd.tied(X2, X3) || pd.tied(Y1, X3) ||
                                pd.tied(Y2, X3) || pd.tied(X1, Y3) || pd.tied(X2, Y3) ||
                                pd.tied(Y1, Y3) || pd.tied(Y2, Y3)) {
                                continue;
                            }
                            const double h_star =
                                0.5 * (o2(X1, X2, X3) - o2(X1, Y2, X3) - o2(Y1, X2, X3) + o2(Y1, Y2, X3)) +
                                0.5 * (o2(X1, X2, Y3) - o2(X1, Y2, Y3) - o2(Y1, X2, Y3) + o2(Y1, Y2, Y3));
                            acc.sum += h_star;
                            acc.count += 1;
                        }
                    }
                }
            }
        }
    });

    if (total.count == 0) throw AllTuplesTied("u_cvm_third_order: all tuples tied");
    StatValue out;
    out.kind = StatKind::CvM3;
    out.value = total.sum / static_cast<double>(total.count);
    out.skipped_tuples =
        static_cast<std::int64_t>(m) * (m - 1) * (m - 2) * n * (n - 1) * (n - 2) - total.count;
    return out;
}

StatValue eval_energy(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys) {
    const Index m = static_cast<Index>(xs.size());
    const Index n = static_cast<Index>(ys.size());
    if (m < 2 || n < 2) throw TooFewSamples("u_energy: need m, n >= 2");
    const double cross = pairwise_sum(0, m * n, [&](Index t) {
        return pd.dist(xs[static_cast<std::size_t>(t / n)], ys[static_cast<std::size_t>(t % n)]);
    });
    const double within_x = pairwise_sum(0, m, [&](Index i) {
        double s = 0.0;
        for (Index j = i + 1; j < m; ++j) s += pd.dist(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
        return s;
    });
    const double within_y = pairwise_sum(0, n, [&](Index i) {
        double s = 0.0;
        for (Index j = i + 1; j < n; ++j) s += pd.dist(ys[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
        return s;
    });
    StatValue out;
    out.kind = StatKind::Energy;
    out.value = 2.0 * cross / (static_cast<double>(m) * n) -
                2.0 * within_x / (static_cast<double>(m) * (m - 1)) -
                2.0 * within_y / (static_cast<double>(n) * (n - 1));
    return out;
}

StatValue eval_mmd(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys,
                   const TwoSampleOptions& opt) {
    const Index m = static_cast<Index>(xs.size());
    const Index n = static_cast<Index>(ys.size());
    if (m < 2 || n < 2) throw TooFewSamples("u_mmd: need m, n >= 2");
    const double bw2 = opt.mmd_bandwidth_sq ? *opt.mmd_bandwidth_sq : median_heuristic_bandwidth_sq(pd);
    if (!(bw2 > 0.0)) throw ZeroBandwidth("u_mmd: bandwidth must be positive");
    auto k = [&](Index a, Index b) {
        const double d = pd.dist(a, b);
        return std::exp(-d * d / (2.0 * bw2));
    };
    const double within_x = pairwise_sum(0, m, [&](Index i) {
        double s = 0.0;
        for (Index j = i + 1; j < m; ++j) s += k(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
        return s;
    });
    const double within_y = pairwise_sum(0, n, [&](Index i) {
        double s = 0.0;
        for (Index j = i + 1; j < n; ++j) s += k(ys[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
        return s;
    });
    const double cross = pairwise_sum(0, m * n, [&](Index t) {
        return k(xs[static_cast<std::size_t>(t / n)], ys[static_cast<std::size_t>(t % n)]);
    });
    StatValue out;
    out.kind = StatKind::Mmd;
    out.value = 2.0 * within_x / (static_cast<double>(m) * (m - 1)) +
                2.0 * within_y / (static_cast<double>(n) * (n - 1)) -
                2.0 * cross / (static_cast<double>(m) * n);
    return out;
}

StatValue eval_cq(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys) {
    const Index m = static_cast<Index>(xs.size());
    const Index n = static_cast<Index>(ys.size());
    if (m < 2 || n < 2) throw TooFewSamples("u_cq: need m, n >= 2");
    const Matrix& g = pd.gram().g;
    const double sxx = pairwise_sum(0, m, [&](Index i) {
        double s = 0.0;
        for (Index j = i + 1; j < m; ++j) s += g(xs[static_cast<std::size_t>(j)], xs[static_cast<std::size_t>(i)]);
        return s;
    });
    const double syy = pairwise_sum(0, n, [&](Index i) {
        double s = 0.0;
        for (Index j = i + 1; j < n; ++j) s += g(ys[static_cast<std::size_t>(j)], ys[static_cast<std::size_t>(i)]);
        return s;
    });
    const double sxy = pairwise_sum(0, m * n, [&](Index t) {
        return g(xs[static_cast<std::size_t>(t / n)], ys[static_cast<std::size_t>(t % n)]);
    });
    StatValue out;
    out.kind = StatKind::Cq;
    out.value = 2.0 * sxx / (static_cast<double>(m) * (m - 1)) - 2.0 * sxy / (static_cast<double>(m) * n) +
                2.0 * syy / (static_cast<double>(n) * (n - 1));
    return out;
}

StatValue eval_wmw(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys) {
    const Index m = static_cast<Index>(xs.size());
    const Index n = static_cast<Index>(ys.size());
    if (m < 2 || n < 2) throw TooFewSamples("u_wmw: need m, n >= 2");
    const Index d = pd.dim();
    const SampleMatrix& rows = pd.rows();

    // Sum of R_{i1 j1}' R_{i2 j2} over i1 != i2, j1 != j2 by inclusion-
    // exclusion on the normalized difference vectors (tied pairs are zero).
    SampleMatrix row_sum = SampleMatrix::Zero(m, d);
    SampleMatrix col_sum = SampleMatrix::Zero(n, d);
    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(d);
    std::vector<std::int64_t> row_cnt(static_cast<std::size_t>(m), 0), col_cnt(static_cast<std::size_t>(n), 0);
    std::int64_t usable_pairs = 0;
    Eigen::RowVectorXd r(d);
    for (Index i = 0; i < m; ++i) {
        const Index a = xs[static_cast<std::size_t>(i)];
        for (Index j = 0; j < n; ++j) {
            const Index b = ys[static_cast<std::size_t>(j)];
            if (pd.tied(a, b)) continue;
            r = (rows.row(a) - rows.row(b)) / pd.dist(a, b);
            row_sum.row(i) += r;
            col_sum.row(j) += r;
            total += r;
            ++row_cnt[static_cast<std::size_t>(i)];
            ++col_cnt[static_cast<std::size_t>(j)];
            ++usable_pairs;
        }
    }
    std::int64_t usable_tuples = usable_pairs * usable_pairs + usable_pairs;
    double numerator = total.squaredNorm() + static_cast<double>(usable_pairs);
    for (Index i = 0; i < m; ++i) {
        numerator -= row_sum.row(i).squaredNorm();
        usable_tuples -= row_cnt[static_cast<std::size_t>(i)] * row_cnt[static_cast<std::size_t>(i)];
    }
    for (Index j = 0; j < n; ++j) {
        numerator -= col_sum.row(j).squaredNorm();
        usable_tuples -= col_cnt[static_cast<std::size_t>(j)] * col_cnt[static_cast<std::size_t>(j)];
    }
    if (usable_tuples <= 0) throw AllTuplesTied("u_wmw: all tuples tied");
    StatValue out;
    out.kind = StatKind::Wmw;
    out.value = numerator / static_cast<double>(usable_tuples);
    out.skipped_tuples = static_cast<std::int64_t>(m) * (m - 1) * n * (n - 1) - usable_tuples;
    return out;
}

StatValue eval_sign_paired(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys) {
    if (xs.size() != ys.size()) throw UnequalSizes("sign statistic: paired rows need m = n");
    const Index n = static_cast<Index>(xs.size());
    if (n < 2) throw TooFewSamples("u_sign_proj: need n >= 2");
    std::vector<Index> usable;
    usable.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        if (!pd.tied(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)])) usable.push_back(i);
    }
    const Index k = static_cast<Index>(usable.size());
    if (k < 2) throw AllTuplesTied("u_sign_proj: all rows tied");
    const double s = pairwise_sum(0, k, [&](Index a) {
        double acc = 0.0;
        const Index i = usable[static_cast<std::size_t>(a)];
        for (Index b = a + 1; b < k; ++b) {
            const Index j = usable[static_cast<std::size_t>(b)];
            const double ang = pd.angle_between_diffs(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)],
                                                      xs[static_cast<std::size_t>(j)], ys[static_cast<std::size_t>(j)]);
            acc += 0.25 - ang / kTwoPi;
        }
        return acc;
    });
    StatValue out;
    out.kind = StatKind::SignProj;
    out.value = 2.0 * s / (static_cast<double>(k) * (k - 1));
    out.skipped_tuples = static_cast<std::int64_t>(n) * (n - 1) - static_cast<std::int64_t>(k) * (k - 1);
    return out;
}

}  // namespace

double median_heuristic_bandwidth_sq(const PooledData& pd) {
    const Index N = pd.total();
    if (N < 2) throw TooFewSamples("median heuristic: need at least two pooled rows");
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(N * (N - 1) / 2));
    for (Index a = 0; a < N; ++a) {
        for (Index b = a + 1; b < N; ++b) d.push_back(pd.dist(a, b));
    }
    const std::size_t half = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + half, d.end());
    double med = d[half];
    if (d.size() % 2 == 0) {
        const double lo = *std::max_element(d.begin(), d.begin() + half);
        med = 0.5 * (lo + med);
    }
    if (med <= 0.0) throw ZeroBandwidth("median heuristic: median pairwise distance is zero");
    return med * med;
}

StatValue eval_two_sample(StatKind kind, const PooledData& pd, std::span<const Index> xs,
                          std::span<const Index> ys, const TwoSampleOptions& opt) {
    switch (kind) {
        case StatKind::CvM: return eval_cvm(pd, xs, ys, opt);
        case StatKind::CvM3: return eval_cvm3(pd, xs, ys, opt);
        case StatKind::Energy: return eval_energy(pd, xs, ys);
        case StatKind::Mmd: return eval_mmd(pd, xs, ys, opt);
        case StatKind::Cq: return eval_cq(pd, xs, ys);
        case StatKind::Wmw: return eval_wmw(pd, xs, ys);
        case StatKind::SignProj: return eval_sign_paired(pd, xs, ys);
        case StatKind::CvMLinear:
            throw InvalidConfig("linear statistic carries its own blocking; use l_cvm");
    }
    throw InvalidConfig("unknown statistic kind");
}

StatValue l_cvm_indexed(const PooledData& pd, std::span<const Index> xs, std::span<const Index> ys,
                        RandomStream& rng) {
    if (xs.size() != ys.size()) throw UnequalSizes("l_cvm: need m = n");
    const Index n = static_cast<Index>(xs.size());
    if (n < 4) throw TooFewSamples("l_cvm: need n >= 4");
    std::vector<Index> sx(xs.begin(), xs.end());
    std::vector<Index> sy(ys.begin(), ys.end());
    rng.shuffle(sx);
    rng.shuffle(sy);
    const Index blocks = n / 2;
    double sum = 0.0;
    std::int64_t used = 0, skipped = 0;
    for (Index i = 0; i < blocks; ++i) {
        const Index x1 = sx[static_cast<std::size_t>(2 * i)];
        const Index x2 = sx[static_cast<std::size_t>(2 * i + 1)];
        const Index y1 = sy[static_cast<std::size_t>(2 * i)];
        const Index y2 = sy[static_cast<std::size_t>(2 * i + 1)];
        if (pd.tied(x1, y1) || pd.tied(x2, y1) || pd.tied(y2, x1) ||
            pd.tied(x2, y2) || pd.tied(x1, y2) || pd.tied(y1, x2)) {
            ++skipped;
            continue;
        }
        sum += 0.5 * (h_cvm(x1, x2, y1, y2, pd) + h_cvm(x2, x1, y2, y1, pd));
        ++used;
    }
    if (used == 0) throw AllTuplesTied("l_cvm: every block hit a tie");
    StatValue out;
    out.kind = StatKind::CvMLinear;
    out.value = sum / static_cast<double>(used);
    out.skipped_tuples = skipped;
    return out;
}

namespace {

StatValue eval_on(const SampleMatrix& x, const SampleMatrix& y, StatKind kind, const TwoSampleOptions& opt) {
    PooledData pd(x, y, opt.angle);
    const std::vector<Index> xs = iota_indices(0, x.rows());
    const std::vector<Index> ys = iota_indices(x.rows(), y.rows());
    return eval_two_sample(kind, pd, xs, ys, opt);
}

}  // namespace

StatValue u_cvm(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg, int threads) {
    TwoSampleOptions opt;
    opt.angle = cfg;
    opt.threads = threads;
    return eval_on(x, y, StatKind::CvM, opt);
}

StatValue u_cvm_third_order(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg, int threads) {
    TwoSampleOptions opt;
    opt.angle = cfg;
    opt.threads = threads;
    return eval_on(x, y, StatKind::CvM3, opt);
}

StatValue l_cvm(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg, RandomStream& rng) {
    PooledData pd(x, y, cfg);
    const std::vector<Index> xs = iota_indices(0, x.rows());
    const std::vector<Index> ys = iota_indices(x.rows(), y.rows());
    return l_cvm_indexed(pd, xs, ys, rng);
}

StatValue u_energy(const SampleMatrix& x, const SampleMatrix& y) {
    return eval_on(x, y, StatKind::Energy, {});
}

StatValue u_mmd(const SampleMatrix& x, const SampleMatrix& y, const MmdConfig& cfg) {
    TwoSampleOptions opt;
    if (cfg.bandwidth_sq) {
        if (!(*cfg.bandwidth_sq > 0.0)) throw InvalidConfig("u_mmd: explicit bandwidth must be positive");
        opt.mmd_bandwidth_sq = cfg.bandwidth_sq;
    }
    return eval_on(x, y, StatKind::Mmd, opt);
}

StatValue u_cq(const SampleMatrix& x, const SampleMatrix& y) {
    return eval_on(x, y, StatKind::Cq, {});
}

StatValue u_wmw(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg) {
    TwoSampleOptions opt;
    opt.angle = cfg;
    return eval_on(x, y, StatKind::Wmw, opt);
}

StatValue u_sign_proj(const SampleMatrix& z, const AngleConfig& cfg) {
    const Index n = z.rows();
    if (n < 2) throw TooFewSamples("u_sign_proj: need n >= 2");
    const double scale = z.size() > 0 ? z.cwiseAbs().maxCoeff() : 0.0;
    const double eps = scaled_epsilon(cfg, scale);
    std::vector<Index> usable;
    usable.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        if (z.row(i).norm() > eps) usable.push_back(i);
    }
    const Index k = static_cast<Index>(usable.size());
    if (k < 2) throw AllTuplesTied("u_sign_proj: all rows at the origin");
    const double s = pairwise_sum(0, k, [&](Index a) {
        double acc = 0.0;
        for (Index b = a + 1; b < k; ++b) {
            acc += 0.25 - angle(z.row(usable[static_cast<std::size_t>(a)]),
                                z.row(usable[static_cast<std::size_t>(b)]), cfg) /
                              kTwoPi;
        }
        return acc;
    });
    StatValue out;
    out.kind = StatKind::SignProj;
    out.value = 2.0 * s / (static_cast<double>(k) * (k - 1));
    out.skipped_tuples = static_cast<std::int64_t>(n) * (n - 1) - static_cast<std::int64_t>(k) * (k - 1);
    return out;
}

}  // namespace projcvm
