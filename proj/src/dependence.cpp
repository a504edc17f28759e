#include "projcvm/dependence.hpp"

#include <algorithm>
#include <cmath>

#include "projcvm/errors.hpp"
#include "projcvm/geometry.hpp"
#include "projcvm/parallel.hpp"

namespace projcvm {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFourPi = 4.0 * kPi;

const char* dep_names[] = {"tau", "bkr", "taustar"};

struct KernelOut {
    double value = 0.0;
    bool tied = false;
};

double data_scale(const SampleMatrix& m) { return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0; }

// Pairwise canonical differences of four rows; pair order
// (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
struct Diffs4 {
    SampleMatrix d;     // 6 x dim
    double norm[6];
    bool ok = true;

    static int pair_index(int a, int b) {
        static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
        return table[a][b];
    }

    template <typename Rows>
    void fill(const Rows& row_of, double eps) {
        ok = true;
        int k = 0;
        for (int a = 0; a < 4 && ok; ++a) {
            for (int b = a + 1; b < 4; ++b, ++k) {
                d.row(k) = row_of(a) - row_of(b);
                norm[k] = d.row(k).norm();
                if (norm[k] <= eps) {
                    ok = false;
                    break;
                }
            }
        }
    }
};

// All 15 angles among the canonical differences of a 4-tuple.
struct Angles4 {
    double ang[6][6];

    void fill(const Diffs4& diffs, const AngleConfig& cfg) {
        for (int e = 0; e < 6; ++e) {
            ang[e][e] = 0.0;
            for (int f = e + 1; f < 6; ++f) {
                ang[e][f] = ang[f][e] = angle(diffs.d.row(e), diffs.d.row(f), cfg);
            }
        }
    }

    // Ang(s1 * D_{e1}, s2 * D_{e2}) with sign flips mapped to pi - ang.
    double signed_angle(int e1, int s1, int e2, int s2) const {
        if (e1 == e2) return s1 == s2 ? 0.0 : kPi;
        return s1 == s2 ? ang[e1][e2] : kPi - ang[e1][e2];
    }
};

struct SignedDiff {
    int idx;
    int sign;
};

SignedDiff diff_of(int a, int b) {
    return a < b ? SignedDiff{Diffs4::pair_index(a, b), +1} : SignedDiff{Diffs4::pair_index(b, a), -1};
}

double g_from(const Angles4& t, SignedDiff u1, SignedDiff u2, SignedDiff u3) {
    const double s = t.signed_angle(u1.idx, u1.sign, u2.idx, u2.sign) +
                     t.signed_angle(u1.idx, u1.sign, u3.idx, u3.sign) +
                     t.signed_angle(u2.idx, u2.sign, u3.idx, u3.sign);
    return 0.5 - s / kFourPi;
}

// h_d(Z_{l0}, Z_{l1}, Z_{l2}, Z_{l3}) assembled from the precomputed angles.
double h_from(const Angles4& t, int l0, int l1, int l2, int l3) {
    return g_from(t, diff_of(l0, l1), diff_of(l1, l2), diff_of(l2, l3)) +
           g_from(t, diff_of(l1, l0), diff_of(l0, l2), diff_of(l2, l3)) +
           g_from(t, diff_of(l0, l1), diff_of(l1, l3), diff_of(l3, l2)) +
           g_from(t, diff_of(l1, l0), diff_of(l0, l3), diff_of(l3, l2));
}

struct DepContext {
    const SampleMatrix& x;
    const SampleMatrix& y;
    const std::vector<Index>* ymap;  // optional row permutation of y
    double eps_x;
    double eps_y;
    AngleConfig cfg;

    Index rows() const { return x.rows(); }
    auto yrow(Index i) const { return y.row(ymap ? (*ymap)[static_cast<std::size_t>(i)] : i); }
};

// Per-thread scratch for the degree-4 kernels.
struct Scratch4 {
    Diffs4 dx, dy;
    Angles4 ax, ay;

    explicit Scratch4(Index p, Index q) {
        dx.d.resize(6, p);
        dy.d.resize(6, q);
    }
};

KernelOut kendall_kernel(const DepContext& c, const Index* t, Scratch4& w) {
    KernelOut out;
    w.dx.d.row(0) = c.x.row(t[0]) - c.x.row(t[1]);
    w.dx.d.row(1) = c.x.row(t[2]) - c.x.row(t[3]);
    w.dy.d.row(0) = c.yrow(t[0]) - c.yrow(t[1]);
    w.dy.d.row(1) = c.yrow(t[2]) - c.yrow(t[3]);
    if (w.dx.d.row(0).norm() <= c.eps_x || w.dx.d.row(1).norm() <= c.eps_x ||
        w.dy.d.row(0).norm() <= c.eps_y || w.dy.d.row(1).norm() <= c.eps_y) {
        out.tied = true;
        return out;
    }
    const double fx = 2.0 - 2.0 * angle(w.dx.d.row(0), w.dx.d.row(1), c.cfg) / kPi;
    const double fy = 2.0 - 2.0 * angle(w.dy.d.row(0), w.dy.d.row(1), c.cfg) / kPi;
    out.value = fx * fy - 1.0;
    return out;
}

// Per tuple, integrating a_sign over the two spheres factorizes into
// 2(h_d(Z1,Z3,Z2,Z4) - h_d(Z1,Z2,Z3,Z4)) per sample, so the kernel is the
// product of those factors.
KernelOut taustar_kernel(const DepContext& c, const Index* t, Scratch4& w) {
    KernelOut out;
    w.dx.fill([&](int a) { return c.x.row(t[a]); }, c.eps_x);
    if (!w.dx.ok) {
        out.tied = true;
        return out;
    }
    w.dy.fill([&](int a) { return c.yrow(t[a]); }, c.eps_y);
    if (!w.dy.ok) {
        out.tied = true;
        return out;
    }
    w.ax.fill(w.dx, c.cfg);
    w.ay.fill(w.dy, c.cfg);
    const double fx = h_from(w.ax, 0, 2, 1, 3) - h_from(w.ax, 0, 1, 2, 3);
    const double fy = h_from(w.ay, 0, 2, 1, 3) - h_from(w.ay, 0, 1, 2, 3);
    out.value = 4.0 * fx * fy;
    return out;
}

struct Scratch6 {
    SampleMatrix dx, dy;  // 2 x dim work rows

    explicit Scratch6(Index p, Index q) {
        dx.resize(2, p);
        dy.resize(2, q);
    }
};

// One (1/2 - Ang/(2 pi)) factor with its tie check; rows a, b are anchored at c.
template <typename RowOf>
bool bkr_factor(const RowOf& row_of, Index a, Index b, Index anchor, double eps, const AngleConfig& cfg,
                SampleMatrix& work, double* out) {
    work.row(0) = row_of(a) - row_of(anchor);
    work.row(1) = row_of(b) - row_of(anchor);
    if (work.row(0).norm() <= eps || work.row(1).norm() <= eps) return false;
    *out = 0.5 - angle(work.row(0), work.row(1), cfg) / kTwoPi;
    return true;
}

KernelOut bkr_kernel(const DepContext& c, const Index* t, Scratch6& w) {
    KernelOut out;
    auto xr = [&](Index a) { return c.x.row(t[a]); };
    auto yr = [&](Index a) { return c.yrow(t[a]); };
    double fx1, fy1, fx2, fy2, fx3, fy3;
    if (!bkr_factor(xr, 0, 1, 2, c.eps_x, c.cfg, w.dx, &fx1) ||
        !bkr_factor(yr, 0, 1, 3, c.eps_y, c.cfg, w.dy, &fy1) ||
        !bkr_factor(xr, 0, 1, 4, c.eps_x, c.cfg, w.dx, &fx2) ||
        !bkr_factor(yr, 2, 3, 5, c.eps_y, c.cfg, w.dy, &fy2) ||
        !bkr_factor(xr, 0, 1, 3, c.eps_x, c.cfg, w.dx, &fx3) ||
        !bkr_factor(yr, 0, 2, 4, c.eps_y, c.cfg, w.dy, &fy3)) {
        out.tied = true;
        return out;
    }
    out.value = fx1 * fy1 + fx2 * fy2 - 2.0 * fx3 * fy3;
    return out;
}

struct DepAccum {
    double sum = 0.0;
    std::int64_t used = 0;
    std::int64_t skipped = 0;
};

// Exact enumeration of ordered distinct tuples, parallel over the first index.
template <int Deg, typename Scratch, typename Kernel>
DepAccum enumerate_exact(const DepContext& c, int threads, Index p, Index q, const Kernel& kernel) {
    const Index n = c.rows();
    const Index chunk = detail::chunk_size_for(n);
    const Index n_chunks = (n + chunk - 1) / chunk;
    std::vector<DepAccum> partial(static_cast<std::size_t>(n_chunks));
    parallel_chunks(n, threads, [&](Index ci, Index lo, Index hi) {
        Scratch w(p, q);
        DepAccum acc;
        Index t[Deg];
        auto visit = [&](auto&& self, int depth) -> void {
            if (depth == Deg) {
                const KernelOut k = kernel(c, t, w);
                if (k.tied) {
                    ++acc.skipped;
                } else {
                    acc.sum += k.value;
                    ++acc.used;
                }
                return;
            }
            for (Index i = 0; i < n; ++i) {
                bool dup = false;
                for (int d0 = 0; d0 < depth; ++d0) dup |= t[d0] == i;
                if (dup) continue;
                t[depth] = i;
                self(self, depth + 1);
            }
        };
        for (Index first = lo; first < hi; ++first) {
            t[0] = first;
            visit(visit, 1);
        }
        partial[static_cast<std::size_t>(ci)] = acc;
    });
    DepAccum total;
    total.sum = pairwise_sum(0, n_chunks, [&](Index i) { return partial[static_cast<std::size_t>(i)].sum; });
    for (const DepAccum& a : partial) {
        total.used += a.used;
        total.skipped += a.skipped;
    }
    return total;
}

// Uniformly drawn ordered distinct tuples; the set depends only on the seed.
template <int Deg, typename Scratch, typename Kernel>
DepAccum enumerate_subsampled(const DepContext& c, const DepConfig& cfg, Index p, Index q,
                              const Kernel& kernel) {
    const Index n = c.rows();
    const Index T = cfg.subsample_tuples;
    if (T < 1) throw InvalidConfig("dependence: subsample_tuples must be positive");
    const RandomStream base = RandomStream(cfg.subsample_seed).substream(0x7u);
    const Index chunk = detail::chunk_size_for(T);
    const Index n_chunks = (T + chunk - 1) / chunk;
    std::vector<DepAccum> partial(static_cast<std::size_t>(n_chunks));
    parallel_chunks(T, cfg.threads, [&](Index ci, Index lo, Index hi) {
        Scratch w(p, q);
        DepAccum acc;
        Index t[Deg];
        RandomStream rng = base.substream(static_cast<std::uint64_t>(ci));
        for (Index draw = lo; draw < hi; ++draw) {
            for (int d0 = 0; d0 < Deg; ++d0) {
                for (;;) {
                    const Index i = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n)));
                    bool dup = false;
                    for (int d1 = 0; d1 < d0; ++d1) dup |= t[d1] == i;
                    if (!dup) {
                        t[d0] = i;
                        break;
                    }
                }
            }
            const KernelOut k = kernel(c, t, w);
            if (k.tied) {
                ++acc.skipped;
            } else {
                acc.sum += k.value;
                ++acc.used;
            }
        }
        partial[static_cast<std::size_t>(ci)] = acc;
    });
    DepAccum total;
    total.sum = pairwise_sum(0, n_chunks, [&](Index i) { return partial[static_cast<std::size_t>(i)].sum; });
    for (const DepAccum& a : partial) {
        total.used += a.used;
        total.skipped += a.skipped;
    }
    return total;
}

DepValue dep_estimate(const SampleMatrix& x, const SampleMatrix& y, const std::vector<Index>* ymap,
                      DepKind kind, const DepConfig& cfg) {
    if (x.rows() != y.rows()) throw UnequalSizes("dependence: paired samples need equal row counts");
    const Index n = x.rows();
    const int degree = kind == DepKind::BkrProj ? 6 : 4;
    if (n < degree) throw TooFewSamples("dependence: too few rows for the estimator degree");

    DepContext c{x, y, ymap, scaled_epsilon(cfg.angle, data_scale(x)), scaled_epsilon(cfg.angle, data_scale(y)),
                 cfg.angle};

    DepAccum acc;
    if (kind == DepKind::KendallProj) {
        acc = n <= cfg.exact_cap_deg4
                  ? enumerate_exact<4, Scratch4>(c, cfg.threads, x.cols(), y.cols(), kendall_kernel)
                  : enumerate_subsampled<4, Scratch4>(c, cfg, x.cols(), y.cols(), kendall_kernel);
    } else if (kind == DepKind::TauStar) {
        acc = n <= cfg.exact_cap_deg4
                  ? enumerate_exact<4, Scratch4>(c, cfg.threads, x.cols(), y.cols(), taustar_kernel)
                  : enumerate_subsampled<4, Scratch4>(c, cfg, x.cols(), y.cols(), taustar_kernel);
    } else {
        acc = n <= cfg.exact_cap_deg6
                  ? enumerate_exact<6, Scratch6>(c, cfg.threads, x.cols(), y.cols(), bkr_kernel)
                  : enumerate_subsampled<6, Scratch6>(c, cfg, x.cols(), y.cols(), bkr_kernel);
    }

    if (acc.used == 0) throw AllTuplesTied("dependence: every tuple hit a tie");
    DepValue out;
    out.kind = kind;
    out.value = acc.sum / static_cast<double>(acc.used);
    out.skipped_tuples = acc.skipped;
    out.tuples_evaluated = acc.used;
    return out;
}

}  // namespace

const char* to_string(DepKind kind) { return dep_names[static_cast<int>(kind)]; }

DepKind dep_kind_from_string(const std::string& name) {
    if (name == "tau") return DepKind::KendallProj;
    if (name == "bkr") return DepKind::BkrProj;
    if (name == "taustar") return DepKind::TauStar;
    throw InvalidConfig("unknown dependence measure: " + name);
}

double g_d(const Eigen::Ref<const Vector>& u1, const Eigen::Ref<const Vector>& u2,
           const Eigen::Ref<const Vector>& u3, const AngleConfig& cfg) {
    return 0.5 - (angle(u1, u2, cfg) + angle(u1, u3, cfg) + angle(u2, u3, cfg)) / kFourPi;
}

DepValue kendall_tau_proj(const PairedSample& s, const DepConfig& cfg) {
    return dep_estimate(s.x, s.y, nullptr, DepKind::KendallProj, cfg);
}

DepValue bkr_proj(const PairedSample& s, const DepConfig& cfg) {
    return dep_estimate(s.x, s.y, nullptr, DepKind::BkrProj, cfg);
}

DepValue taustar_proj(const PairedSample& s, const DepConfig& cfg) {
    return dep_estimate(s.x, s.y, nullptr, DepKind::TauStar, cfg);
}

PermResult indep_perm_test(const PairedSample& s, DepKind kind, const PermConfig& cfg,
                           const DepConfig& dep_cfg, int threads) {
    if (cfg.n_perms < 1) throw InvalidConfig("indep_perm_test: need B >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InvalidConfig("indep_perm_test: alpha must be in (0, 1)");

    DepConfig dc = dep_cfg;
    dc.threads = 1;
    const DepValue observed = dep_estimate(s.x, s.y, nullptr, kind, dc);

    const RandomStream base(cfg.master_seed);
    const int B = cfg.n_perms;
    std::vector<double> permuted(static_cast<std::size_t>(B));
    parallel_chunks(B, threads, [&](Index, Index lo, Index hi) {
        for (Index b = lo; b < hi; ++b) {
            RandomStream rng = base.substream(static_cast<std::uint64_t>(b) + 1);
            const std::vector<Index> ymap = rng.permutation(s.y.rows());
            permuted[static_cast<std::size_t>(b)] = dep_estimate(s.x, s.y, &ymap, kind, dc).value;
        }
    });

    PermResult res;
    res.seed = cfg.master_seed;
    res.observed = observed.value;
    res.skipped_tuples = observed.skipped_tuples;
    std::int64_t ge = 0;
    for (double v : permuted) ge += v >= res.observed ? 1 : 0;
    res.n_perms = B;
    res.p_value = static_cast<double>(ge + 1) / static_cast<double>(B + 1);
    res.permuted_values = std::move(permuted);
    res.reject = res.p_value <= cfg.alpha;
    return res;
}

}  // namespace projcvm
