#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "projcvm/geometry.hpp"
#include "projcvm/random.hpp"
#include "projcvm/types.hpp"

namespace projcvm {

enum class StatKind { CvM, CvM3, CvMLinear, Energy, Mmd, Cq, Wmw, SignProj };

const char* to_string(StatKind kind);
StatKind stat_kind_from_string(const std::string& name);

struct StatValue {
    double value = 0.0;
    StatKind kind = StatKind::CvM;
    std::int64_t skipped_tuples = 0;
};

struct MmdConfig {
    // Gaussian kernel bandwidth as sigma^2; unset = median heuristic over the
    // pooled pairwise distances (sigma = median distance, sigma^2 = median^2).
    std::optional<double> bandwidth_sq;
};

// Inner products of the pooled sample, reused across permutations: a
// relabeling only permutes index sets, never the matrix.
struct PooledGram {
    Matrix g;          // N x N, g(a,b) = Z_a' Z_b
    Vector sq_norms;   // diagonal of g

    // (Z_a - Z_b)'(Z_c - Z_e) from four entries.
    double diff_dot(Index a, Index b, Index c, Index e) const {
        return g(a, c) - g(a, e) - g(b, c) + g(b, e);
    }
};

PooledGram pooled_gram(const SampleMatrix& x, const SampleMatrix& y);

// Pooled evaluation context: the Gram matrix plus raw rows and pairwise
// distances (the latter computed from raw coordinates; the Gram identity has
// no digits left at the tie scale).
class PooledData {
public:
    PooledData(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg = {});

    Index total() const { return rows_.rows(); }
    Index dim() const { return rows_.cols(); }
    Index m() const { return m_; }
    Index n() const { return n_; }
    const SampleMatrix& rows() const { return rows_; }
    const PooledGram& gram() const { return gram_; }
    const AngleConfig& config() const { return cfg_; }
    double tie_epsilon() const { return eps_; }

    double dist(Index a, Index b) const { return dist_(a, b); }
    bool tied(Index a, Index b) const { return dist_(a, b) <= eps_; }

    // Ang(Z_a - Z_b, Z_c - Z_e); callers must have excluded tied pairs.
    double angle_between_diffs(Index a, Index b, Index c, Index e) const;

private:
    SampleMatrix rows_;
    PooledGram gram_;
    Matrix dist_;
    Index m_ = 0, n_ = 0;
    AngleConfig cfg_;
    double eps_ = 0.0;
    double small_norm_ = 0.0;  // below this, inner products come from raw rows
};

struct TwoSampleOptions {
    AngleConfig angle;
    std::optional<double> mmd_bandwidth_sq;  // resolved once per pooled sample
    int threads = 1;
};

// Kernel of order two evaluated on pooled indices; throws TieEncountered when
// a required difference vector is at or below the tie threshold.
double h_cvm(Index x1, Index x2, Index y1, Index y2, const PooledData& pooled);

// Statistic on a label assignment of the pooled sample. CvMLinear is not
// evaluable here (it carries its own blocking randomness); use l_cvm.
StatValue eval_two_sample(StatKind kind, const PooledData& pooled, std::span<const Index> xs,
                          std::span<const Index> ys, const TwoSampleOptions& opt = {});

double median_heuristic_bandwidth_sq(const PooledData& pooled);

StatValue u_cvm(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg = {}, int threads = 1);
StatValue u_cvm_third_order(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg = {},
                            int threads = 1);
StatValue l_cvm(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg, RandomStream& rng);
StatValue u_energy(const SampleMatrix& x, const SampleMatrix& y);
StatValue u_mmd(const SampleMatrix& x, const SampleMatrix& y, const MmdConfig& cfg = {});
StatValue u_cq(const SampleMatrix& x, const SampleMatrix& y);
StatValue u_wmw(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg = {});

// One-sample projection-averaged sign statistic over the rows of z.
StatValue u_sign_proj(const SampleMatrix& z, const AngleConfig& cfg = {});

// Linear statistic on an index assignment (blocking order given by rng);
// shared by l_cvm and the permutation driver.
StatValue l_cvm_indexed(const PooledData& pooled, std::span<const Index> xs, std::span<const Index> ys,
                        RandomStream& rng);

}  // namespace projcvm
