#pragma once

#include <array>
#include <cstdint>

#include "projcvm/permutation.hpp"
#include "projcvm/types.hpp"

namespace projcvm {

struct PairedSample {
    SampleMatrix x;  // n x p
    SampleMatrix y;  // n x q
};

enum class DepKind { KendallProj, BkrProj, TauStar };

const char* to_string(DepKind kind);
DepKind dep_kind_from_string(const std::string& name);

struct DepValue {
    double value = 0.0;
    DepKind kind = DepKind::KendallProj;
    std::int64_t skipped_tuples = 0;
    std::int64_t tuples_evaluated = 0;  // non-skipped tuples entering the average
};

struct DepConfig {
    AngleConfig angle;
    // Complete enumeration below these, uniformly subsampled ordered tuples above.
    Index exact_cap_deg4 = 60;
    Index exact_cap_deg6 = 20;
    Index subsample_tuples = 200000;
    std::uint64_t subsample_seed = 0;
    int threads = 1;
};

// Projection-averaged Kendall's tau: degree-4 U-statistic of
// (2 - (2/pi) Ang(X1-X2, X3-X4)) (2 - (2/pi) Ang(Y1-Y2, Y3-Y4)) - 1.
DepValue kendall_tau_proj(const PairedSample& s, const DepConfig& cfg = {});

// Projection-averaged BKR coefficient: degree-6 U-statistic of the three
// expected products of (1/2 - Ang/(2 pi)) factors.
DepValue bkr_proj(const PairedSample& s, const DepConfig& cfg = {});

// Multivariate tau*: degree-4 U-statistic built from h_d sums of g_d terms,
// with g_d the three-angle orthant form.
DepValue taustar_proj(const PairedSample& s, const DepConfig& cfg = {});

// g_d(U1, U2, U3) = 1/2 - (Ang(U1,U2) + Ang(U1,U3) + Ang(U2,U3)) / (4 pi);
// identical to orthant3 for usable vectors.
double g_d(const Eigen::Ref<const Vector>& u1, const Eigen::Ref<const Vector>& u2,
           const Eigen::Ref<const Vector>& u3, const AngleConfig& cfg = {});

// Independence test: the y rows are permuted against the x rows, p-value per
// the Monte-Carlo permutation formula. The subsampled tuple set (when active)
// is drawn once from the master seed and reused for every permutation.
PermResult indep_perm_test(const PairedSample& s, DepKind kind, const PermConfig& cfg,
                           const DepConfig& dep_cfg = {}, int threads = 0);

}  // namespace projcvm
