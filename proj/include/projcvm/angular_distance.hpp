#pragma once

#include <vector>

#include "projcvm/geometry.hpp"
#include "projcvm/types.hpp"

namespace projcvm {

// Empirical stand-in for Z* ~ (1/2) P_X + (1/2) P_Y. With split > 0 the first
// `split` rows and the remaining rows are averaged separately and the two
// part-averages are averaged, which pins the mixture at (1/2, 1/2) whatever
// the part sizes are.
struct AngularDistanceCtx {
    SampleMatrix reference;
    Index split = 0;  // 0 = single equally-weighted block
    AngleConfig cfg;
};

AngularDistanceCtx make_pooled_ctx(const SampleMatrix& x, const SampleMatrix& y, const AngleConfig& cfg = {});

// (1/pi) Ang(z - w, z' - w).
double rho_angle_point(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& zp,
                       const Eigen::Ref<const Vector>& w, const AngleConfig& cfg = {});

// Empirical angular distance: the scaled angle at z and z' averaged over the
// reference rows; rows coinciding with z or z' are skipped and counted.
double rho_angle(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& zp,
                 const AngularDistanceCtx& ctx, Index* skipped = nullptr);

// sum_ij a_i a_j rho(z_i, z_j) for weights summing to zero; always <= 0 for a
// metric of negative type.
double negative_type_form(const std::vector<Vector>& points, const std::vector<double>& weights,
                          const AngularDistanceCtx& ctx);

// Plug-in of 2 W_d^2 = 2 E rho(X, Y) - E rho(X, X') - E rho(Y, Y') over
// distinct pairs, divided by two; an estimate of W_d^2.
double generalized_energy_from_rho(const SampleMatrix& x, const SampleMatrix& y,
                                   const AngularDistanceCtx& ctx, int threads = 0);

}  // namespace projcvm
