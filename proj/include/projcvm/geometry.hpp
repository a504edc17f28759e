#pragma once

#include <cmath>
#include <vector>

#include "projcvm/errors.hpp"
#include "projcvm/random.hpp"
#include "projcvm/types.hpp"

namespace projcvm {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct QuadratureConfig {
    int base_nodes = 64;
    int refined_nodes = 256;
    double tolerance = 1e-9;
    double gamma_floor = 1e-14;
};

namespace detail {

// acos with the clamped ends resolved exactly.
inline double angle_from_cosine(double c) {
    if (c >= 1.0) return 0.0;
    if (c <= -1.0) return kPi;
    return std::acos(c);
}

// Near-colinear angles through the normalized difference/sum, which stays
// accurate where acos loses half the digits. Exact-equal inputs give exactly
// 0 (or exactly pi for exact negation).
template <typename DU, typename DV>
double angle_near_colinear(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v,
                           double nu, double nv, double cosine) {
    if (cosine >= 0.0) {
        const double s = (u / nu - v / nv).norm() / 2.0;
        return 2.0 * std::asin(s < 1.0 ? s : 1.0);
    }
    const double s = (u / nu + v / nv).norm() / 2.0;
    return kPi - 2.0 * std::asin(s < 1.0 ? s : 1.0);
}

// |cos| above this goes through angle_near_colinear.
inline constexpr double kColinearCos = 0.99;

}  // namespace detail

// Ang(u, v) = arccos(u'v / (|u||v|)) in [0, pi]. In d = 1 the cosine is a
// sign, computed exactly.
template <typename DU, typename DV>
double angle(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v, const AngleConfig& cfg = {}) {
    static_assert(std::is_same_v<typename DU::Scalar, double> && std::is_same_v<typename DV::Scalar, double>);
    if (u.size() != v.size()) throw DimMismatch("angle: dimension mismatch");
    if (u.size() < 1) throw DimMismatch("angle: empty vector");
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu <= cfg.norm_epsilon || nv <= cfg.norm_epsilon) throw ZeroVector("angle: zero vector");
    if (u.size() == 1) return u(0) * v(0) > 0.0 ? 0.0 : kPi;
    double c = u.dot(v) / (nu * nv);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    if (std::abs(c) <= detail::kColinearCos) return std::acos(c);
    return detail::angle_near_colinear(u, v, nu, nv, c);
}

// Uniform-sphere mass of {b : b'u1 <= 0, b'u2 <= 0} = 1/2 - Ang(u1,u2)/(2*pi).
template <typename D1, typename D2>
double orthant2(const Eigen::MatrixBase<D1>& u1, const Eigen::MatrixBase<D2>& u2, const AngleConfig& cfg = {}) {
    const double p = 0.5 - angle(u1, u2, cfg) / (2.0 * kPi);
    return p < 0.0 ? 0.0 : (p > 0.5 ? 0.5 : p);
}

// Three indicators: 1/2 - (sum of the three pairwise angles)/(4*pi).
template <typename D1, typename D2, typename D3>
double orthant3(const Eigen::MatrixBase<D1>& u1, const Eigen::MatrixBase<D2>& u2,
                const Eigen::MatrixBase<D3>& u3, const AngleConfig& cfg = {}) {
    const double s = angle(u1, u2, cfg) + angle(u1, u3, cfg) + angle(u2, u3, cfg);
    const double p = 0.5 - s / (4.0 * kPi);
    return p < 0.0 ? 0.0 : (p > 0.5 ? 0.5 : p);
}

// Four indicators: 7/16 - (1/(8*pi)) * sum of pairwise angles + Q, with Q a
// single integral over [0,1] evaluated by Gauss-Legendre quadrature.
// Duplicated/antipodal directions are collapsed to the 3- or 2-vector form
// before quadrature.
double orthant4(const Eigen::Ref<const Vector>& u1, const Eigen::Ref<const Vector>& u2,
                const Eigen::Ref<const Vector>& u3, const Eigen::Ref<const Vector>& u4,
                const AngleConfig& cfg = {}, const QuadratureConfig& quad = {});

// n i.i.d. rows uniform on S^{d-1} (normalized standard Gaussians).
SampleMatrix sphere_sample(Index d, Index n, RandomStream& rng);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Monte-Carlo estimate of the sphere integral of prod_i 1(b'u_i <= 0), with
// binomial standard error. Brute-force oracle for the closed forms above.
McEstimate mc_orthant(const std::vector<Vector>& vectors, Index n_samples, RandomStream& rng,
                      const AngleConfig& cfg = {});

}  // namespace projcvm
