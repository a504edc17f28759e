#pragma once

#include <cmath>
#include <vector>

#include "projcvm/random.hpp"
#include "projcvm/types.hpp"

// Brute-force oracles computed straight from raw coordinates, independent of
// the library's Gram/grouping machinery.
namespace oracle {

using projcvm::Index;
using projcvm::Matrix;
using projcvm::RandomStream;
using projcvm::SampleMatrix;
using projcvm::Vector;

inline constexpr double pi = 3.141592653589793238462643383279502884;

inline SampleMatrix gaussian(Index n, Index d, RandomStream& rng) {
    SampleMatrix out(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) out(i, j) = rng.gaussian();
    }
    return out;
}

inline SampleMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const auto r = static_cast<Index>(rows.size());
    const auto c = static_cast<Index>(rows.begin()->size());
    SampleMatrix out(r, c);
    Index i = 0;
    for (const auto& row : rows) {
        Index j = 0;
        for (double v : row) out(i, j++) = v;
        ++i;
    }
    return out;
}

inline Vector vec(std::initializer_list<double> entries) {
    Vector v(static_cast<Index>(entries.size()));
    Index i = 0;
    for (double e : entries) v(i++) = e;
    return v;
}

inline Matrix random_orthogonal(Index d, RandomStream& rng) {
    Matrix a(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) a(i, j) = rng.gaussian();
    }
    return Eigen::HouseholderQR<Matrix>(a).householderQ();
}

inline double ang(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v) {
    if ((u - v).norm() == 0.0) return 0.0;
    if ((u + v).norm() == 0.0) return pi;
    double c = u.dot(v) / (u.norm() * v.norm());
    c = std::max(-1.0, std::min(1.0, c));
    return std::acos(c);
}

struct BruteStat {
    double value = 0.0;
    std::int64_t skipped = 0;
};

// Literal quadruple sum of the order-two kernel with tuple skipping.
inline BruteStat u_cvm(const SampleMatrix& x, const SampleMatrix& y, double eps = 0.0) {
    const Index m = x.rows(), n = y.rows();
    double sum = 0.0;
    std::int64_t used = 0, skipped = 0;
    for (Index i1 = 0; i1 < m; ++i1) {
        for (Index i2 = 0; i2 < m; ++i2) {
            if (i2 == i1) continue;
            for (Index j1 = 0; j1 < n; ++j1) {
                for (Index j2 = 0; j2 < n; ++j2) {
                    if (j2 == j1) continue;
                    const Eigen::RowVectorXd a = x.row(i1) - y.row(j1);
                    const Eigen::RowVectorXd b = x.row(i2) - y.row(j1);
                    const Eigen::RowVectorXd c = y.row(j2) - x.row(i1);
                    if (a.norm() <= eps || b.norm() <= eps || c.norm() <= eps) {
                        ++skipped;
                        continue;
                    }
                    sum += 1.0 / 3.0 - ang(a, b) / (2.0 * pi) - ang(-a, c) / (2.0 * pi);
                    ++used;
                }
            }
        }
    }
    return {sum / static_cast<double>(used), skipped};
}

inline double u_cq(const SampleMatrix& x, const SampleMatrix& y) {
    const Index m = x.rows(), n = y.rows();
    double sum = 0.0;
    for (Index i1 = 0; i1 < m; ++i1) {
        for (Index i2 = 0; i2 < m; ++i2) {
            if (i2 == i1) continue;
            for (Index j1 = 0; j1 < n; ++j1) {
                for (Index j2 = 0; j2 < n; ++j2) {
                    if (j2 == j1) continue;
                    sum += (x.row(i1) - y.row(j1)).dot(x.row(i2) - y.row(j2));
                }
            }
        }
    }
    return sum / (static_cast<double>(m) * (m - 1) * n * (n - 1));
}

inline BruteStat u_wmw(const SampleMatrix& x, const SampleMatrix& y, double eps = 0.0) {
    const Index m = x.rows(), n = y.rows();
    double sum = 0.0;
    std::int64_t used = 0, skipped = 0;
    for (Index i1 = 0; i1 < m; ++i1) {
        for (Index i2 = 0; i2 < m; ++i2) {
            if (i2 == i1) continue;
            for (Index j1 = 0; j1 < n; ++j1) {
                for (Index j2 = 0; j2 < n; ++j2) {
                    if (j2 == j1) continue;
                    const Eigen::RowVectorXd a = x.row(i1) - y.row(j1);
                    const Eigen::RowVectorXd b = x.row(i2) - y.row(j2);
                    if (a.norm() <= eps || b.norm() <= eps) {
                        ++skipped;
                        continue;
                    }
                    sum += a.dot(b) / (a.norm() * b.norm());
                    ++used;
                }
            }
        }
    }
    return {sum / static_cast<double>(used), skipped};
}

inline double u_energy(const SampleMatrix& x, const SampleMatrix& y) {
    const Index m = x.rows(), n = y.rows();
    double cross = 0.0, wx = 0.0, wy = 0.0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) cross += (x.row(i) - y.row(j)).norm();
    }
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            if (i != j) wx += (x.row(i) - x.row(j)).norm();
        }
    }
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) wy += (y.row(i) - y.row(j)).norm();
        }
    }
    return 2.0 * cross / (static_cast<double>(m) * n) - wx / (static_cast<double>(m) * (m - 1)) -
           wy / (static_cast<double>(n) * (n - 1));
}

inline double u_mmd(const SampleMatrix& x, const SampleMatrix& y, double bw2) {
    const Index m = x.rows(), n = y.rows();
    auto k = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
        return std::exp(-(a - b).squaredNorm() / (2.0 * bw2));
    };
    double wx = 0.0, wy = 0.0, cross = 0.0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            if (i != j) wx += k(x.row(i), x.row(j));
        }
    }
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) wy += k(y.row(i), y.row(j));
        }
    }
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) cross += k(x.row(i), y.row(j));
    }
    return wx / (static_cast<double>(m) * (m - 1)) + wy / (static_cast<double>(n) * (n - 1)) -
           2.0 * cross / (static_cast<double>(m) * n);
}

// sign(|z1-z2| + |z3-z4| - |z1-z3| - |z2-z4|). The argument is identically
// zero on whole order patterns, so rounding noise must not decide the sign.
inline double a_sign(double z1, double z2, double z3, double z4) {
    const double t1 = std::abs(z1 - z2) + std::abs(z3 - z4);
    const double t2 = std::abs(z1 - z3) + std::abs(z2 - z4);
    const double v = t1 - t2;
    if (std::abs(v) <= 1e-12 * (t1 + t2)) return 0.0;
    return v > 0.0 ? 1.0 : -1.0;
}

}  // namespace oracle
