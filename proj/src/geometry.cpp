#include "projcvm/geometry.hpp"

#include <algorithm>
#include <array>

namespace projcvm {

namespace {

struct GaussLegendre {
    std::vector<double> nodes;    // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

// Nodes/weights on [0,1] by Newton iteration on the Legendre recurrence.
GaussLegendre make_gl(int n) {
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = 0.5 * (1.0 - x);
        gl.weights[i] = 0.5 * w;
        gl.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        gl.weights[n - 1 - i] = 0.5 * w;
    }
    return gl;
}

const GaussLegendre& gl_table(int n) {
    static const GaussLegendre t64 = make_gl(64);
    static const GaussLegendre t256 = make_gl(256);
    static const GaussLegendre t1024 = make_gl(1024);
    if (n <= 64) return t64;
    if (n <= 256) return t256;
    return t1024;
}

// Integrand of Q for one node u, summed over the three corrected pairs
// (1,l), l = 2,3,4. rho is the 4x4 cosine matrix.
double q_integrand(const Matrix& rho, double u, double gamma_floor) {
    const double u2 = u * u;
    const double r12 = rho(0, 1), r13 = rho(0, 2), r14 = rho(0, 3);
    const double r23 = rho(1, 2), r24 = rho(1, 3), r34 = rho(2, 3);

    const double g12 = r34 - r23 * r24 - (r13 * r14 + r12 * (r12 * r34 - r14 * r23 - r13 * r24)) * u2;
    const double g13 = r24 - r23 * r34 - (r12 * r14 + r13 * (r13 * r24 - r14 * r23 - r12 * r34)) * u2;
    const double g14 = r23 - r24 * r34 - (r12 * r13 + r14 * (r14 * r23 - r13 * r24 - r12 * r34)) * u2;

    const double s123 = std::max(0.0, 1.0 - r23 * r23 - (r12 * r12 + r13 * r13 - 2.0 * r12 * r13 * r23) * u2);
    const double s124 = std::max(0.0, 1.0 - r24 * r24 - (r12 * r12 + r14 * r14 - 2.0 * r12 * r14 * r24) * u2);
    const double s134 = std::max(0.0, 1.0 - r34 * r34 - (r13 * r13 + r14 * r14 - 2.0 * r13 * r14 * r34) * u2);
    const double den123 = std::sqrt(s123);
    const double den124 = std::sqrt(s124);
    const double den134 = std::sqrt(s134);

    auto term = [&](double r1l, double num, double dA, double dB) {
        const double pref = r1l / std::sqrt(std::max(1.0 - r1l * r1l * u2, gamma_floor));
        double ratio = num / std::max(dA * dB, gamma_floor);
        if (ratio > 1.0) ratio = 1.0;
        if (ratio < -1.0) ratio = -1.0;
        return pref * std::asin(ratio);
    };
    return term(r12, g12, den123, den124) + term(r13, g13, den123, den134) + term(r14, g14, den124, den134);
}

double q_integral(const Matrix& rho, int n_nodes, double gamma_floor) {
    // Low-dimensional vector sets make the arcsin argument reach +-1 at u = 1
    // (the conditioned pair becomes deterministic), a square-root kink. The
    // cubic substitution u = 1 - (1 - s)^3 flattens it.
    const GaussLegendre& gl = gl_table(n_nodes);
    double total = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double s = gl.nodes[i];
        const double one_minus = 1.0 - s;
        const double u = 1.0 - one_minus * one_minus * one_minus;
        total += gl.weights[i] * 3.0 * one_minus * one_minus * q_integrand(rho, u, gamma_floor);
    }
    return total / (4.0 * kPi * kPi);
}

double clamp_unit(double c) { return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c); }

}  // namespace

double orthant4(const Eigen::Ref<const Vector>& u1, const Eigen::Ref<const Vector>& u2,
                const Eigen::Ref<const Vector>& u3, const Eigen::Ref<const Vector>& u4,
                const AngleConfig& cfg, const QuadratureConfig& quad) {
    std::array<const Eigen::Ref<const Vector>*, 4> u = {&u1, &u2, &u3, &u4};
    const Index d = u1.size();
    std::array<double, 4> norms{};
    for (int i = 0; i < 4; ++i) {
        if (u[i]->size() != d) throw DimMismatch("orthant4: dimension mismatch");
        norms[i] = u[i]->norm();
        if (norms[i] <= cfg.norm_epsilon) throw ZeroVector("orthant4: zero vector");
    }

    Matrix rho = Matrix::Identity(4, 4);
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            rho(i, j) = rho(j, i) = clamp_unit(u[i]->dot(*u[j]) / (norms[i] * norms[j]));
        }
    }

    // Degenerate pairs: antipodal directions empty the intersection; a
    // duplicated direction reduces to the three-vector formula.
    const double colinear = 1.0 - 1e-12;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            if (rho(i, j) <= -colinear) return 0.0;
            if (rho(i, j) >= colinear) {
                std::array<int, 3> keep{};
                int k = 0;
                for (int t = 0; t < 4; ++t) {
                    if (t != j) keep[k++] = t;
                }
                return orthant3(*u[keep[0]], *u[keep[1]], *u[keep[2]], cfg);
            }
        }
    }

    double ang_sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            ang_sum += angle(*u[i], *u[j], cfg);
        }
    }

    double q = q_integral(rho, quad.refined_nodes, quad.gamma_floor);
    const double q_base = q_integral(rho, quad.base_nodes, quad.gamma_floor);
    if (std::abs(q - q_base) > quad.tolerance) {
        const double q_fine = q_integral(rho, 1024, quad.gamma_floor);
        if (std::abs(q_fine - q) > quad.tolerance) {
            throw QuadratureFailure("orthant4: quadrature did not converge");
        }
        q = q_fine;
    }

    const double p = 7.0 / 16.0 - ang_sum / (8.0 * kPi) + q;
    return p < 0.0 ? 0.0 : (p > 0.5 ? 0.5 : p);
}

SampleMatrix sphere_sample(Index d, Index n, RandomStream& rng) {
    if (d < 1 || n < 1) throw InvalidConfig("sphere_sample: d and n must be positive");
    SampleMatrix out(n, d);
    for (Index i = 0; i < n; ++i) {
        double nrm = 0.0;
        do {
            for (Index j = 0; j < d; ++j) out(i, j) = rng.gaussian();
            nrm = out.row(i).norm();
        } while (nrm < 1e-100);
        out.row(i) /= nrm;
    }
    return out;
}

McEstimate mc_orthant(const std::vector<Vector>& vectors, Index n_samples, RandomStream& rng,
                      const AngleConfig& cfg) {
    if (vectors.empty()) throw InvalidConfig("mc_orthant: need at least one vector");
    if (n_samples < 100) throw InvalidConfig("mc_orthant: need at least 100 samples");
    const Index d = vectors.front().size();
    Matrix dirs(d, static_cast<Index>(vectors.size()));
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        if (vectors[k].size() != d) throw DimMismatch("mc_orthant: dimension mismatch");
        if (vectors[k].norm() <= cfg.norm_epsilon) throw ZeroVector("mc_orthant: zero vector");
        dirs.col(static_cast<Index>(k)) = vectors[k];
    }

    std::int64_t hits = 0;
    const Index chunk = 1 << 14;
    for (Index done = 0; done < n_samples; done += chunk) {
        const Index take = std::min(chunk, n_samples - done);
        const SampleMatrix b = sphere_sample(d, take, rng);
        const Matrix proj = b * dirs;  // take x K
        for (Index r = 0; r < take; ++r) {
            hits += (proj.row(r).array() <= 0.0).all() ? 1 : 0;
        }
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples))};
}

}  // namespace projcvm
