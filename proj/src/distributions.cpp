#include "projcvm/distributions.hpp"

#include <cmath>

#include "projcvm/errors.hpp"

namespace projcvm {

const char* to_string(CovStructure s) {
    switch (s) {
        case CovStructure::Identity: return "identity";
        case CovStructure::Banded: return "banded";
        case CovStructure::Auto: return "auto";
        case CovStructure::Block: return "block";
        case CovStructure::Dense: return "dense";
    }
    return "?";
}

CovStructure cov_structure_from_string(const std::string& name) {
    if (name == "identity") return CovStructure::Identity;
    if (name == "banded") return CovStructure::Banded;
    if (name == "auto") return CovStructure::Auto;
    if (name == "block") return CovStructure::Block;
    if (name == "dense") return CovStructure::Dense;
    throw InvalidConfig("unknown covariance structure: " + name);
}

DistributionSpec mv_normal(double mean_fill, CovStructure cov) {
    DistributionSpec d;
    d.kind = DistributionSpec::Kind::MvNormal;
    d.mean_fill = mean_fill;
    d.cov = cov;
    return d;
}

DistributionSpec mv_normal(Vector mean, CovStructure cov) {
    DistributionSpec d;
    d.kind = DistributionSpec::Kind::MvNormal;
    d.mean = std::move(mean);
    d.cov = cov;
    return d;
}

DistributionSpec mv_cauchy(double gamma, double s) {
    DistributionSpec d;
    d.kind = DistributionSpec::Kind::MvCauchy;
    d.gamma = gamma;
    d.s = s;
    return d;
}

DistributionSpec mv_t(double mean_fill, double df, CovStructure cov, Matrix shape) {
    DistributionSpec d;
    d.kind = DistributionSpec::Kind::MvT;
    d.mean_fill = mean_fill;
    d.df = df;
    d.cov = cov;
    d.dense_cov = std::move(shape);
    return d;
}

DistributionSpec contaminated(DistributionSpec base, DistributionSpec contaminant, double eps) {
    DistributionSpec d;
    d.kind = DistributionSpec::Kind::Contaminated;
    d.base = std::make_shared<DistributionSpec>(std::move(base));
    d.contaminant = std::make_shared<DistributionSpec>(std::move(contaminant));
    d.eps = eps;
    return d;
}

Matrix covariance_matrix(CovStructure structure, Index d, const Matrix& dense) {
    switch (structure) {
        case CovStructure::Identity:
            return Matrix::Identity(d, d);
        case CovStructure::Banded: {
            Matrix s = Matrix::Identity(d, d);
            for (Index i = 0; i < d; ++i) {
                if (i + 1 < d) s(i, i + 1) = s(i + 1, i) = 0.6;
                if (i + 2 < d) s(i, i + 2) = s(i + 2, i) = 0.3;
            }
            return s;
        }
        case CovStructure::Auto: {
            Matrix s(d, d);
            for (Index i = 0; i < d; ++i) {
                for (Index j = 0; j < d; ++j) s(i, j) = std::pow(0.2, std::abs(static_cast<double>(i - j)));
            }
            return s;
        }
        case CovStructure::Block: {
            if (d % 5 != 0) throw BadStructure("block covariance needs 5 | d");
            Matrix s = Matrix::Zero(d, d);
            for (Index b = 0; b < d; b += 5) {
                for (Index i = 0; i < 5; ++i) {
                    for (Index j = 0; j < 5; ++j) s(b + i, b + j) = i == j ? 1.0 : 0.2;
                }
            }
            return s;
        }
        case CovStructure::Dense:
            if (dense.rows() != d || dense.cols() != d) throw BadStructure("dense covariance has wrong shape");
            return dense;
    }
    throw BadStructure("unknown covariance structure");
}

namespace {

// Per-call sampler state: resolved location and Cholesky factor.
struct RowSampler {
    const DistributionSpec* spec;
    Vector mean;
    Matrix chol;         // empty for identity covariance
    std::unique_ptr<RowSampler> base, contaminant;
    Vector z;            // scratch

    RowSampler(const DistributionSpec& d, Index dim) : spec(&d), z(dim) {
        using Kind = DistributionSpec::Kind;
        if (d.kind == Kind::Contaminated) {
            if (!d.base || !d.contaminant) throw InvalidConfig("contaminated: missing component");
            if (d.eps < 0.0 || d.eps >= 1.0) throw InvalidConfig("contaminated: eps must be in [0, 1)");
            base = std::make_unique<RowSampler>(*d.base, dim);
            contaminant = std::make_unique<RowSampler>(*d.contaminant, dim);
            return;
        }
        if (d.kind == Kind::MvCauchy) return;
        if (d.kind == Kind::MvT && d.df < 1.0) throw InvalidConfig("mv_t: df must be >= 1");
        if (d.mean) {
            if (d.mean->size() != dim) throw BadStructure("location vector has wrong dimension");
            mean = *d.mean;
        } else {
            mean = Vector::Constant(dim, d.mean_fill);
        }
        if (d.cov != CovStructure::Identity) {
            const Matrix cov = covariance_matrix(d.cov, dim, d.dense_cov);
            Eigen::LLT<Matrix> llt(cov);
            if (llt.info() != Eigen::Success) throw BadStructure("covariance is not positive definite");
            chol = llt.matrixL();
        }
    }

    void fill_row(Eigen::Ref<Eigen::RowVectorXd> row, RandomStream& rng) {
        using Kind = DistributionSpec::Kind;
        switch (spec->kind) {
            case Kind::MvNormal: {
                for (Index j = 0; j < z.size(); ++j) z(j) = rng.gaussian();
                if (chol.size() > 0) {
                    row = (mean + chol * z).transpose();
                } else {
                    row = (mean + z).transpose();
                }
                return;
            }
            case Kind::MvCauchy: {
                for (Index j = 0; j < z.size(); ++j) row(j) = rng.cauchy(spec->gamma, spec->s);
                return;
            }
            case Kind::MvT: {
                for (Index j = 0; j < z.size(); ++j) z(j) = rng.gaussian();
                const double w = rng.chi_squared(spec->df);
                const double scale = std::sqrt(spec->df / w);
                if (chol.size() > 0) {
                    row = (mean + scale * (chol * z)).transpose();
                } else {
                    row = (mean + scale * z).transpose();
                }
                return;
            }
            case Kind::Contaminated: {
                // eps = 0 never consumes contaminant randomness
                if (spec->eps > 0.0 && rng.uniform() < spec->eps) {
                    contaminant->fill_row(row, rng);
                } else {
                    base->fill_row(row, rng);
                }
                return;
            }
        }
        throw InvalidConfig("unknown distribution kind");
    }
};

}  // namespace

SampleMatrix sample(const DistributionSpec& dist, Index n, Index d, RandomStream& rng) {
    if (n < 1 || d < 1) throw InvalidConfig("sample: n and d must be positive");
    RowSampler sampler(dist, d);
    SampleMatrix out(n, d);
    for (Index i = 0; i < n; ++i) sampler.fill_row(out.row(i), rng);
    return out;
}

}  // namespace projcvm
