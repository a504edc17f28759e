#pragma once

#include <memory>
#include <optional>
#include <string>

#include "projcvm/random.hpp"
#include "projcvm/types.hpp"

namespace projcvm {

enum class CovStructure { Identity, Banded, Auto, Block, Dense };

const char* to_string(CovStructure s);
CovStructure cov_structure_from_string(const std::string& name);

// Declarative sampler description. Contaminated nests two child specs and
// draws each row from the contaminant with probability eps.
struct DistributionSpec {
    enum class Kind { MvNormal, MvCauchy, MvT, Contaminated };
    Kind kind = Kind::MvNormal;

    double mean_fill = 0.0;         // constant location when `mean` is unset
    std::optional<Vector> mean;     // explicit location, must match d

    CovStructure cov = CovStructure::Identity;
    Matrix dense_cov;

    double gamma = 0.0;             // MvCauchy location
    double s = 1.0;                 // MvCauchy scale
    double df = 1.0;                // MvT degrees of freedom

    std::shared_ptr<const DistributionSpec> base, contaminant;
    double eps = 0.0;
};

DistributionSpec mv_normal(double mean_fill, CovStructure cov = CovStructure::Identity);
DistributionSpec mv_normal(Vector mean, CovStructure cov = CovStructure::Identity);
DistributionSpec mv_cauchy(double gamma, double s);
DistributionSpec mv_t(double mean_fill, double df, CovStructure cov = CovStructure::Identity,
                      Matrix shape = {});
DistributionSpec contaminated(DistributionSpec base, DistributionSpec contaminant, double eps);

// The structured covariance for dimension d. Block needs 5 | d.
Matrix covariance_matrix(CovStructure structure, Index d, const Matrix& dense = {});

// n rows from the spec in dimension d, deterministic given the stream.
SampleMatrix sample(const DistributionSpec& dist, Index n, Index d, RandomStream& rng);

}  // namespace projcvm
