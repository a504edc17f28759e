#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "projcvm/distributions.hpp"
#include "projcvm/two_sample.hpp"
#include "projcvm/types.hpp"

namespace projcvm {

// One simulation scenario: a table cell of the power study.
struct ExperimentSpec {
    std::shared_ptr<const DistributionSpec> x_dist, y_dist;
    Index m = 0, n = 0, d = 0;
    int reps = 1;
    int n_perms = 200;  // B
    double alpha = 0.05;
    std::vector<StatKind> methods;
    std::uint64_t master_seed = 0;
};

struct MethodPower {
    StatKind method = StatKind::CvM;
    double rate = 0.0;
    double std_error = 0.0;   // sqrt(rate (1 - rate) / reps)
    double mean_ms = 0.0;     // mean wall time per test
};

struct PowerReport {
    ExperimentSpec spec;
    std::vector<MethodPower> methods;
};

// Every rep draws one dataset shared by all methods; one pooled Gram and one
// set of permutations serve every method, so adding a method never changes
// another method's p-values. Reps run on a worker pool; the rep substream
// derivation depends only on (master_seed, rep index).
PowerReport run_power(const ExperimentSpec& spec, int threads = 0);

nlohmann::json distribution_to_json(const DistributionSpec& d);
std::shared_ptr<const DistributionSpec> distribution_from_json(const nlohmann::json& j);

nlohmann::json experiment_to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_from_json(const nlohmann::json& j);

nlohmann::json power_report_to_json(const PowerReport& report);

}  // namespace projcvm
