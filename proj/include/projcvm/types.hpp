#pragma once

#include <Eigen/Dense>

namespace projcvm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Observations are rows; row-major keeps per-observation access contiguous.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AngleConfig {
    // A vector is usable iff its norm exceeds norm_epsilon (scaled by the
    // data's magnitude where one is available; see scaled_epsilon).
    double norm_epsilon = 1e-12;
    // arccos arguments are always clamped to [-1, 1]; the flag is part of the
    // configuration surface but only `true` is supported.
    bool clamp = true;
};

inline double scaled_epsilon(const AngleConfig& cfg, double max_abs_entry) {
    return cfg.norm_epsilon * std::max(1.0, max_abs_entry);
}

}  // namespace projcvm
