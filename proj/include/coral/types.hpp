#pragma once

#include <vector>

#include <Eigen/Dense>

namespace coral {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Class labels, one non-negative id per example row.
using Labels = std::vector<int>;

}  // namespace coral
