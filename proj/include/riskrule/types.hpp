#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace riskrule {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Binary decision vector; entry i is 0 or 1.
using Decision = std::vector<std::uint8_t>;

enum class RowSense { kLessEqual, kGreaterEqual, kEqual };

}  // namespace riskrule
