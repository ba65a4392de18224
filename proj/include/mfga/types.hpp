#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mfga {

/// Largest state dimension supported by the stack-allocated vector type.
inline constexpr int kMaxDim = 8;

/// Small dynamic-size vector; never heap-allocates for d <= kMaxDim.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::MatrixXd;

inline Vec zeros(int d) { return Vec::Zero(d); }

}  // namespace mfga
