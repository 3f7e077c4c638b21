#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace insideout {

/// Parameters, logits and probabilities (column-major).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Activation planes: one channel per row, pixels along the row.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Index of the row maximum; ties resolve to the lowest index.
int argmax_row(const Matrix& m, Eigen::Index row);

std::vector<int> argmax_rows(const Matrix& m);

}  // namespace insideout
