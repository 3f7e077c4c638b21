#include "insideout/linalg.hpp"

#include <cmath>

namespace insideout {

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::exp(logits(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

int argmax_row(const Matrix& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best)) best = c;
  }
  return static_cast<int>(best);
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = argmax_row(m, r);
  return out;
}

}  // namespace insideout
