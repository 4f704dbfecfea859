#include "psim/matrix.hpp"

#include <numeric>

namespace psim {

Matrix row_normalized(const Matrix& m) {
  Matrix out = m;
  for (int r = 0; r < m.rows(); ++r) {
    auto row = out.row(r);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("row_normalized: row sum must be positive");
    for (double& x : row) x /= total;
  }
  return out;
}

}  // namespace psim
