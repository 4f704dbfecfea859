#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "psim/matrix.hpp"
#include "psim/training.hpp"

namespace psim {

/// Shortest decimal form that round-trips the exact double. Locale-free and
/// deterministic, so emitted files are byte-stable across runs.
std::string format_double(double v);

/// Columns: round,reward_rate[,holdout_success]. Header always present.
void write_curve_csv(std::ostream& os, const LearningCurve& curve);

/// Generic labeled matrix: header `rowlabel,colprefix0,...`, one row per line.
void write_matrix_csv(std::ostream& os, const Matrix& m, const std::string& row_label,
                      const std::string& col_prefix);

/// Matrix with explicit row order (used for display-sorted h-matrices).
void write_matrix_csv_ordered(std::ostream& os, const Matrix& m, std::span<const int> row_order,
                              const std::string& row_label, const std::string& col_prefix);

}  // namespace psim
