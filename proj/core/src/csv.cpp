#include "psim/csv.hpp"

#include <charconv>
#include <ostream>
#include <system_error>

namespace psim {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_curve_csv(std::ostream& os, const LearningCurve& curve) {
  const bool with_holdout = !curve.holdout_success.empty();
  os << "round,reward_rate";
  if (with_holdout) os << ",holdout_success";
  os << '\n';
  for (std::size_t k = 0; k < curve.rounds.size(); ++k) {
    os << curve.rounds[k] << ',' << format_double(curve.reward_rate[k]);
    if (with_holdout) os << ',' << format_double(curve.holdout_success[k]);
    os << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Matrix& m, const std::string& row_label,
                      const std::string& col_prefix) {
  os << row_label;
  for (int c = 0; c < m.cols(); ++c) os << ',' << col_prefix << c;
  os << '\n';
  for (int r = 0; r < m.rows(); ++r) {
    os << r;
    for (int c = 0; c < m.cols(); ++c) os << ',' << format_double(m(r, c));
    os << '\n';
  }
}

void write_matrix_csv_ordered(std::ostream& os, const Matrix& m, std::span<const int> row_order,
                              const std::string& row_label, const std::string& col_prefix) {
  os << row_label;
  for (int c = 0; c < m.cols(); ++c) os << ',' << col_prefix << c;
  os << '\n';
  for (int r : row_order) {
    os << r;
    for (int c = 0; c < m.cols(); ++c) os << ',' << format_double(m(r, c));
    os << '\n';
  }
}

}  // namespace psim
