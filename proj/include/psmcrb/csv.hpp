#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "psmcrb/montecarlo.hpp"

namespace psmcrb {

/// Flat, serializable view of a BoundReport (traces only).
struct BoundsRow {
  double gamma_thr = 0.0;
  double p1 = kNaN;
  double p2 = kNaN;
  std::int64_t branch1_vanished = 0;
  std::int64_t branch2_vanished = 0;
  std::array<double, 3> ps_mcrb_trace{kNaN, kNaN, kNaN};
  std::array<double, 3> ps_bias_l1{kNaN, kNaN, kNaN};
  std::array<std::array<double, 2>, 3> mcrb_k_trace{};
  double oracle_crb_trace = kNaN;
  double oracle_crb_true_model_trace = kNaN;
  double conventional_mcrb1_trace = kNaN;
  double conventional_mcrb2_trace = kNaN;
  double anti_oracle_mcrb_trace = kNaN;
  double anti_oracle_bias_l1 = kNaN;
};

BoundsRow summarize(const BoundReport& report);

/// Shortest decimal that parses back to the same double; NaN is an empty cell.
std::string format_double(double v);
/// Inverse of format_double. Throws DomainError on malformed text.
double parse_double_cell(std::string_view text);

/// Column order is fixed; see README for the meaning of each column.
std::vector<std::string> sweep_columns();
std::vector<std::string> bounds_columns();

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string bounds_csv(const std::vector<BoundsRow>& rows);

/// Throw DomainError on a header mismatch, a wrong cell count or a bad number.
std::vector<SweepRow> parse_sweep_csv(const std::string& text);
std::vector<BoundsRow> parse_bounds_csv(const std::string& text);

}  // namespace psmcrb
