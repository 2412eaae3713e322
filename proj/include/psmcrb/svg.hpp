#pragma once

#include <string>
#include <vector>

#include "psmcrb/csv.hpp"

namespace psmcrb {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // NaN entries break the line
  bool dashed = false;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = false;
  std::vector<Series> series;
};

/// Static SVG line chart. Byte-identical output for identical input.
/// Throws DomainError when no series has a plottable point.
std::string render_svg(const ChartSpec& spec);

/// Trace MSE of the four estimators (dashed) against the three PS-MCRBs, the
/// true-model oracle CRB and the wrong-model conventional MCRB (solid).
ChartSpec mse_chart(const std::vector<SweepRow>& sweep, const std::vector<BoundsRow>& bounds,
                    bool log_y);

/// l1 bias of the four estimators (dashed) against the bias implied by the
/// three pseudo-true solutions and by the wrong-model conventional MCRB.
ChartSpec bias_chart(const std::vector<SweepRow>& sweep, const std::vector<BoundsRow>& bounds,
                     bool log_y);

}  // namespace psmcrb
