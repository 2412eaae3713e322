#include "psmcrb/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

#include "psmcrb/errors.hpp"

namespace psmcrb {

namespace {

constexpr double kWidth = 880.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 250.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                               "#ff7f0e", "#17becf", "#8c564b", "#000000",
                                               "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0;  // in transformed units
  double hi = 1.0;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values) {
    if (!a.usable(v)) continue;
    lo = std::min(lo, a.transform(v));
    hi = std::max(hi, a.transform(v));
  }
  if (!(lo <= hi)) throw DomainError("chart: no plottable points");
  if (hi - lo < 1e-12) {
    const double pad = log ? 0.5 : std::max(0.5, 0.1 * std::fabs(lo));
    lo -= pad;
    hi += pad;
  } else if (!log) {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    const int span = static_cast<int>(a.hi - a.lo);
    const int step = std::max(1, span / 10 + (span % 10 ? 1 : 0));
    for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += step) out.push_back(e);
    return out;
  }
  const double raw = (a.hi - a.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-9 * step; t += step)
    out.push_back(std::fabs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

}  // namespace

std::string render_svg(const ChartSpec& spec) {
  std::vector<double> xs, ys;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      xs.push_back(s.x[i]);
      ys.push_back(s.y[i]);
    }
  }
  const Axis ax = fit_axis(xs, spec.log_x);
  const Axis ay = fit_axis(ys, spec.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (ax.transform(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ay.transform(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(spec.title) + "</text>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
         num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (double t : ticks(ax)) {
    const double v = ax.log ? std::pow(10.0, t) : t;
    const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    out += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(kTop + ph) + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
           label(v) + "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double v = ay.log ? std::pow(10.0, t) : t;
    const double y = kTop + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
           num(y) + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + label(v) +
           "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + num(kTop + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    const std::string color = kPalette[si % kPalette.size()];
    const std::string dash = s.dashed ? " stroke-dasharray=\"6,4\"" : "";
    out += "<g class=\"series\" data-name=\"" + escape(s.name) + "\">\n";
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"" + dash +
               " points=\"" + points + "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += num(px(s.x[i])) + "," + num(py(s.y[i]));
      out += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"2\" fill=\"" +
             color + "\"/>\n";
    }
    flush();
    out += "</g>\n";

    const double ly = kTop + 10 + 20.0 * static_cast<double>(si);
    const double lx = kLeft + pw + 16;
    out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 28) + "\" y2=\"" +
           num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"1.8\"" + dash + "/>\n";
    out += "<text x=\"" + num(lx + 34) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

namespace {

std::map<double, const BoundsRow*> index_bounds(const std::vector<BoundsRow>& bounds) {
  std::map<double, const BoundsRow*> by_gamma;
  for (const auto& b : bounds) by_gamma[b.gamma_thr] = &b;
  return by_gamma;
}

template <class F>
Series bound_series(std::string name, const std::vector<SweepRow>& sweep,
                    const std::map<double, const BoundsRow*>& by_gamma, F value) {
  Series s;
  s.name = std::move(name);
  for (const auto& row : sweep) {
    const auto it = by_gamma.find(row.gamma_thr);
    s.x.push_back(row.gamma_thr);
    s.y.push_back(it == by_gamma.end() ? kNaN : value(*it->second));
  }
  return s;
}

const char* estimator_label(EstimatorTag e) {
  switch (e) {
    case EstimatorTag::MSL: return "MSL";
    case EstimatorTag::MSNL: return "MSNL";
    case EstimatorTag::PSML: return "PSML";
    case EstimatorTag::OracleML: return "oracle ML";
  }
  return "?";
}

const char* interpretation_label(std::size_t i) {
  static constexpr std::array<const char*, 3> labels{"PS-MCRB (naive)", "PS-MCRB (normalized)",
                                                     "PS-MCRB (selective)"};
  return labels[i];
}

template <class F>
ChartSpec chart(const std::string& title, const std::string& y_label, const std::vector<SweepRow>& sweep,
                bool log_y, F estimator_value) {
  if (sweep.empty()) throw DomainError("chart: no sweep rows");
  ChartSpec spec;
  spec.title = title;
  spec.x_label = "threshold gamma";
  spec.y_label = y_label;
  spec.log_x = true;
  spec.log_y = log_y;
  for (std::size_t e = 0; e < kEstimators.size(); ++e) {
    Series s;
    s.name = estimator_label(kEstimators[e]);
    s.dashed = true;
    for (const auto& row : sweep) {
      s.x.push_back(row.gamma_thr);
      s.y.push_back(estimator_value(row.est[e]));
    }
    spec.series.push_back(std::move(s));
  }
  return spec;
}

}  // namespace

ChartSpec mse_chart(const std::vector<SweepRow>& sweep, const std::vector<BoundsRow>& bounds,
                    bool log_y) {
  ChartSpec spec = chart("Trace MSE versus threshold", "trace MSE", sweep, log_y,
                         [](const EstimatorStats& s) { return s.mse_trace; });
  const auto by_gamma = index_bounds(bounds);
  for (std::size_t i = 0; i < 3; ++i)
    spec.series.push_back(bound_series(interpretation_label(i), sweep, by_gamma,
                                       [i](const BoundsRow& b) { return b.ps_mcrb_trace[i]; }));
  spec.series.push_back(bound_series("oracle CRB", sweep, by_gamma,
                                     [](const BoundsRow& b) { return b.oracle_crb_true_model_trace; }));
  spec.series.push_back(bound_series("conventional MCRB (wrong model)", sweep, by_gamma,
                                     [](const BoundsRow& b) { return b.anti_oracle_mcrb_trace; }));
  return spec;
}

ChartSpec bias_chart(const std::vector<SweepRow>& sweep, const std::vector<BoundsRow>& bounds,
                     bool log_y) {
  ChartSpec spec = chart("l1 bias versus threshold", "l1 norm of bias", sweep, log_y,
                         [](const EstimatorStats& s) { return s.bias_l1; });
  const auto by_gamma = index_bounds(bounds);
  static constexpr std::array<const char*, 3> labels{"pseudo-true bias (naive)",
                                                     "pseudo-true bias (normalized)",
                                                     "pseudo-true bias (selective)"};
  for (std::size_t i = 0; i < 3; ++i)
    spec.series.push_back(bound_series(labels[i], sweep, by_gamma,
                                       [i](const BoundsRow& b) { return b.ps_bias_l1[i]; }));
  spec.series.push_back(bound_series("conventional MCRB bias (wrong model)", sweep, by_gamma,
                                     [](const BoundsRow& b) { return b.anti_oracle_bias_l1; }));
  return spec;
}

}  // namespace psmcrb
