#include "psmcrb/csv.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "psmcrb/errors.hpp"

namespace psmcrb {

namespace {

template <class Row>
struct Column {
  std::string name;
  std::function<std::string(const Row&)> get;
  std::function<void(Row&, std::string_view)> set;
};

std::int64_t parse_int_cell(std::string_view text) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw DomainError("csv: not an integer: '" + std::string(text) + "'");
  return v;
}

template <class Row, class F>
Column<Row> dcol(std::string name, F field) {
  return {std::move(name), [field](const Row& r) { return format_double(field(r)); },
          [field](Row& r, std::string_view s) { field(r) = parse_double_cell(s); }};
}

template <class Row, class F>
Column<Row> icol(std::string name, F field) {
  return {std::move(name), [field](const Row& r) { return std::to_string(field(r)); },
          [field](Row& r, std::string_view s) { field(r) = parse_int_cell(s); }};
}

const char* interp_suffix(std::size_t i) { return to_string(kInterpretations[i]); }

template <class Row>
void add_bound_columns(std::vector<Column<Row>>& cols) {
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string s = interp_suffix(i);
    cols.push_back(dcol<Row>("ps_mcrb_trace_" + s, [i](auto& r) -> auto& { return r.ps_mcrb_trace[i]; }));
    cols.push_back(dcol<Row>("ps_bias_l1_" + s, [i](auto& r) -> auto& { return r.ps_bias_l1[i]; }));
    cols.push_back(dcol<Row>("mcrb_k1_trace_" + s, [i](auto& r) -> auto& { return r.mcrb_k_trace[i][0]; }));
    cols.push_back(dcol<Row>("mcrb_k2_trace_" + s, [i](auto& r) -> auto& { return r.mcrb_k_trace[i][1]; }));
  }
  cols.push_back(dcol<Row>("oracle_crb_trace", [](auto& r) -> auto& { return r.oracle_crb_trace; }));
  cols.push_back(dcol<Row>("oracle_crb_true_model_trace",
                           [](auto& r) -> auto& { return r.oracle_crb_true_model_trace; }));
  cols.push_back(dcol<Row>("conventional_mcrb1_trace",
                           [](auto& r) -> auto& { return r.conventional_mcrb1_trace; }));
  cols.push_back(dcol<Row>("conventional_mcrb2_trace",
                           [](auto& r) -> auto& { return r.conventional_mcrb2_trace; }));
  cols.push_back(dcol<Row>("anti_oracle_mcrb_trace", [](auto& r) -> auto& { return r.anti_oracle_mcrb_trace; }));
  cols.push_back(dcol<Row>("anti_oracle_bias_l1", [](auto& r) -> auto& { return r.anti_oracle_bias_l1; }));
}

const std::vector<Column<SweepRow>>& sweep_table() {
  static const std::vector<Column<SweepRow>> table = [] {
    std::vector<Column<SweepRow>> c;
    c.push_back(dcol<SweepRow>("gamma", [](auto& r) -> auto& { return r.gamma_thr; }));
    c.push_back(icol<SweepRow>("trials", [](auto& r) -> auto& { return r.trials; }));
    c.push_back(icol<SweepRow>("failures", [](auto& r) -> auto& { return r.failures; }));
    c.push_back(icol<SweepRow>("count_k1", [](auto& r) -> auto& { return r.count_k1; }));
    c.push_back(dcol<SweepRow>("empirical_p1", [](auto& r) -> auto& { return r.empirical_p1; }));
    c.push_back(dcol<SweepRow>("p1", [](auto& r) -> auto& { return r.p1; }));
    for (std::size_t e = 0; e < kEstimators.size(); ++e) {
      const std::string p = std::string(to_string(kEstimators[e])) + "_";
      c.push_back(dcol<SweepRow>(p + "mse_trace", [e](auto& r) -> auto& { return r.est[e].mse_trace; }));
      c.push_back(dcol<SweepRow>(p + "mse_trace_se", [e](auto& r) -> auto& { return r.est[e].mse_trace_se; }));
      c.push_back(dcol<SweepRow>(p + "bias_l1", [e](auto& r) -> auto& { return r.est[e].bias_l1; }));
      c.push_back(dcol<SweepRow>(p + "bias_l1_se", [e](auto& r) -> auto& { return r.est[e].bias_l1_se; }));
      for (std::size_t k = 0; k < 2; ++k) {
        const std::string kk = "k" + std::to_string(k + 1);
        c.push_back(dcol<SweepRow>(p + "cond_mse_" + kk,
                                   [e, k](auto& r) -> auto& { return r.est[e].cond_mse_trace[k]; }));
        c.push_back(dcol<SweepRow>(p + "cond_mse_" + kk + "_se",
                                   [e, k](auto& r) -> auto& { return r.est[e].cond_mse_trace_se[k]; }));
        c.push_back(dcol<SweepRow>(p + "cond_mse_phi_" + kk,
                                   [e, k](auto& r) -> auto& { return r.est[e].cond_mse_phi_trace[k]; }));
      }
    }
    add_bound_columns(c);
    return c;
  }();
  return table;
}

const std::vector<Column<BoundsRow>>& bounds_table() {
  static const std::vector<Column<BoundsRow>> table = [] {
    std::vector<Column<BoundsRow>> c;
    c.push_back(dcol<BoundsRow>("gamma", [](auto& r) -> auto& { return r.gamma_thr; }));
    c.push_back(dcol<BoundsRow>("p1", [](auto& r) -> auto& { return r.p1; }));
    c.push_back(dcol<BoundsRow>("p2", [](auto& r) -> auto& { return r.p2; }));
    c.push_back(icol<BoundsRow>("branch1_vanished", [](auto& r) -> auto& { return r.branch1_vanished; }));
    c.push_back(icol<BoundsRow>("branch2_vanished", [](auto& r) -> auto& { return r.branch2_vanished; }));
    add_bound_columns(c);
    return c;
  }();
  return table;
}

template <class Row>
std::vector<std::string> names(const std::vector<Column<Row>>& table) {
  std::vector<std::string> out;
  for (const auto& c : table) out.push_back(c.name);
  return out;
}

template <class Row>
std::string emit(const std::vector<Column<Row>>& table, const std::vector<Row>& rows) {
  std::string out;
  for (std::size_t i = 0; i < table.size(); ++i) out += (i ? "," : "") + table[i].name;
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (i) out += ',';
      out += table[i].get(row);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

template <class Row>
std::vector<Row> parse(const std::vector<Column<Row>>& table, const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw DomainError("csv: empty input");
  const auto header = split(lines[0]);
  if (header.size() != table.size()) throw DomainError("csv: header has the wrong number of columns");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (header[i] != table[i].name)
      throw DomainError("csv: expected column '" + table[i].name + "', found '" + std::string(header[i]) + "'");
  }
  std::vector<Row> rows;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split(lines[l]);
    if (cells.size() != table.size())
      throw DomainError("csv: line " + std::to_string(l + 1) + " has the wrong number of cells");
    Row row;
    for (std::size_t i = 0; i < table.size(); ++i) table[i].set(row, cells[i]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

BoundsRow summarize(const BoundReport& rep) {
  BoundsRow row;
  row.gamma_thr = rep.gamma_thr;
  row.p1 = rep.p1;
  row.p2 = rep.p2;
  row.branch1_vanished = rep.per[0].branch_vanished[0] ? 1 : 0;
  row.branch2_vanished = rep.per[0].branch_vanished[1] ? 1 : 0;
  for (std::size_t i = 0; i < 3; ++i) {
    row.ps_mcrb_trace[i] = rep.per[i].trace;
    row.ps_bias_l1[i] = rep.per[i].bias_l1;
    for (std::size_t k = 0; k < 2; ++k)
      row.mcrb_k_trace[i][k] = rep.per[i].branch_vanished[k] ? kNaN : rep.per[i].mcrb[k].trace();
  }
  row.oracle_crb_trace = rep.oracle_crb_trace;
  row.oracle_crb_true_model_trace = rep.oracle_crb_true_model_trace;
  row.conventional_mcrb1_trace = rep.conventional_mcrb1_trace;
  row.conventional_mcrb2_trace = rep.conventional_mcrb2_trace;
  row.anti_oracle_mcrb_trace = rep.anti_oracle_mcrb_trace;
  row.anti_oracle_bias_l1 = rep.anti_oracle_bias_l1;
  return row;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double_cell(std::string_view text) {
  if (text.empty()) return kNaN;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw DomainError("csv: not a number: '" + std::string(text) + "'");
  return v;
}

std::vector<std::string> sweep_columns() { return names(sweep_table()); }
std::vector<std::string> bounds_columns() { return names(bounds_table()); }

std::string sweep_csv(const std::vector<SweepRow>& rows) { return emit(sweep_table(), rows); }
std::string bounds_csv(const std::vector<BoundsRow>& rows) { return emit(bounds_table(), rows); }

std::vector<SweepRow> parse_sweep_csv(const std::string& text) { return parse(sweep_table(), text); }
std::vector<BoundsRow> parse_bounds_csv(const std::string& text) { return parse(bounds_table(), text); }

}  // namespace psmcrb
