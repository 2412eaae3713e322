#include <doctest.h>

#include <cmath>
#include <limits>

#include "psmcrb/config.hpp"
#include "psmcrb/csv.hpp"
#include "psmcrb/errors.hpp"
#include "psmcrb/svg.hpp"

using namespace psmcrb;

namespace {

const char* kMinimal = R"({
  "H": [[1, 0], [0, 1], [1, 1]],
  "sigma2": 1.0,
  "hypothesis": "H2",
  "theta2": [0.5, -0.3, 1.2],
  "gamma_grid": [2.0],
  "trials": 1000,
  "seed": 42
})";

std::string failing_key(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(kMinimal);
  CHECK(c.H.rows() == 3);
  CHECK(c.true_hypothesis == Hypothesis::H2);
  CHECK(c.trials == 1000);
  CHECK(c.master_seed == 42);
  const auto back = parse_config(config_to_json(c));
  CHECK((back.H - c.H).norm() == 0.0);
  CHECK((back.theta2_true - c.theta2_true).norm() == 0.0);
  CHECK(back.gamma_grid == c.gamma_grid);
}

TEST_CASE("config errors name the key") {
  const std::string m = kMinimal;
  CHECK(failing_key(replace(m, "\"sigma2\": 1.0", "\"sigma2\": -1")) == "sigma2");
  CHECK(failing_key(replace(m, "\"sigma2\": 1.0", "\"sigma2\": \"one\"")) == "sigma2");
  CHECK(failing_key(replace(m, "\"H2\"", "\"H3\"")) == "hypothesis");
  CHECK(failing_key(replace(m, "[0.5, -0.3, 1.2]", "[0.5, -0.3]")) == "theta2");
  CHECK(failing_key(replace(m, "[2.0]", "[3.0, 2.0]")) == "gamma_grid");
  CHECK(failing_key(replace(m, "[2.0]", "[-1.0]")) == "gamma_grid");
  CHECK(failing_key(replace(m, "\"trials\": 1000", "\"trials\": 0")) == "trials");
  CHECK(failing_key(replace(m, "\"seed\": 42", "\"seed\": 42, \"colour\": 1")) == "colour");
  CHECK(failing_key(replace(m, "[[1, 0], [0, 1], [1, 1]]", "[[1, 2], [2, 4], [3, 6]]")) == "H");
  CHECK(failing_key(replace(m, "[[1, 0], [0, 1], [1, 1]]", "[[1, 0], [0]]")) == "H");
  CHECK(failing_key("{\"H\": [[1]],") == "<document>");
  CHECK(failing_key(replace(m, "\"theta2\": [0.5, -0.3, 1.2],", "")) == "theta2");
}

TEST_CASE("generate blocks and log ranges") {
  const auto c = parse_config(R"({
    "H": {"generate": {"seed": 2023, "N": 4, "M": 2}},
    "hypothesis": "H1",
    "theta1": {"generate": {"seed": 2024}},
    "gamma_grid": {"log_range": {"min": 1e-8, "max": 100, "count": 20}}
  })");
  CHECK((c.H - generate_channel(2023, 4, 2)).norm() == 0.0);
  CHECK((c.theta1_true - generate_gaussian_vector(2024, 2)).norm() == 0.0);
  CHECK(c.gamma_grid.size() == 20);
  const auto p = standard_config(Hypothesis::H1);
  CHECK((p.H - c.H).norm() == 0.0);
  CHECK(p.gamma_grid == c.gamma_grid);
}

TEST_CASE("threshold grid flag syntax") {
  CHECK(parse_gamma_grid_spec("1,2.5,10") == std::vector<double>{1, 2.5, 10});
  CHECK(parse_gamma_grid_spec("log:0.01:100:5").size() == 5);
  CHECK_THROWS_AS(parse_gamma_grid_spec("log:1:2"), ConfigError);
  CHECK_THROWS_AS(parse_gamma_grid_spec("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_gamma_grid_spec(""), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, 1.0, -2.5, 1e-300, 3.141592653589793, 1.0 / 3.0, 1e22, 4.9e-324}) {
    CHECK(parse_double_cell(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()).empty());
  CHECK(std::isnan(parse_double_cell("")));
  CHECK_THROWS_AS(parse_double_cell("1.2.3"), DomainError);
}

TEST_CASE("csv round trip") {
  ExperimentConfig c = parse_config(kMinimal);
  c.gamma_grid = {0.5, 2.0};
  c.trials = 300;
  const auto res = sweep(c);
  const auto text = sweep_csv(res.rows);
  CHECK(sweep_csv(parse_sweep_csv(text)) == text);
  std::vector<BoundsRow> br;
  for (const auto& b : res.bounds) br.push_back(summarize(b));
  const auto btext = bounds_csv(br);
  CHECK(bounds_csv(parse_bounds_csv(btext)) == btext);
  CHECK(text.substr(0, text.find('\n')).find("gamma,trials") == 0);
  CHECK_THROWS_AS(parse_sweep_csv("nonsense\n1\n"), DomainError);
  CHECK_THROWS_AS(parse_bounds_csv(btext.substr(0, btext.size() - 3) + ",,\n"), DomainError);
}

TEST_CASE("svg output") {
  ExperimentConfig c = parse_config(kMinimal);
  c.gamma_grid = {0.5, 2.0, 8.0};
  c.trials = 200;
  const auto res = sweep(c);
  std::vector<BoundsRow> br;
  for (const auto& b : res.bounds) br.push_back(summarize(b));
  const auto mse = mse_chart(res.rows, br, false);
  const auto bias = bias_chart(res.rows, br, true);
  CHECK(mse.series.size() == 9);
  CHECK(bias.series.size() == 8);
  const auto svg = render_svg(mse);
  CHECK(svg == render_svg(mse_chart(res.rows, br, false)));
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t groups = 0;
  for (auto pos = svg.find("class=\"series\""); pos != std::string::npos; pos = svg.find("class=\"series\"", pos + 1))
    ++groups;
  CHECK(groups == 9);

  ChartSpec single{"t", "x", "y", true, false, {Series{"one", {1.0}, {2.0}, false}}};
  CHECK_NOTHROW(render_svg(single));
  ChartSpec empty{"t", "x", "y", true, false, {Series{"none", {1.0}, {std::nan("")}, false}}};
  CHECK_THROWS_AS(render_svg(empty), DomainError);
}
