#include "psmcrb/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "psmcrb/errors.hpp"

namespace psmcrb {

namespace {

using nlohmann::json;

double number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, key + " must be a number");
  return j.get<double>();
}

std::uint64_t unsigned_integer(const json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(key, key + " must be a nonnegative integer");
  return j.get<std::uint64_t>();
}

const json& member(const json& obj, const std::string& name, const std::string& key) {
  if (!obj.is_object() || !obj.contains(name)) throw ConfigError(key, key + " is missing \"" + name + "\"");
  return obj.at(name);
}

Vec vector_from(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, key + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], key);
  return v;
}

Vec theta_from(const json& j, const std::string& key, Eigen::Index n) {
  if (j.is_object()) {
    const json& gen = member(j, "generate", key);
    return generate_gaussian_vector(unsigned_integer(member(gen, "seed", key), key), n);
  }
  return vector_from(j, key);
}

Mat channel_from(const json& j) {
  const std::string key = "H";
  if (j.is_object()) {
    const json& gen = member(j, "generate", key);
    const auto seed = unsigned_integer(member(gen, "seed", key), key);
    const auto N = static_cast<Eigen::Index>(unsigned_integer(member(gen, "N", key), key));
    const auto M = static_cast<Eigen::Index>(unsigned_integer(member(gen, "M", key), key));
    try {
      return generate_channel(seed, N, M);
    } catch (const DomainError& e) {
      throw ConfigError(key, e.what());
    }
  }
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(key, "H must be an array of rows or a generate block");
  const std::size_t cols = j[0].size();
  Mat H(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(key, "H rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = number(j[i][c], key);
  }
  return H;
}

std::vector<double> grid_from(const json& j) {
  const std::string key = "gamma_grid";
  if (j.is_object()) {
    const json& lr = member(j, "log_range", key);
    const double lo = number(member(lr, "min", key), key);
    const double hi = number(member(lr, "max", key), key);
    const auto count = unsigned_integer(member(lr, "count", key), key);
    try {
      return log_grid(lo, hi, static_cast<int>(count));
    } catch (const DomainError& e) {
      throw ConfigError(key, e.what());
    }
  }
  if (!j.is_array()) throw ConfigError(key, "gamma_grid must be an array or a log_range block");
  std::vector<double> grid;
  for (const auto& v : j) grid.push_back(number(v, key));
  return grid;
}

double parse_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError(key, "not a number: '" + text + "'");
  return v;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "config must be a JSON object");

  static const std::set<std::string> known{"H",      "sigma2",     "hypothesis", "theta1",
                                           "theta2", "gamma_grid", "trials",     "seed"};
  for (const auto& item : doc.items())
    if (!known.count(item.key())) throw ConfigError(item.key(), "unknown key " + item.key());

  ExperimentConfig cfg;
  if (!doc.contains("H")) throw ConfigError("H", "H is required");
  cfg.H = channel_from(doc["H"]);

  if (doc.contains("sigma2")) cfg.sigma2 = number(doc["sigma2"], "sigma2");

  if (!doc.contains("hypothesis")) throw ConfigError("hypothesis", "hypothesis is required");
  const json& hyp = doc["hypothesis"];
  if (hyp == "H1") {
    cfg.true_hypothesis = Hypothesis::H1;
  } else if (hyp == "H2") {
    cfg.true_hypothesis = Hypothesis::H2;
  } else {
    throw ConfigError("hypothesis", "hypothesis must be \"H1\" or \"H2\"");
  }

  if (doc.contains("theta1")) cfg.theta1_true = theta_from(doc["theta1"], "theta1", cfg.H.cols());
  if (doc.contains("theta2")) cfg.theta2_true = theta_from(doc["theta2"], "theta2", cfg.H.rows());
  if (cfg.true_hypothesis == Hypothesis::H1 && !doc.contains("theta1"))
    throw ConfigError("theta1", "theta1 is required under H1");
  if (cfg.true_hypothesis == Hypothesis::H2 && !doc.contains("theta2"))
    throw ConfigError("theta2", "theta2 is required under H2");

  if (!doc.contains("gamma_grid")) throw ConfigError("gamma_grid", "gamma_grid is required");
  cfg.gamma_grid = grid_from(doc["gamma_grid"]);

  if (doc.contains("trials")) {
    const json& t = doc["trials"];
    if (!t.is_number_integer() || t.get<std::int64_t>() < 1)
      throw ConfigError("trials", "trials must be a positive integer");
    cfg.trials = t.get<std::int64_t>();
  }
  if (doc.contains("seed")) cfg.master_seed = unsigned_integer(doc["seed"], "seed");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json doc;
  json H = json::array();
  for (Eigen::Index i = 0; i < cfg.H.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < cfg.H.cols(); ++c) row.push_back(cfg.H(i, c));
    H.push_back(row);
  }
  doc["H"] = H;
  doc["sigma2"] = cfg.sigma2;
  doc["hypothesis"] = to_string(cfg.true_hypothesis);
  auto vec = [](const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  if (cfg.theta1_true.size() > 0) doc["theta1"] = vec(cfg.theta1_true);
  if (cfg.theta2_true.size() > 0) doc["theta2"] = vec(cfg.theta2_true);
  doc["gamma_grid"] = cfg.gamma_grid;
  doc["trials"] = cfg.trials;
  doc["seed"] = cfg.master_seed;
  return doc.dump(2);
}

std::vector<double> parse_gamma_grid_spec(const std::string& spec) {
  const std::string key = "--gamma-grid";
  if (spec.rfind("log:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(4));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError(key, "expected log:MIN:MAX:COUNT");
    const double count = parse_double(parts[2], key);
    if (count < 1 || count != static_cast<int>(count)) throw ConfigError(key, "COUNT must be a positive integer");
    try {
      return log_grid(parse_double(parts[0], key), parse_double(parts[1], key), static_cast<int>(count));
    } catch (const DomainError& e) {
      throw ConfigError(key, e.what());
    }
  }
  std::vector<double> grid;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) grid.push_back(parse_double(p, key));
  if (grid.empty()) throw ConfigError(key, "empty threshold list");
  return grid;
}

ExperimentConfig standard_config(Hypothesis truth, std::int64_t trials) {
  ExperimentConfig cfg;
  cfg.H = generate_channel(kStandardChannelSeed, 4, 2);
  cfg.sigma2 = 1.0;
  cfg.true_hypothesis = truth;
  cfg.theta1_true = generate_gaussian_vector(kStandardThetaSeed, 2);
  cfg.theta2_true = generate_gaussian_vector(kStandardThetaSeed, 4);
  cfg.gamma_grid = log_grid(1e-8, 100.0, 20);
  cfg.trials = trials;
  cfg.master_seed = kStandardMasterSeed;
  cfg.validate();
  return cfg;
}

}  // namespace psmcrb
