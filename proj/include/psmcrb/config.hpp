#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psmcrb/linmodel.hpp"

namespace psmcrb {

/// Parses an experiment description. Recognized keys:
///
///   H           array of rows, or {"generate": {"seed": s, "N": n, "M": m}}
///   sigma2      positive number
///   hypothesis  "H1" or "H2"
///   theta1      array of length M, or {"generate": {"seed": s}} (required under H1)
///   theta2      array of length N, or {"generate": {"seed": s}} (required under H2)
///   gamma_grid  ascending array, or {"log_range": {"min": a, "max": b, "count": n}}
///   trials      positive integer (default 100000)
///   seed        unsigned 64-bit master seed (default 0)
///
/// Unknown keys are rejected. Every failure is a ConfigError naming the key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Serializes with explicit matrices and vectors (no generate blocks).
std::string config_to_json(const ExperimentConfig& config);

/// "log:MIN:MAX:COUNT" or a comma-separated list of thresholds.
std::vector<double> parse_gamma_grid_spec(const std::string& spec);

inline constexpr std::uint64_t kStandardChannelSeed = 2023;
inline constexpr std::uint64_t kStandardThetaSeed = 2024;
inline constexpr std::uint64_t kStandardMasterSeed = 1;

/// N = 4, M = 2, sigma2 = 1, standard-Gaussian H and true parameter drawn
/// once from fixed seeds, 20-point log grid on [1e-8, 100].
ExperimentConfig standard_config(Hypothesis truth, std::int64_t trials = 100000);

}  // namespace psmcrb
