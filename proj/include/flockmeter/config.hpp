#pragma once

#include <filesystem>
#include <string>

#include "flockmeter/experiments.hpp"

namespace flockmeter::config {

/// Parses a config document. Recognised keys: dim, K, gamma, rate_table
/// ({"r": [...], "psi": [...]}), dt, T, J_list, J_inf, M, seed,
/// x_halfwidths, v_halfwidths, record_every. Halfwidths may be a number
/// (broadcast to every dimension) or an array. Missing keys keep their
/// defaults; unknown keys are rejected in strict mode. Throws ConfigError.
ExperimentConfig from_json_text(const std::string& text, bool strict = true);

/// Canonical serialization: every key, sorted, two-space indent.
std::string to_json_text(const ExperimentConfig& config);

ExperimentConfig load(const std::filesystem::path& path, bool strict = true);
void save(const ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace flockmeter::config
