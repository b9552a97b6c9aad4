#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

#include "tsqn/estimator.hpp"

namespace tsqn {

/// Hexadecimal float text (std::to_chars hex form); exact for every finite double.
std::string hex_encode(double v);
double hex_decode(std::string_view text);

/// Estimator state as JSON: dense row-major matrices of hex floats, step counter, config hash.
nlohmann::json save_checkpoint(const TsqnEstimator& estimator, const std::string& config_hash);

/// Restores a checkpoint into an estimator built from the same config.
/// Throws Error(Schema) on format problems, Error(Config) on a config-hash mismatch.
void load_checkpoint(TsqnEstimator& estimator, const nlohmann::json& doc, const std::string& config_hash);

}  // namespace tsqn
