#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsqn/diagnostics.hpp"
#include "tsqn/simulation.hpp"

namespace tsqn {

inline constexpr int kConfigSchemaVersion = 1;

struct CiSettings {
  double alpha = 0.05;
  double tau = 0.1;
  Plugin plugin = Plugin::Estimate;
  /// Last step index of the finite-sample bound; defaults to trace size - 1.
  std::optional<std::size_t> N;
};

struct McSettings {
  std::size_t K = 2000;
  double alpha = 0.05;
  double t = 0.05;
  unsigned threads = 0;
};

/// Typed view of a JSON configuration document.
struct AppConfig {
  nlohmann::json document;
  std::string hash;  ///< FNV-1a over the canonical document without "seed"
  std::uint64_t seed = 0;
  EstimatorConfig estimator;
  std::optional<ScenarioConfig> scenario;
  CiSettings ci;
  McSettings mc;
};

/// Shortest round-trip text; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);
/// Inverse of format_double; throws Error(Parse) on anything else.
double parse_double(std::string_view text);

std::string config_hash(const nlohmann::json& document);

/// Throws Error(Schema) for structural problems, Error(Config) for invalid values.
AppConfig parse_config(const nlohmann::json& document);
AppConfig load_config(const std::string& path);

/// Dataset CSV: k, phi_0..phi_{m-1}, l, u, L, U, y. `dimension` < 0 accepts any m.
std::vector<ObservationRecord> read_dataset(std::istream& in, Eigen::Index dimension = -1);
std::vector<ObservationRecord> load_dataset(const std::string& path, Eigen::Index dimension = -1);
void write_dataset(const std::vector<ObservationRecord>& records, std::ostream& out);

/// Trace CSV, one row per step (state after the step). With `exact` every estimate also gets a hex column.
void write_trace(const RunTrace& trace, std::ostream& out, bool exact = false);

nlohmann::json to_json(const ConfidenceReport& report);
nlohmann::json to_json(const LyapunovConstants& constants);

struct AssumptionCheck {
  std::string name;
  bool pass = true;
  std::string message;
  nlohmann::json witness;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool pass() const;
};

/// Boundedness / membership, threshold ordering and the bound variables, and link-bound positivity.
ValidationReport validate_records(const std::vector<ObservationRecord>& records, const EstimatorConfig& config,
                                  const std::optional<Vector>& theta = std::nullopt);
nlohmann::json to_json(const ValidationReport& report);

/// Writes text to a file, throwing Error(Config) when it cannot be opened.
void write_text(const std::string& path, const std::string& text);

}  // namespace tsqn
