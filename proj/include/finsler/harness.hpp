#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "finsler/geometry.hpp"
#include "finsler/metric_defs.hpp"

namespace finsler {

/// Malformed or inconsistent verification config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the regularity gate rejects every candidate point.
class SamplingError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct Tolerances {
  double algebra = 1e-12;     // exact algebra on computed tensors
  double closure = 1e-9;      // inverse closure and linear-algebra identities
  double jet = 1e-7;          // closed form against differentiation of L_bar
  double connection = 1e-6;   // assembled connections against the direct path
  double fd = 1e-5;           // finite-difference oracles
};

struct SamplingConfig {
  int count = 50;
  std::uint64_t seed = 1;
  std::vector<std::pair<double, double>> box;  // one interval per coordinate
  int rejection_limit = 0;                     // 0 means 100 * count
};

inline const std::vector<std::string>& all_suites() {
  static const std::vector<std::string> names{"fundamentals", "change",  "inverse",    "connection",
                                              "theorems",     "remarks", "defect_scan"};
  return names;
}

struct VerificationConfig {
  ParsedSpec spec;
  SamplingConfig sampling;
  Tolerances tolerances;
  std::vector<std::string> suites = all_suites();
  std::vector<double> defect_ladder{1.0, 0.5, 0.25, 0.125};
};

VerificationConfig parse_config(std::string_view text);
VerificationConfig load_config(const std::string& path);
/// Comma-separated suite names, validated.
std::vector<std::string> parse_suite_list(std::string_view text);
std::vector<double> parse_number_list(std::string_view text);

enum class Status { pass, fail, discrepancy, info, skipped };
std::string_view to_string(Status s);

/// One formula or identity checked over the accepted samples.
struct CheckRecord {
  std::string name;
  std::string level;  // tolerance level name
  double tolerance = 0.0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  int samples = 0;
  Status status = Status::pass;
  std::vector<double> worst_x, worst_y;
  std::string note;
};

struct SuiteResult {
  std::string name;
  Status status = Status::pass;
  std::vector<CheckRecord> checks;
  nlohmann::json extra;  // suite-specific tables
};

struct Finding {
  std::string check;
  std::string message;
};

struct SamplingStats {
  int requested = 0;
  int accepted = 0;
  int attempts = 0;
  int rejected_regularity = 0;
  int rejected_singular = 0;
  int rejected_domain = 0;
  double acceptance_rate() const { return attempts ? static_cast<double>(accepted) / attempts : 0.0; }
};

struct VerificationReport {
  static constexpr int schema_version = 1;
  nlohmann::json config;
  SamplingStats sampling;
  std::vector<SuiteResult> suites;
  std::vector<Finding> findings;
  double wall_time_s = 0.0;

  Status status() const;
  int exit_code() const { return status() == Status::fail ? 1 : 0; }
};

/// Accepted points under the regularity gate, in draw order.
struct SampleSet {
  std::vector<FiberPoint> points;
  std::vector<ChangeGeometry> geometry;
  SamplingStats stats;
};

/// x uniform in the box, y uniform on the unit sphere, accepted when the
/// change is regular at the point for every h-vector in `h_family`.
SampleSet draw_samples(const ScalarField& L, const std::vector<HVectorSpec>& h_family, const SamplingConfig& cfg,
                       const GeometryOptions& options = {});

VerificationReport run_verify(const VerificationConfig& config);

struct DefectScanRow {
  double scale = 0.0;
  double max_defect = 0.0;
  double max_discrepancy = 0.0;
  double mean_discrepancy = 0.0;
};

struct DefectScanReport {
  std::vector<DefectScanRow> rows;  // in ladder order
  double slope = 0.0;               // log-log fit of discrepancy against defect
  bool slope_defined = false;
  bool monotone = true;             // discrepancy non-increasing as the scale shrinks
  double worst_increase = 0.0;
  SamplingStats sampling;
};

DefectScanReport run_defect_scan(const VerificationConfig& config, std::vector<double> ladder);

nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const DefectScanReport& report);
/// JSON text with every floating-point number written with 17 significant digits.
std::string format_json(const nlohmann::json& j, int indent = 2);
std::string format_table(const VerificationReport& report);
std::string format_table(const DefectScanReport& report);

/// Named quantity at one point, as nested arrays.
nlohmann::json named_quantity(const ChangeGeometry& g, const std::string& name);
const std::vector<std::string>& quantity_names();

}  // namespace finsler
