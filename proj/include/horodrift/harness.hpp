#ifndef HORODRIFT_HARNESS_HPP
#define HORODRIFT_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "horodrift/estimators.hpp"
#include "horodrift/geometry.hpp"

namespace horodrift::harness {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  std::string space;       // space id or group id
  std::string quantity;    // drift|entropy|lm_km|volume_entropy|lambda|cesaro|group_report|check
  double T = 50.0;
  double dt = 0.01;
  std::int64_t paths = 10000;
  std::uint64_t seed = 0;
  std::string horofunction;  // optional spec string
  std::string out;           // store path (optional)
  std::string format = "json";
  int threads = 0;

  /// Flat `key = value` grammar, `#` comments; unknown keys rejected with the
  /// line number.
  static ExperimentConfig parse(std::string_view text);
  void validate() const;

  /// Canonical semantic echo (sorted keys; excludes out/format/threads, which
  /// don't affect results).
  nlohmann::json echo() const;
};

struct ResultRecord {
  nlohmann::json config;
  std::string quantity;
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;
  std::string method;
  double wall_ms = 0.0;
  std::string ts;
  std::string version = kVersion;

  /// Keys exactly {config, quantity, value, stderr, n, method, wall_ms, ts, version}.
  nlohmann::json to_json() const;
  static ResultRecord from_json(const nlohmann::json& j);
};

/// Line-delimited JSON store, append-only, one record per line.
class ResultStore {
 public:
  ResultStore() = default;
  explicit ResultStore(std::string path);  // loads existing records
  const std::string& path() const { return path_; }
  void append(const ResultRecord& r);
  std::vector<const ResultRecord*> find(const nlohmann::json& config) const;
  const std::vector<ResultRecord>& records() const { return records_; }

 private:
  std::string path_;
  std::vector<ResultRecord> records_;
};

struct RunOutcome {
  std::vector<ResultRecord> records;
  bool cached = false;
};

/// Dispatches to the estimators; idempotent under identical config+seed
/// (returns the stored records without recomputing).
RunOutcome run(const ExperimentConfig& cfg, ResultStore* store = nullptr);

struct VerdictSide {
  double value = 0.0;
  double stderr_ = 0.0;
  double bias = 0.0;
  bool exact = false;
};

struct InequalityVerdict {
  std::string name;  // ell^2<=h, h<=ell*v, ell<=v, 4*lambda<=h, h<=v^2, 4*lambda<=v^2
  VerdictSide lhs, rhs;
  double slack = 0.0;
  std::string verdict;  // consistent | equality-within-tolerance | violated
};

/// Verdict rule: violated iff lhs - rhs > slack, equality iff |lhs - rhs| <=
/// slack, slack = 3 (sum of stderrs) + declared bias budgets.
InequalityVerdict make_verdict(std::string name, VerdictSide lhs, VerdictSide rhs);

/// The six inequality rows for one invariant set.
std::vector<InequalityVerdict> inequality_verdicts(
    const geometry::ModelSpace& space, const estimators::InvariantSet& inv, double T,
    std::span<const double> R_grid);

/// Defaults used by `check` and the CLI.
std::vector<double> default_R_grid(const geometry::ModelSpace& space);
std::vector<double> default_s_grid(const geometry::ModelSpace& space);
double default_lambda_R(const geometry::ModelSpace& space);
std::string default_horofunction(const geometry::ModelSpace& space);

struct CheckResult {
  estimators::InvariantSet invariants;
  std::vector<InequalityVerdict> verdicts;
};
CheckResult run_check(const ExperimentConfig& cfg);

/// Human-readable report (markdown tables) or csv/json record dumps.
/// Deterministic given the store contents modulo timestamps.
std::string report(const ResultStore& store, const std::string& space_filter,
                   const std::string& format = "md");

struct SelftestItem {
  std::string name;
  bool pass = false;
  std::string info;
};
struct SelftestResult {
  std::vector<SelftestItem> items;
  bool all_pass = false;
  double wall_ms = 0.0;
};

/// Reduced-sample invariant suite for every module; deterministic for a fixed
/// seed and any worker count. quick mode trims sample counts further.
SelftestResult selftest(std::uint64_t seed = 0, int threads = 0, bool quick = false);

}  // namespace horodrift::harness

#endif
