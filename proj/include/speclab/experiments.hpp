#pragma once

#include "speclab/kernel.hpp"
#include "speclab/population.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace speclab {

enum class Pipeline { Laplacian, Kpca };
std::string_view to_string(Pipeline p);

/// Flat key=value configuration. '#' starts a comment; blank lines ignored.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Throws ConfigError naming the first key not in `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

struct RateStudyConfig {
  Pipeline pipeline = Pipeline::Laplacian;
  KernelParams kernel = [] {
    KernelParams k;
    k.bandwidth = 0.3;
    return k;
  }();
  DensitySpec density = DensitySpec::uniform(DomainBox::unit(1));
  Eigen::Index K = 2;
  std::vector<Eigen::Index> n_grid{100, 200, 400, 800, 1600, 3200};
  int trials = 50;
  std::uint64_t seed = 7;
  Eigen::Index oracle_m = 2000;
  Eigen::Index eval_points = 0;  // per dimension; 0 = default for the dimension
  double gap_floor = 1e-3;
  std::vector<double> taus{1.0, 2.0, 3.0};
  int threads = 1;
  /// Reuse a serialized oracle instead of building one.
  std::optional<std::filesystem::path> oracle_path;

  /// Throws ConfigError on invalid settings.
  void validate() const;
};

/// Keys accepted in a config file; see README.
const std::vector<std::string>& config_keys();
RateStudyConfig rate_study_config_from(const Config& cfg);

struct TrialRow {
  Pipeline pipeline = Pipeline::Laplacian;
  Eigen::Index n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double error = 0.0;
  double gap = 0.0;
  double sv_min = 0.0;
  double sv_max = 0.0;
  double q_gap = 0.0;
  std::string status = "ok";
};

struct LevelSummary {
  Eigen::Index n = 0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  int ok_trials = 0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::string> notes;
};

struct Exceedance {
  double tau = 0.0;
  double threshold_scale = 0.0;  // C sqrt(tau)
  int exceed = 0;
  int total = 0;
  double frequency() const { return total ? static_cast<double>(exceed) / total : 0.0; }
};

struct RateStudyResult {
  std::vector<TrialRow> rows;  // sorted by (n, trial)
  std::vector<LevelSummary> levels;
  std::optional<SlopeFit> fit;  // absent when degenerate
  std::string fit_note;
  double fitted_C = 0.0;        // median of error * sqrt(n)
  std::vector<Exceedance> exceedance;
  double oracle_eigengap = 0.0;
  Eigen::Index eval_points = 0;  // total grid points used for the sup
};

/// Ordinary least squares on (log n, log err) points. Points with
/// non-positive error are excluded with a note; fewer than 3 remaining
/// points throws ConfigError.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& n_and_error);

/// Oracle for the configuration (built or loaded).
PopulationOracle study_oracle(const RateStudyConfig& config);

RateStudyResult run_rate_study(const RateStudyConfig& config);
RateStudyResult run_rate_study(const RateStudyConfig& config, const PopulationOracle& oracle);

/// rate_study.csv, summary.csv, fit.txt under `dir`.
void write_rate_study(const RateStudyResult& result, const std::filesystem::path& dir);

/// Random symmetric instance for the invariant-subspace harness: dimension
/// N, eigenvalues in [0, 2] with a gap of at least `min_gap` after index K.
Matrix random_gapped_symmetric(Eigen::Index N, Eigen::Index K, double min_gap, SplitMix64& rng);

struct NkDemoOptions {
  Eigen::Index n = 8;
  Eigen::Index K = 2;
  double eps = 1e-3;
  std::uint64_t seed = 1;
};

/// Certificate, Newton solve and diagnostics for a random gapped instance
/// with |E|_F = eps, as key=value text.
std::string run_nk_demo(const NkDemoOptions& opts);

/// CLI entry point. Exit codes: 0 ok, 1 configuration error, 2 numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace speclab
