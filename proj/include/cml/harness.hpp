#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cml/bounds.hpp"
#include "cml/metric.hpp"

namespace cml {

enum class Mode { synthetic, benchmark, bounds, gordon };
enum class TrainerChoice { pairwise_erm, lmnn, none };

std::string_view to_string(Mode mode);
std::string_view to_string(TrainerChoice trainer);

struct SeedConfig {
  std::uint64_t data = 1;
  std::uint64_t projection_base = 1000;
  std::uint64_t split = 2;
  std::uint64_t train = 3;
};

/// Everything a sweep needs. Each field has a config key of the same name
/// (see config_keys()); grids take repeated keys.
struct ExperimentConfig {
  Mode mode = Mode::synthetic;
  std::vector<int> d_grid{100};
  std::vector<int> k_grid{5, 10, 20, 40, 80};
  int reps = 10;
  std::vector<double> gamma_grid{0.05, 0.25, 0.5};
  std::vector<std::string> profiles{"constant", "power_decay:1", "exponential_decay:0.2"};
  TrainerChoice trainer = TrainerChoice::lmnn;
  std::optional<double> loss_rho;
  std::optional<double> loss_l;
  std::optional<double> loss_u;
  SeedConfig seeds;
  std::string dataset_path;
  std::string output_dir = "results";

  int n = 2000;                // synthetic sample size
  double train_fraction = 0.8;
  int ambient_dim = 100;       // benchmark embedding dimension
  double eps = 0.1;            // confidence parameter of the recorded bounds
  int stable_dim_samples = 2000;

  // bounds mode
  int bound_n = 800;
  double bound_s = 5.0;
  double bound_rho = 1.0;
  int bound_d = 100;

  // gordon mode
  std::vector<std::string> geometries{"singleton", "sphere", "ellipsoid"};
  std::vector<double> epsilon_grid{1.0, 2.0};
  std::string gordon_profile = "power_decay:1";
  int gordon_points = 500;
  int gordon_draws = 2000;
  int width_samples = 5000;

  int workers = 1;
  bool record_timing = false;  // fill wall_ms in results.csv (breaks byte-identical reruns)
  TrainConfig train;

  /// Throws ConfigError on empty grids, k > d, and out-of-range values.
  void validate() const;
};

/// Keys accepted in config files and, with '_' spelled '-', as CLI flags.
std::span<const std::string_view> config_keys();

/// Applies one key=value setting. Grid keys append; callers that want a
/// fresh grid call reset_grid first. Throws ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Clears the grid behind `key` when it is a grid key; no-op otherwise.
void reset_grid(ExperimentConfig& cfg, const std::string& key);

/// Parses flat key=value text. Blank lines and lines starting with '#' are
/// ignored. The first occurrence of a grid key replaces its default; later
/// occurrences append. Values may also be comma-separated lists.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

struct ResultRow {
  std::string mode;
  std::string dataset;
  int d = 0;
  int k = 0;
  std::optional<double> gamma;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string trainer;
  std::optional<double> train_error;
  std::optional<double> test_error;
  std::optional<double> test_error_euclidean;
  std::optional<double> stable_dim_estimate;
  std::optional<double> gen_bound;
  std::optional<double> excess_bound;
  double wall_ms = 0.0;
  std::string error;  // non-empty for a failed cell

  bool failed() const { return !error.empty(); }
};

inline constexpr std::string_view kResultsHeader =
    "mode,dataset,d,k,gamma,rep,seed,trainer,train_error,test_error,test_error_euclidean,"
    "stable_dim_estimate,gen_bound,excess_bound,wall_ms";

/// Orders rows by (mode, dataset, d, k, gamma, rep).
void sort_rows(std::vector<ResultRow>& rows);

/// Results CSV: kResultsHeader, then one line per row with floats at six
/// significant digits and empty cells for missing values. wall_ms is written
/// only when with_timing is set.
std::string results_csv(std::span<const ResultRow> rows, bool with_timing);

std::vector<ResultRow> run_synthetic(const ExperimentConfig& cfg);
std::vector<ResultRow> run_benchmark(const ExperimentConfig& cfg);

/// Trade-off table over k_grid for (bound_n, bound_s, bound_rho, eps, bound_d).
std::vector<TradeoffRow> run_bounds(const ExperimentConfig& cfg);

struct GordonRow {
  std::string geometry;
  int d = 0;
  int k = 0;
  double epsilon = 0.0;
  GordonCheck check;
};

inline constexpr std::string_view kGordonHeader =
    "geometry,d,k,epsilon,violation_fraction,theoretical_bound,b,omega_hat,omega_std_error,rhs_used";

std::vector<GordonRow> run_gordon(const ExperimentConfig& cfg);
std::string gordon_csv(std::span<const GordonRow> rows);

struct SeriesPoint {
  int k = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(count); 0 for a single value
  int count = 0;
};

struct SeriesSummary {
  std::string mode;
  std::string dataset;
  std::string key;        // "d=200" or "gamma=0.05"
  bool baseline = false;  // Euclidean 1-NN series
  std::vector<SeriesPoint> points;
};

/// Mean and standard error of test error per (mode, dataset, series, k),
/// skipping failed rows. Baseline series are emitted when the rows carry a
/// Euclidean error.
std::vector<SeriesSummary> summarize(std::span<const ResultRow> rows);

/// Writes one SVG per (mode, dataset) into output_dir and returns the paths.
std::vector<std::filesystem::path> emit_plots(std::span<const ResultRow> rows,
                                              const std::filesystem::path& output_dir);

/// Process exit codes of the CLI.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitData = 2, kExitRuntime = 3 };

/// Runs the configured mode and writes its artifacts under cfg.output_dir.
/// Returns the exit code; config and data errors propagate as exceptions.
int run_experiment(const ExperimentConfig& cfg);

}  // namespace cml
