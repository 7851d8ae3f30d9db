#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tarnn/gated.hpp"
#include "tarnn/metrics.hpp"
#include "tarnn/reservoir.hpp"

namespace tarnn::bench {

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct GridAxes {
  std::vector<double> alpha{1.0};
  std::vector<double> radius{0.9};
  std::vector<double> lambda{1e-6};
  std::vector<double> input_scaling{1.0};
  std::vector<double> lr{1e-3};
  std::vector<std::size_t> hidden{100};
};

struct GridCell {
  double alpha = 1.0, radius = 0.9, lambda = 1e-6, input_scaling = 1.0,
         lr = 1e-3;
  std::size_t hidden = 100;
  std::size_t index = 0;  // lexicographic position in the expanded grid
};

// Axes expand in lexicographic order (alpha slowest), which is also the
// deterministic tie-break order for selection.
std::vector<GridCell> expand_grid(const GridAxes& axes);

struct GridOutcome {
  GridCell best;
  double best_score = 0.0;
  std::vector<GridCell> cells;
  std::vector<double> scores;        // +inf marks a failed cell
  std::vector<std::string> errors;   // per-cell diagnostics ("" if ok)
};

// Evaluates every cell (lower score is better) and selects the argmin,
// breaking ties toward the lower index. A cell evaluator may throw; the
// cell is then marked failed. Throws when every cell fails.
GridOutcome grid_search(const GridAxes& axes,
                        const std::function<double(const GridCell&)>& evaluate,
                        std::size_t n_threads = 1);

// ---------------------------------------------------------------------------
// Irregularity sweep (synthetic chaotic attractors)
// ---------------------------------------------------------------------------

struct SweepConfig {
  std::string attractor = "lorenz";  // or "mackey_glass"
  std::size_t n_units = 500;
  std::vector<double> pi_values{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
  std::size_t n_segments = 50;
  std::size_t horizon = 200;
  std::size_t primer_len = 100;
  std::size_t n_steps = 10000;  // samples per generated series
  std::uint64_t data_seed = 1;
  std::uint64_t model_seed = 7;
  GridAxes tune_grid;           // searched once on the regular-time data
  std::size_t tune_segments = 8;
  double divergence_cap = 2.0;  // NRMSE values are capped here
  std::size_t washout = 100;
  std::size_t n_threads = 1;
};

struct SweepRow {
  double pi = 0.0;
  Aggregate esn;    // NRMSE statistics over segments
  Aggregate taesn;
  std::vector<double> esn_values, taesn_values;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  GridCell tuned;
};

SweepResult irregularity_sweep(const SweepConfig& cfg, std::ostream* log);
void write_sweep_csv(const SweepResult& r, const std::string& path);

// The sweep's tuning stage alone: searches cfg.tune_grid on the
// regular-time data and returns the full scored grid.
GridOutcome sweep_grid_search(const SweepConfig& cfg, std::ostream* log);
void write_grid_csv(const GridOutcome& g, const std::string& path);

// ---------------------------------------------------------------------------
// Gesture classification table
// ---------------------------------------------------------------------------

struct Table1Config {
  std::string train_archive;  // empty -> synthetic stand-in
  std::string test_archive;
  std::size_t standin_train = 890, standin_test = 3580, standin_len = 900;
  std::size_t esn_units = 500;
  std::size_t gated_hidden = 100;
  std::size_t epochs = 100;
  std::size_t esn_seeds = 10;
  std::size_t gated_seeds = 10;
  double subsample_fraction = 0.10;
  double val_fraction = 0.30;
  std::uint64_t seed = 42;
  GridAxes esn_grid;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  bool run_gated = true;
  bool run_esn = true;
};

struct TableRow {
  std::string model;
  std::string transform;  // "linear", "exp" or "-"
  std::string validation; // table 2 only
  std::size_t params = 0;
  Aggregate accuracy;     // table 1
  Aggregate val_rmse, test_rmse, test_mape;  // table 2
  std::vector<double> per_seed;              // accuracy / test RMSE
  std::vector<double> per_seed_val, per_seed_mape;
  double train_seconds = 0.0;
};

std::vector<TableRow> run_table1(const Table1Config& cfg, std::ostream* log);
void write_table1_csv(const std::vector<TableRow>& rows, const std::string& path);

// ---------------------------------------------------------------------------
// Timestamped-series prediction table
// ---------------------------------------------------------------------------

struct Table2Config {
  std::string csv_path;  // empty -> synthetic stand-in
  std::size_t standin_len = 1800;
  std::size_t train_len = 1700, val_len = 50, test_len = 50;
  std::size_t esn_units = 50;
  std::size_t gated_hidden = 30;
  std::size_t seeds = 10;
  std::size_t epochs = 100;
  std::uint64_t seed = 42;
  GridAxes esn_grid;
  double lr = 1e-3;
  std::size_t fold_len = 50;
  std::size_t min_fold_train = 100;  // folds with less prior data are skipped
  std::size_t washout = 100;
  bool run_gated = true;
};

std::vector<TableRow> run_table2(const Table2Config& cfg, std::ostream* log);
void write_table2_csv(const std::vector<TableRow>& rows, const std::string& path);

// ---------------------------------------------------------------------------
// Shared prediction-task helpers (also used by the acceptance suite)
// ---------------------------------------------------------------------------

// Generative NRMSE of a trained model over evenly spaced segments of the
// shifted series rows [region_begin, region_end). Non-finite errors are
// recorded at the divergence cap.
std::vector<double> generative_nrmse_segments(
    const ReservoirModel& m, const SampledSeries& shifted,
    std::size_t region_begin, std::size_t region_end, std::size_t n_segments,
    std::size_t primer_len, std::size_t horizon, double cap);

// Run metadata: config echo + seeds + version + kernel backend.
void write_run_metadata(const std::string& path, const std::string& subcommand,
                        const std::string& config_json_text);

std::string version_string();

}  // namespace tarnn::bench
