#pragma once

#include "knh/correlate.hpp"
#include "knh/graph.hpp"
#include "knh/ingest.hpp"
#include "knh/linalg.hpp"
#include "knh/propagate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace knh {

enum class Mode { Knh, Knn, KnnCca };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

/// One aspect of the entities: a matrix (factored by truncated SVD) or a
/// three-mode tensor (factored by CP-ALS).
struct Aspect {
  std::variant<Matrix, SparseTensor3> data;
  Index rank = 10;
  /// Matrix aspects: true when entities are the rows.
  bool entities_are_rows = true;
  /// Tensor aspects: which mode indexes the entities.
  int entity_mode = 2;
  /// Source path as written in the config (empty for in-memory data).
  std::string path;
};

struct Dataset {
  std::vector<Aspect> aspects;
  LabelSet truth;

  Index entities() const;
};

struct PipelineConfig {
  Mode mode = Mode::Knh;
  std::optional<Index> R;  // common-space dimension; default min aspect rank
  Index K = 10;
  std::optional<double> ridge;
  double homophily = 0.05;
  double train_frac = 0.4;
  int runs = 10;
  std::uint64_t seed = 0;
  int cp_max_sweeps = 100;
  double cp_tol = 1e-8;
  bool weighted_edges = false;
  bool symmetric_pairs = false;
  bool mutual_knn = false;
  /// Modes visited by a sweep, in output order.
  std::vector<Mode> sweep_modes{Mode::Knh, Mode::Knn, Mode::KnnCca};
  unsigned threads = 1;

  /// Aspect descriptions as they appear in the config file.
  nlohmann::json views = nlohmann::json::array();
  std::string labels_path;
};

/// Parses the JSON config; paths stay as written.
PipelineConfig parse_config(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& c);

/// Reads the config and every file it references. Relative paths resolve
/// against the config file's directory.
std::pair<PipelineConfig, Dataset> load_pipeline(const std::filesystem::path& config_path);

/// Worker count from KNH_THREADS (default 1).
unsigned threads_from_env();

struct StageTimings {
  double decompose = 0.0;
  double project = 0.0;
  double distances = 0.0;
  double graph = 0.0;
  double propagate = 0.0;
};

struct RunResult {
  int run = 0;
  std::uint64_t seed = 0;
  Metrics metrics;
  StageTimings timings;
  std::vector<std::string> warnings;
};

struct RunReport {
  Mode mode = Mode::Knh;
  Index rank = 0;  // aspect rank used for every view (sweep) or 0 (per view)
  Index R = 0;
  Index K = 0;
  nlohmann::json config;
  std::vector<RunResult> runs;
  Summary precision, recall, f1, accuracy;
  std::string error;  // non-empty when the cell failed

  nlohmann::json to_json(bool include_timings = true) const;
};

/// Entity-mode factor of every aspect for one run.
std::vector<ViewMatrix> decompose_aspects(const Dataset& data,
                                          const std::vector<Index>& ranks,
                                          std::uint64_t seed,
                                          const PipelineConfig& cfg,
                                          std::vector<std::string>* warnings = nullptr);

/// Everything one run produces before propagation.
struct GraphStage {
  std::vector<ViewMatrix> views;                // decomposed
  std::optional<CanonicalProjection> projection;
  Matrix distances;
  WeightedGraph graph;
  std::vector<std::string> warnings;
  StageTimings timings;
};

GraphStage build_run_graph(const Dataset& data, const PipelineConfig& cfg,
                           const std::vector<Index>& ranks, Index R,
                           std::uint64_t seed);

/// Full pipeline for every run of `cfg`. When `dump_dir` is set the first
/// run's distance matrix is written there as distances_run0.csv.
RunReport cmd_classify(const PipelineConfig& cfg, const Dataset& data,
                       const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

struct IntRange {
  Index first = 1;
  Index last = 1;
  Index step = 1;

  std::vector<Index> values() const;
};

/// "a..b[:step]" or a single integer.
IntRange parse_range(const std::string& text);

/// One report per (mode, rank, K) cell, ordered by mode (config order), rank,
/// K. Each cell uses `rank` for every aspect and as R. Failed cells carry
/// their error and the sweep continues.
std::vector<RunReport> cmd_sweep(const PipelineConfig& cfg, const Dataset& data,
                                 const std::vector<Index>& ranks,
                                 const std::vector<Index>& ks);

/// mode,rank,K,f1_mean,f1_std,... one line per cell, no timings.
std::string sweep_csv(const std::vector<RunReport>& cells);

/// Human-readable summary table.
std::string report_table(const RunReport& r);

}  // namespace knh
