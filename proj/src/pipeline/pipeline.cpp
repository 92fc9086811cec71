#include "knh/errors.hpp"
#include "knh/flats.hpp"
#include "knh/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

namespace knh {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(0..count-1) on up to `threads` workers. Each index writes only its
// own output slot, so results do not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::string stage_error(const char* stage, const std::exception& e) {
  return std::string(stage) + ": " + e.what();
}

// Re-throws with the stage name prefixed, keeping the error kind.
[[noreturn]] void rethrow_in_stage(const char* stage) {
  try {
    throw;
  } catch (const ParseError& e) {
    throw Error(ErrorKind::Parse, stage_error(stage, e));
  } catch (const Error& e) {
    throw Error(e.kind(), stage_error(stage, e));
  }
}

std::uint64_t aspect_seed(std::uint64_t seed, std::size_t aspect) {
  return seed + 1000003ULL * aspect;
}

struct Measured {
  std::optional<CanonicalProjection> projection;
  Matrix distances;
  std::vector<std::string> warnings;
  double project_time = 0.0;
  double distance_time = 0.0;
};

Measured measure(const std::vector<ViewMatrix>& views, Mode mode, Index R,
                 std::uint64_t seed, const PipelineConfig& cfg) {
  Measured out;
  if (mode != Mode::Knn) {
    const auto start = Clock::now();
    try {
      if (views.size() == 2) {
        out.projection = cca(views[0], views[1], R, cfg.ridge);
      } else {
        out.projection = tcca(views, R, {.ridge = cfg.ridge, .seed = seed});
      }
    } catch (...) {
      rethrow_in_stage("project");
    }
    for (const auto& w : out.projection->warnings) out.warnings.push_back(w);
    out.project_time = seconds_since(start);
  }

  const auto start = Clock::now();
  try {
    if (mode == Mode::Knh) {
      const auto flats = flats_from_projections(out.projection->projected);
      Index degenerate = 0;
      for (const auto& f : flats) degenerate += f.degenerate() ? 1 : 0;
      if (degenerate > 0) {
        out.warnings.push_back(std::to_string(degenerate) +
                               " entities have degenerate flats");
      }
      out.distances = pairwise_flat_distances(
          flats, cfg.symmetric_pairs ? PairMode::Symmetric : PairMode::OneWay,
          cfg.threads);
    } else {
      std::vector<Matrix> mats;
      if (mode == Mode::Knn) {
        for (const auto& v : views) mats.push_back(v.values);
      } else {
        mats = out.projection->projected;
      }
      out.distances = baseline_knn_distances(mats);
    }
  } catch (...) {
    rethrow_in_stage("distances");
  }
  out.distance_time = seconds_since(start);
  return out;
}

struct Propagated {
  Metrics metrics;
  std::vector<std::string> warnings;
  double graph_time = 0.0;
  double propagate_time = 0.0;
};

WeightedGraph sparsify(const Matrix& D, Index K, const PipelineConfig& cfg) {
  try {
    return knn_sparsify(D, K, cfg.mutual_knn ? Symmetrization::Mutual
                                             : Symmetrization::Union);
  } catch (...) {
    rethrow_in_stage("graph");
  }
}

Propagated propagate(const Matrix& D, Index K, const LabelSet& truth,
                     const PipelineConfig& cfg, std::uint64_t seed) {
  Propagated out;
  auto start = Clock::now();
  const WeightedGraph g = sparsify(D, K, cfg);
  out.graph_time = seconds_since(start);

  start = Clock::now();
  try {
    const LabelSplit split = split_labels(truth, cfg.train_frac, seed);
    const Beliefs b = fabp(g, split.priors,
                           {.homophily = cfg.homophily, .weighted = cfg.weighted_edges});
    out.warnings = b.warnings;
    out.metrics = evaluate(classify(b).labels, truth, split.heldout);
  } catch (...) {
    rethrow_in_stage("propagate");
  }
  out.propagate_time = seconds_since(start);
  return out;
}

std::vector<Index> aspect_ranks(const Dataset& data) {
  std::vector<Index> ranks;
  for (const auto& a : data.aspects) ranks.push_back(a.rank);
  return ranks;
}

void finalize(RunReport& r) {
  std::vector<double> p, rc, f, a;
  for (const auto& run : r.runs) {
    p.push_back(run.metrics.precision);
    rc.push_back(run.metrics.recall);
    f.push_back(run.metrics.f1);
    a.push_back(run.metrics.accuracy);
  }
  r.precision = summarize(p);
  r.recall = summarize(rc);
  r.f1 = summarize(f);
  r.accuracy = summarize(a);
}

void check_dataset(const Dataset& data) {
  if (data.aspects.empty()) throw ValidationError("dataset has no aspects");
  if (data.truth.size() != data.entities()) {
    throw ValidationError("labels cover " + std::to_string(data.truth.size()) +
                          " entities, aspects have " +
                          std::to_string(data.entities()));
  }
}

}  // namespace

std::vector<ViewMatrix> decompose_aspects(const Dataset& data,
                                          const std::vector<Index>& ranks,
                                          std::uint64_t seed,
                                          const PipelineConfig& cfg,
                                          std::vector<std::string>* warnings) {
  if (ranks.size() != data.aspects.size()) {
    throw ValidationError("one rank per aspect required");
  }
  std::vector<ViewMatrix> views;
  try {
    for (std::size_t m = 0; m < data.aspects.size(); ++m) {
      const Aspect& a = data.aspects[m];
      ViewMatrix v;
      v.view_id = static_cast<int>(m);
      if (const auto* X = std::get_if<Matrix>(&a.data)) {
        const SvdFactors f = truncated_svd(*X, ranks[m]);
        v.values = a.entities_are_rows ? f.U : f.V;
      } else {
        const CpFactors f =
            cp_als(std::get<SparseTensor3>(a.data), ranks[m],
                   {.max_sweeps = cfg.cp_max_sweeps, .tol = cfg.cp_tol,
                    .seed = aspect_seed(seed, m)});
        if (warnings) {
          for (const auto& w : f.warnings) warnings->push_back(w);
          if (!f.converged) {
            warnings->push_back("aspect " + std::to_string(m) +
                                ": CP stopped before converging (fit " +
                                std::to_string(f.fit) + ")");
          }
        }
        v.values = a.entity_mode == 0 ? f.A : a.entity_mode == 1 ? f.B : f.C;
      }
      if (!views.empty() && v.entities() != views.front().entities()) {
        throw ValidationError("aspects disagree on entity count");
      }
      views.push_back(std::move(v));
    }
  } catch (...) {
    rethrow_in_stage("decompose");
  }
  return views;
}

GraphStage build_run_graph(const Dataset& data, const PipelineConfig& cfg,
                           const std::vector<Index>& ranks, Index R,
                           std::uint64_t seed) {
  check_dataset(data);
  GraphStage out;
  auto start = Clock::now();
  out.views = decompose_aspects(data, ranks, seed, cfg, &out.warnings);
  out.timings.decompose = seconds_since(start);
  Measured m = measure(out.views, cfg.mode, R, seed, cfg);
  out.projection = std::move(m.projection);
  out.distances = std::move(m.distances);
  out.timings.project = m.project_time;
  out.timings.distances = m.distance_time;
  for (auto& w : m.warnings) out.warnings.push_back(std::move(w));
  start = Clock::now();
  out.graph = sparsify(out.distances, cfg.K, cfg);
  out.timings.graph = seconds_since(start);
  return out;
}

RunReport cmd_classify(const PipelineConfig& cfg, const Dataset& data,
                       const std::optional<std::filesystem::path>& dump_dir) {
  check_dataset(data);
  const auto ranks = aspect_ranks(data);
  const Index R = cfg.R ? *cfg.R : *std::min_element(ranks.begin(), ranks.end());

  RunReport report;
  report.mode = cfg.mode;
  report.R = R;
  report.K = cfg.K;
  report.config = config_to_json(cfg);
  report.runs.resize(cfg.runs);

  std::vector<std::exception_ptr> errors(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t run) {
    try {
      RunResult& res = report.runs[run];
      res.run = static_cast<int>(run);
      res.seed = cfg.seed + run;
      const auto start = Clock::now();
      auto views = decompose_aspects(data, ranks, res.seed, cfg, &res.warnings);
      res.timings.decompose = seconds_since(start);
      Measured m = measure(views, cfg.mode, R, res.seed, cfg);
      res.timings.project = m.project_time;
      res.timings.distances = m.distance_time;
      for (auto& w : m.warnings) res.warnings.push_back(std::move(w));
      if (run == 0 && dump_dir) {
        save_dense_csv(*dump_dir / "distances_run0.csv", m.distances);
      }
      Propagated p = propagate(m.distances, cfg.K, data.truth, cfg, res.seed);
      res.metrics = p.metrics;
      res.timings.graph = p.graph_time;
      res.timings.propagate = p.propagate_time;
      for (auto& w : p.warnings) res.warnings.push_back(std::move(w));
    } catch (...) {
      errors[run] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  finalize(report);
  return report;
}

std::vector<RunReport> cmd_sweep(const PipelineConfig& cfg, const Dataset& data,
                                 const std::vector<Index>& ranks,
                                 const std::vector<Index>& ks) {
  check_dataset(data);
  if (ranks.empty() || ks.empty()) throw ValidationError("sweep ranges are empty");
  const auto& modes = cfg.sweep_modes;
  const std::size_t n_modes = modes.size(), n_ranks = ranks.size(), n_ks = ks.size();
  auto cell_index = [&](std::size_t m, std::size_t r, std::size_t k) {
    return (m * n_ranks + r) * n_ks + k;
  };

  std::vector<RunReport> cells(n_modes * n_ranks * n_ks);
  for (std::size_t m = 0; m < n_modes; ++m)
    for (std::size_t r = 0; r < n_ranks; ++r)
      for (std::size_t k = 0; k < n_ks; ++k) {
        RunReport& c = cells[cell_index(m, r, k)];
        PipelineConfig cell_cfg = cfg;
        cell_cfg.mode = modes[m];
        cell_cfg.R = ranks[r];
        cell_cfg.K = ks[k];
        c.mode = modes[m];
        c.rank = ranks[r];
        c.R = ranks[r];
        c.K = ks[k];
        c.config = config_to_json(cell_cfg);
        c.runs.resize(cfg.runs);
      }
  // Per-run error slots, so the first error reported is the lowest run's.
  std::vector<std::vector<std::string>> errors(
      cells.size(), std::vector<std::string>(cfg.runs));

  // One work unit per (rank, run): decompose once, then every mode and K.
  parallel_for(n_ranks * cfg.runs, cfg.threads, [&](std::size_t unit) {
    const std::size_t r = unit / cfg.runs;
    const int run = static_cast<int>(unit % cfg.runs);
    const std::uint64_t seed = cfg.seed + run;
    auto fail = [&](std::size_t m_first, std::size_t m_last, std::size_t k_first,
                    std::size_t k_last, const std::string& what) {
      for (std::size_t m = m_first; m < m_last; ++m)
        for (std::size_t k = k_first; k < k_last; ++k)
          errors[cell_index(m, r, k)][run] = what;
    };

    std::vector<std::string> decompose_warnings;
    std::vector<ViewMatrix> views;
    const auto start = Clock::now();
    try {
      views = decompose_aspects(data, std::vector<Index>(data.aspects.size(), ranks[r]),
                                seed, cfg, &decompose_warnings);
    } catch (const std::exception& e) {
      fail(0, n_modes, 0, n_ks, e.what());
      return;
    }
    const double decompose_time = seconds_since(start);

    for (std::size_t m = 0; m < n_modes; ++m) {
      PipelineConfig cell_cfg = cfg;
      cell_cfg.mode = modes[m];
      Measured measured;
      try {
        measured = measure(views, modes[m], ranks[r], seed, cell_cfg);
      } catch (const std::exception& e) {
        fail(m, m + 1, 0, n_ks, e.what());
        continue;
      }
      for (std::size_t k = 0; k < n_ks; ++k) {
        RunResult& res = cells[cell_index(m, r, k)].runs[run];
        res.run = run;
        res.seed = seed;
        res.warnings = decompose_warnings;
        res.warnings.insert(res.warnings.end(), measured.warnings.begin(),
                            measured.warnings.end());
        res.timings.decompose = decompose_time;
        res.timings.project = measured.project_time;
        res.timings.distances = measured.distance_time;
        try {
          Propagated p = propagate(measured.distances, ks[k], data.truth, cell_cfg, seed);
          res.metrics = p.metrics;
          res.timings.graph = p.graph_time;
          res.timings.propagate = p.propagate_time;
          res.warnings.insert(res.warnings.end(), p.warnings.begin(), p.warnings.end());
        } catch (const std::exception& e) {
          errors[cell_index(m, r, k)][run] = e.what();
        }
      }
    }
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (const auto& e : errors[c]) {
      if (!e.empty()) {
        cells[c].error = e;
        break;
      }
    }
    finalize(cells[c]);
  }
  return cells;
}

json RunReport::to_json(bool include_timings) const {
  json j;
  j["mode"] = knh::to_string(mode);
  if (rank > 0) j["rank"] = rank;
  j["R"] = R;
  j["K"] = K;
  j["config"] = config;
  json runs_json = json::array();
  for (const auto& r : runs) {
    json rj;
    rj["run"] = r.run;
    rj["seed"] = r.seed;
    rj["metrics"] = {{"precision", r.metrics.precision},
                     {"recall", r.metrics.recall},
                     {"f1", r.metrics.f1},
                     {"accuracy", r.metrics.accuracy},
                     {"tp", r.metrics.tp},
                     {"fp", r.metrics.fp},
                     {"fn", r.metrics.fn},
                     {"tn", r.metrics.tn}};
    if (include_timings) {
      rj["timings"] = {{"decompose", r.timings.decompose},
                       {"project", r.timings.project},
                       {"distances", r.timings.distances},
                       {"graph", r.timings.graph},
                       {"propagate", r.timings.propagate}};
    }
    rj["warnings"] = r.warnings;
    runs_json.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs_json);
  auto summary = [](const Summary& s) { return json{{"mean", s.mean}, {"std", s.std}}; };
  j["aggregate"] = {{"precision", summary(precision)},
                    {"recall", summary(recall)},
                    {"f1", summary(f1)},
                    {"accuracy", summary(accuracy)}};
  if (!error.empty()) j["error"] = error;
  return j;
}

std::string sweep_csv(const std::vector<RunReport>& cells) {
  std::ostringstream out;
  out << "mode,rank,K,f1_mean,f1_std,precision_mean,precision_std,recall_mean,"
         "recall_std,accuracy_mean,accuracy_std,status\n";
  for (const auto& c : cells) {
    out << knh::to_string(c.mode) << ',' << c.rank << ',' << c.K << ','
        << format_number(c.f1.mean) << ',' << format_number(c.f1.std) << ','
        << format_number(c.precision.mean) << ',' << format_number(c.precision.std)
        << ',' << format_number(c.recall.mean) << ',' << format_number(c.recall.std)
        << ',' << format_number(c.accuracy.mean) << ','
        << format_number(c.accuracy.std) << ',';
    if (c.error.empty()) {
      out << "ok";
    } else {
      std::string msg = c.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << "error: " << msg;
    }
    out << '\n';
  }
  return out.str();
}

std::string report_table(const RunReport& r) {
  std::ostringstream out;
  out << "mode " << knh::to_string(r.mode) << "  R=" << r.R << "  K=" << r.K
      << "  runs=" << r.runs.size() << '\n';
  out << std::left << std::setw(11) << "metric" << std::right << std::setw(10)
      << "mean" << std::setw(10) << "std" << '\n';
  out << std::fixed << std::setprecision(4);
  const std::pair<const char*, const Summary*> rows[] = {
      {"precision", &r.precision},
      {"recall", &r.recall},
      {"f1", &r.f1},
      {"accuracy", &r.accuracy}};
  for (const auto& [name, s] : rows) {
    out << std::left << std::setw(11) << name << std::right << std::setw(10)
        << s->mean << std::setw(10) << s->std << '\n';
  }
  return out.str();
}

}  // namespace knh
