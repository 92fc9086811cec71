// Command-line front end for the K-nearest-hyperplanes pipeline.

#include "knh/errors.hpp"
#include "knh/flats.hpp"
#include "knh/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw knh::ValidationError("cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw knh::ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw knh::ParseError(std::string("invalid JSON in ") + path.string() + ": " + e.what(), 0);
  }
}

int run_classify(const fs::path& config, const std::string& out,
                 const std::string& dump_dir) {
  auto [cfg, data] = knh::load_pipeline(config);
  std::optional<fs::path> dump;
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    dump = dump_dir;
  }
  const knh::RunReport report = knh::cmd_classify(cfg, data, dump);
  std::cout << knh::report_table(report);
  const std::string text = report.to_json().dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return 0;
}

int run_sweep(const fs::path& config, const std::string& ranks,
              const std::string& ks, const std::string& out,
              const std::string& report_path) {
  auto [cfg, data] = knh::load_pipeline(config);
  const auto cells = knh::cmd_sweep(cfg, data, knh::parse_range(ranks).values(),
                                    knh::parse_range(ks).values());
  const std::string csv = knh::sweep_csv(cells);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text(out, csv);
  }
  if (!report_path.empty()) {
    json all = json::array();
    for (const auto& c : cells) all.push_back(c.to_json());
    write_text(report_path, all.dump(2) + "\n");
  }
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      std::cerr << "cell " << knh::to_string(c.mode) << " rank=" << c.rank
                << " K=" << c.K << " failed: " << c.error << '\n';
    }
  }
  return 0;
}

int run_synth(const fs::path& spec_path, const fs::path& out_dir) {
  const json j = read_json(spec_path);
  knh::SynthSpec spec;
  spec.n_entities = j.value("n_entities", spec.n_entities);
  spec.n_clusters = j.value("n_clusters", spec.n_clusters);
  spec.latent_dim = j.value("latent_dim", spec.latent_dim);
  spec.view_dims = j.value("view_dims", spec.view_dims);
  spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
  spec.seed = j.value("seed", spec.seed);
  spec.separation = j.value("separation", spec.separation);
  spec.cluster_spread = j.value("cluster_spread", spec.cluster_spread);
  const knh::SynthData data = knh::synth_views(spec);

  fs::create_directories(out_dir);
  json config = j.value("config", json::object());
  json views = json::array();
  for (std::size_t m = 0; m < data.views.size(); ++m) {
    const std::string name = "view_" + std::to_string(m) + ".csv";
    knh::save_dense_csv(out_dir / name, data.views[m].values);
    const knh::Index rank = std::min<knh::Index>(
        config.value("rank", knh::Index{10}),
        std::min(data.views[m].dims(), data.views[m].entities()));
    views.push_back({{"path", name}, {"type", "matrix"}, {"rank", rank}});
  }
  knh::save_labels(out_dir / "labels.csv", data.truth);
  config.erase("rank");
  config["views"] = views;
  config["labels"] = "labels.csv";
  if (!config.contains("seed")) config["seed"] = spec.seed;
  write_text(out_dir / "config.json", config.dump(2) + "\n");
  std::cout << "wrote " << data.views.size() << " views, labels and config.json to "
            << out_dir.string() << '\n';
  return 0;
}

struct DecomposeArgs {
  std::string input, type = "matrix", out, report, axis = "rows";
  knh::Index rank = 1;
  std::uint64_t seed = 0;
  int entity_mode = 2;
  int max_sweeps = 100;
  double tol = 1e-8;
};

int run_decompose(const DecomposeArgs& a) {
  json report;
  knh::Matrix factor;
  if (a.type == "matrix") {
    const knh::Matrix X = knh::load_dense_csv(a.input);
    const knh::SvdFactors f = knh::truncated_svd(X, a.rank);
    factor = a.axis == "rows" ? f.U : f.V;
    report = {{"type", "svd"}, {"rank", a.rank}, {"singular_values", f.S}};
  } else if (a.type == "tensor") {
    const knh::SparseTensor3 T = knh::load_sparse_tensor(a.input);
    const knh::CpFactors f = knh::cp_als(
        T, a.rank, {.max_sweeps = a.max_sweeps, .tol = a.tol, .seed = a.seed});
    factor = a.entity_mode == 0 ? f.A : a.entity_mode == 1 ? f.B : f.C;
    report = {{"type", "cp"},      {"rank", a.rank},         {"fit", f.fit},
              {"sweeps", f.sweeps}, {"converged", f.converged}, {"losses", f.losses},
              {"warnings", f.warnings}, {"seed", a.seed}};
  } else {
    throw knh::ValidationError("--type must be matrix or tensor");
  }
  if (!a.out.empty()) knh::save_dense_csv(a.out, factor);
  const std::string text = report.dump(2) + "\n";
  if (a.report.empty()) {
    std::cout << text;
  } else {
    write_text(a.report, text);
  }
  return 0;
}

int run_graph(const fs::path& config, int run, const fs::path& out_dir) {
  auto [cfg, data] = knh::load_pipeline(config);
  std::vector<knh::Index> ranks;
  for (const auto& a : data.aspects) ranks.push_back(a.rank);
  const knh::Index R = cfg.R ? *cfg.R : *std::min_element(ranks.begin(), ranks.end());
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(run);
  const knh::GraphStage stage = knh::build_run_graph(data, cfg, ranks, R, seed);

  fs::create_directories(out_dir);
  for (const auto& v : stage.views) {
    knh::save_dense_csv(out_dir / ("view_" + std::to_string(v.view_id) + ".csv"), v.values);
  }
  if (stage.projection) {
    const auto& p = *stage.projection;
    for (std::size_t m = 0; m < p.projected.size(); ++m) {
      knh::save_dense_csv(out_dir / ("projected_" + std::to_string(m) + ".csv"), p.projected[m]);
      knh::save_dense_csv(out_dir / ("directions_" + std::to_string(m) + ".csv"), p.directions[m]);
    }
    const json meta = {{"view_ids", p.view_ids},
                       {"R", p.rank()},
                       {"ridge", p.ridges},
                       {"correlations", p.correlations},
                       {"warnings", p.warnings}};
    write_text(out_dir / "projection.json", meta.dump(2) + "\n");
  }
  knh::save_dense_csv(out_dir / "distances.csv", stage.distances);
  knh::save_graph(out_dir / "graph.txt", stage.graph);
  std::cout << "mode " << knh::to_string(cfg.mode) << ": " << stage.graph.nodes()
            << " nodes, " << stage.graph.edges().size() << " edges written to "
            << out_dir.string() << '\n';
  for (const auto& w : stage.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-nearest-hyperplanes multi-view graph pipeline"};
  app.require_subcommand(1);

  std::string config, out, dump_dir, ranks, ks, report, spec;
  int run = 0;
  DecomposeArgs dec;

  auto* classify = app.add_subcommand("classify", "run the full pipeline for every configured run");
  classify->add_option("--config", config, "pipeline config (JSON)")->required();
  classify->add_option("--out", out, "write the JSON report here instead of stdout");
  classify->add_option("--dump-dir", dump_dir, "write run 0's distance matrix here");

  auto* sweep = app.add_subcommand("sweep", "grid over decomposition rank and K");
  sweep->add_option("--config", config, "pipeline config (JSON)")->required();
  sweep->add_option("--ranks", ranks, "rank range a..b[:step]")->required();
  sweep->add_option("--ks", ks, "K range a..b[:step]")->required();
  sweep->add_option("--out", out, "CSV output (default stdout)");
  sweep->add_option("--report", report, "full per-cell JSON reports");

  auto* synth = app.add_subcommand("synth", "generate a synthetic multi-view dataset");
  synth->add_option("--spec", spec, "generator spec (JSON)")->required();
  synth->add_option("--out", out, "output directory")->required();

  auto* decompose = app.add_subcommand("decompose", "factor one aspect into its entity-mode matrix");
  decompose->add_option("--input", dec.input, "matrix CSV or tensor coordinate file")->required();
  decompose->add_option("--type", dec.type, "matrix | tensor")->check(CLI::IsMember({"matrix", "tensor"}));
  decompose->add_option("--rank", dec.rank, "decomposition rank")->required();
  decompose->add_option("--seed", dec.seed, "CP initialisation seed");
  decompose->add_option("--entity-axis", dec.axis, "matrix entities: rows | cols")->check(CLI::IsMember({"rows", "cols"}));
  decompose->add_option("--entity-mode", dec.entity_mode, "tensor entity mode (0-2)")->check(CLI::Range(0, 2));
  decompose->add_option("--max-sweeps", dec.max_sweeps, "CP sweep limit");
  decompose->add_option("--tol", dec.tol, "CP fit-change tolerance");
  decompose->add_option("--out", dec.out, "entity factor CSV");
  decompose->add_option("--report", dec.report, "JSON report (default stdout)");

  auto* graph = app.add_subcommand("graph", "decompose, project and build one run's graph");
  graph->add_option("--config", config, "pipeline config (JSON)")->required();
  graph->add_option("--run", run, "run index (seed = base seed + run)");
  graph->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*classify) return run_classify(config, out, dump_dir);
    if (*sweep) return run_sweep(config, ranks, ks, out, report);
    if (*synth) return run_synth(spec, out);
    if (*decompose) return run_decompose(dec);
    if (*graph) return run_graph(config, run, out);
  } catch (const knh::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return knh::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
