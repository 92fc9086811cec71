#include "knh/errors.hpp"
#include "knh/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>

namespace knh {

using nlohmann::json;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Knh: return "knh";
    case Mode::Knn: return "knn";
    case Mode::KnnCca: return "knn_cca";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "knh") return Mode::Knh;
  if (s == "knn") return Mode::Knn;
  if (s == "knn_cca") return Mode::KnnCca;
  throw ValidationError("unknown mode '" + s + "' (expected knh, knn or knn_cca)");
}

Index Dataset::entities() const {
  if (aspects.empty()) return truth.size();
  const Aspect& a = aspects.front();
  if (const auto* m = std::get_if<Matrix>(&a.data)) {
    return a.entities_are_rows ? m->rows() : m->cols();
  }
  return std::get<SparseTensor3>(a.data).dims()[a.entity_mode];
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

PipelineConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  PipelineConfig c;
  c.mode = parse_mode(get_or<std::string>(j, "mode", "knh"));
  if (j.contains("R") && !j.at("R").is_null()) c.R = get_or<Index>(j, "R", 0);
  c.K = get_or<Index>(j, "K", c.K);
  if (j.contains("ridge") && !j.at("ridge").is_null()) {
    c.ridge = get_or<double>(j, "ridge", 0.0);
  }
  c.homophily = get_or<double>(j, "homophily", c.homophily);
  c.train_frac = get_or<double>(j, "train_frac", c.train_frac);
  c.runs = get_or<int>(j, "runs", c.runs);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("cp")) {
    const json& cp = j.at("cp");
    c.cp_max_sweeps = get_or<int>(cp, "max_sweeps", c.cp_max_sweeps);
    c.cp_tol = get_or<double>(cp, "tol", c.cp_tol);
  }
  c.weighted_edges = get_or<bool>(j, "weighted_edges", c.weighted_edges);
  c.symmetric_pairs = get_or<bool>(j, "symmetric_pairs", c.symmetric_pairs);
  c.mutual_knn = get_or<bool>(j, "mutual_knn", c.mutual_knn);
  if (j.contains("modes")) {
    c.sweep_modes.clear();
    for (const auto& m : j.at("modes")) c.sweep_modes.push_back(parse_mode(m.get<std::string>()));
    if (c.sweep_modes.empty()) throw ValidationError("config 'modes' is empty");
  }
  c.views = get_or<json>(j, "views", json::array());
  c.labels_path = get_or<std::string>(j, "labels", "");

  if (c.runs < 1) throw ValidationError("config 'runs' must be at least 1");
  if (c.K < 1) throw ValidationError("config 'K' must be at least 1");
  if (c.R && *c.R < 1) throw ValidationError("config 'R' must be at least 1");
  if (c.ridge && !(*c.ridge >= 0)) throw ValidationError("config 'ridge' must be >= 0");
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["R"] = c.R ? json(*c.R) : json(nullptr);
  j["K"] = c.K;
  j["ridge"] = c.ridge ? json(*c.ridge) : json(nullptr);
  j["homophily"] = c.homophily;
  j["train_frac"] = c.train_frac;
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["cp"] = {{"max_sweeps", c.cp_max_sweeps}, {"tol", c.cp_tol}};
  j["weighted_edges"] = c.weighted_edges;
  j["symmetric_pairs"] = c.symmetric_pairs;
  j["mutual_knn"] = c.mutual_knn;
  json modes = json::array();
  for (Mode m : c.sweep_modes) modes.push_back(to_string(m));
  j["modes"] = modes;
  j["views"] = c.views;
  j["labels"] = c.labels_path;
  return j;
}

std::pair<PipelineConfig, Dataset> load_pipeline(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ValidationError("cannot open config " + config_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  PipelineConfig cfg = parse_config(j);
  const auto base = config_path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  Dataset data;
  if (!cfg.views.is_array() || cfg.views.empty()) {
    throw ValidationError("config needs a non-empty 'views' array");
  }
  for (const auto& v : cfg.views) {
    Aspect a;
    a.path = get_or<std::string>(v, "path", "");
    if (a.path.empty()) throw ValidationError("view entry without 'path'");
    const auto type = get_or<std::string>(v, "type", "matrix");
    a.rank = get_or<Index>(v, "rank", a.rank);
    if (type == "matrix") {
      a.data = load_dense_csv(resolve(a.path));
      const auto axis = get_or<std::string>(v, "entity_axis", "rows");
      if (axis != "rows" && axis != "cols") {
        throw ValidationError("entity_axis must be 'rows' or 'cols'");
      }
      a.entities_are_rows = axis == "rows";
    } else if (type == "tensor") {
      a.data = load_sparse_tensor(resolve(a.path));
      a.entity_mode = get_or<int>(v, "entity_mode", 2);
      if (a.entity_mode < 0 || a.entity_mode > 2) {
        throw ValidationError("entity_mode must be 0, 1 or 2");
      }
    } else {
      throw ValidationError("view type must be 'matrix' or 'tensor', got '" + type + "'");
    }
    data.aspects.push_back(std::move(a));
  }
  if (cfg.labels_path.empty()) throw ValidationError("config needs 'labels'");
  data.truth = load_labels(resolve(cfg.labels_path), data.entities());
  cfg.threads = threads_from_env();
  return {cfg, data};
}

unsigned threads_from_env() {
  const char* env = std::getenv("KNH_THREADS");
  if (!env || !*env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  return v < 1 ? 1u : static_cast<unsigned>(v);
}

std::vector<Index> IntRange::values() const {
  std::vector<Index> out;
  for (Index v = first; v <= last; v += step) out.push_back(v);
  return out;
}

IntRange parse_range(const std::string& text) {
  static const std::regex pattern(R"(^\s*(\d+)(?:\.\.(\d+)(?::(\d+))?)?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) {
    throw ValidationError("range '" + text + "' is not of the form a..b[:step]");
  }
  IntRange r;
  r.first = std::stoll(m[1]);
  r.last = m[2].matched ? std::stoll(m[2]) : r.first;
  r.step = m[3].matched ? std::stoll(m[3]) : 1;
  if (r.step < 1 || r.last < r.first) {
    throw ValidationError("range '" + text + "' is empty");
  }
  return r;
}

}  // namespace knh
