#include "knh/errors.hpp"
#include "knh/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace knh {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view token, long line) {
  token = trim(token);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError("not a number: '" + std::string(token) + "'", line);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value '" + std::string(token) + "'", line);
  }
  return value;
}

std::int64_t parse_int(std::string_view token, long line) {
  token = trim(token);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError("not an integer: '" + std::string(token) + "'", line);
  }
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

// Reads the next non-blank line; returns false at end of file.
bool next_line(std::istream& in, std::string& line, long& number) {
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::vector<std::string_view> header_fields(std::string_view line,
                                            std::string_view tag, long number) {
  auto fields = split_ws(line);
  if (fields.empty() || fields.front() != tag) {
    throw ParseError("expected header '" + std::string(tag) + "'", number);
  }
  fields.erase(fields.begin());
  return fields;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Matrix load_dense_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  long number = 0;
  if (!next_line(in, line, number)) throw ParseError("missing header", 1);
  const auto header = split(trim(line), ',');
  if (header.size() != 2) throw ParseError("header must be 'rows,cols'", number);
  const auto rows = parse_int(header[0], number);
  const auto cols = parse_int(header[1], number);
  if (rows < 1 || cols < 1) throw ParseError("dimensions must be positive", number);

  Matrix m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r) {
    if (!next_line(in, line, number)) {
      throw ParseError("expected " + std::to_string(rows) + " rows, found " +
                           std::to_string(r),
                       number + 1);
    }
    const auto fields = split(trim(line), ',');
    if (static_cast<std::int64_t>(fields.size()) != cols) {
      throw ParseError("expected " + std::to_string(cols) + " values, found " +
                           std::to_string(fields.size()),
                       number);
    }
    for (std::int64_t c = 0; c < cols; ++c) m(r, c) = parse_double(fields[c], number);
  }
  if (next_line(in, line, number)) {
    throw ParseError("more rows than the header declares", number);
  }
  return m;
}

void save_dense_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  out << m.rows() << ',' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_number(m(r, c));
    }
    out << '\n';
  }
}

SparseTensor3 load_sparse_tensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  long number = 0;
  if (!next_line(in, line, number)) throw ParseError("missing header", 1);
  const auto dims = header_fields(trim(line), "%dims", number);
  if (dims.size() != 3) throw ParseError("header must be '%dims I J K'", number);
  const auto I = parse_int(dims[0], number), J = parse_int(dims[1], number),
             K = parse_int(dims[2], number);
  if (I < 1 || J < 1 || K < 1) throw ParseError("dimensions must be positive", number);
  SparseTensor3 t(I, J, K);
  while (next_line(in, line, number)) {
    const auto f = split_ws(line);
    if (f.size() != 4) throw ParseError("expected 'i j k value'", number);
    const auto i = parse_int(f[0], number), j = parse_int(f[1], number),
               k = parse_int(f[2], number);
    const double v = parse_double(f[3], number);
    if (i < 0 || i >= I || j < 0 || j >= J || k < 0 || k >= K) {
      throw ParseError("coordinate out of bounds", number);
    }
    t.add(i, j, k, v);
  }
  t.canonicalize();
  return t;
}

void save_sparse_tensor(const std::filesystem::path& path,
                        const SparseTensor3& t) {
  auto out = open_out(path);
  const auto& d = t.dims();
  out << "%dims " << d[0] << ' ' << d[1] << ' ' << d[2] << '\n';
  for (const auto& e : t.entries()) {
    out << e.i << ' ' << e.j << ' ' << e.k << ' ' << format_number(e.value) << '\n';
  }
}

LabelSet load_labels(const std::filesystem::path& path,
                     std::optional<Index> entities) {
  auto in = open_in(path);
  std::string line;
  long number = 0;
  std::vector<std::pair<Index, Label>> rows;
  Index largest = -1;
  while (next_line(in, line, number)) {
    const auto f = split(trim(line), ',');
    if (f.size() != 2) throw ParseError("expected 'entity_id,label'", number);
    const auto id = parse_int(f[0], number);
    const auto raw = parse_int(f[1], number);
    if (id < 0) throw ParseError("negative entity id", number);
    if (entities && id >= *entities) {
      throw ParseError("entity id " + std::to_string(id) + " exceeds " +
                           std::to_string(*entities) + " entities",
                       number);
    }
    Label l;
    switch (raw) {
      case 1: l = Label::Positive; break;
      case 0: l = Label::Negative; break;
      case -1: l = Label::Unknown; break;
      default: throw ParseError("label must be 1, 0 or -1", number);
    }
    rows.emplace_back(id, l);
    largest = std::max<Index>(largest, id);
  }
  LabelSet out;
  out.labels.assign(entities ? *entities : largest + 1, Label::Unknown);
  for (const auto& [id, l] : rows) out.labels[id] = l;
  return out;
}

void save_labels(const std::filesystem::path& path, const LabelSet& labels) {
  auto out = open_out(path);
  for (Index i = 0; i < labels.size(); ++i) {
    out << i << ',' << static_cast<int>(labels.labels[i]) << '\n';
  }
}

WeightedGraph load_graph(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  long number = 0;
  if (!next_line(in, line, number)) throw ParseError("missing header", 1);
  const auto header = header_fields(trim(line), "%nodes", number);
  if (header.size() != 1) throw ParseError("header must be '%nodes N'", number);
  const auto n = parse_int(header[0], number);
  if (n < 0) throw ParseError("node count must be >= 0", number);
  std::vector<Edge> edges;
  while (next_line(in, line, number)) {
    const auto f = split_ws(line);
    if (f.size() != 3) throw ParseError("expected 'u v weight'", number);
    const auto u = parse_int(f[0], number), v = parse_int(f[1], number);
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) {
      throw ParseError("invalid edge endpoints", number);
    }
    edges.push_back({u, v, parse_double(f[2], number)});
  }
  return WeightedGraph(n, std::move(edges));
}

void save_graph(const std::filesystem::path& path, const WeightedGraph& g) {
  auto out = open_out(path);
  out << "%nodes " << g.nodes() << '\n';
  for (const auto& e : g.edges()) {
    out << e.u << ' ' << e.v << ' ' << format_number(e.weight) << '\n';
  }
}

TokenCorpus load_corpus(const std::filesystem::path& path,
                        std::optional<std::int64_t> vocab_size) {
  auto in = open_in(path);
  TokenCorpus corpus;
  std::string line;
  long number = 0;
  std::int64_t largest = -1;
  while (std::getline(in, line)) {
    ++number;
    std::string_view body = line;
    std::string id = std::to_string(corpus.documents.size());
    if (const auto tab = body.find('\t'); tab != std::string_view::npos) {
      id = std::string(trim(body.substr(0, tab)));
      body = body.substr(tab + 1);
    }
    std::vector<std::int64_t> doc;
    for (auto tok : split_ws(body)) {
      const auto t = parse_int(tok, number);
      if (t < 0) throw ParseError("negative token id", number);
      largest = std::max(largest, t);
      doc.push_back(t);
    }
    corpus.documents.push_back(std::move(doc));
    corpus.doc_ids.push_back(std::move(id));
  }
  corpus.vocab_size = vocab_size ? *vocab_size : largest + 1;
  return corpus;
}

}  // namespace knh
