#include "knh/errors.hpp"
#include "knh/ingest.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace knh;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("knh_ingest_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name, const std::string& body = "") const {
    const fs::path p = path / name;
    if (!body.empty()) std::ofstream(p) << body;
    return p;
  }
};

long parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("tta tensor on small documents") {
  TokenCorpus c{{{0, 1, 2}, {2, 2, 0}}, 3, {"a", "b"}};
  const SparseTensor3 w2 = build_tta_tensor(c, {.window = 2});
  CHECK(w2.at(0, 1, 0) == 1.0);
  CHECK(w2.at(1, 0, 0) == 1.0);
  CHECK(w2.at(1, 2, 0) == 1.0);
  CHECK(w2.at(0, 2, 0) == 0.0);
  CHECK(w2.at(2, 2, 1) == 0.0);  // equal tokens never pair
  CHECK(w2.at(2, 0, 1) == 1.0);
  const SparseTensor3 w3 = build_tta_tensor(c, {.window = 3});
  CHECK(w3.at(0, 2, 0) == 1.0);
  CHECK(w3.at(2, 0, 1) == 2.0);  // both 2s reach the 0
  CHECK(w3.dims() == std::array<Index, 3>{3, 3, 2});
}

TEST_CASE("tta tensor matches the position-pair enumeration") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> tok(0, 11);
  TokenCorpus c;
  c.vocab_size = 12;
  for (int d = 0; d < 8; ++d) {
    std::vector<std::int64_t> doc(10 + d);
    for (auto& t : doc) t = tok(rng);
    c.documents.push_back(doc);
  }
  for (int window : {2, 4, 7}) {
    const SparseTensor3 T = build_tta_tensor(c, {.window = window});
    const auto expected = oracle::enumerate_cooccurrences(c, window);
    CHECK(T.nnz() == static_cast<Index>(expected.size()));
    for (const auto& [key, value] : expected) {
      const auto [a, b, d] = key;
      CHECK(T.at(a, b, d) == value);
    }
  }
}

TEST_CASE("tta document-frequency filter and validation") {
  TokenCorpus c{{{0, 1, 2}, {0, 1}}, 4, {}};
  const SparseTensor3 T = build_tta_tensor(c, {.window = 5, .min_document_frequency = 2});
  CHECK(T.at(0, 1, 0) == 1.0);
  CHECK(T.at(0, 2, 0) == 0.0);
  CHECK(T.at(1, 2, 0) == 0.0);
  CHECK_THROWS_AS(build_tta_tensor(c, {.window = 1}), ValidationError);
  CHECK_THROWS_AS(build_tta_tensor(TokenCorpus{{{0, 5}}, 3, {}}), ValidationError);
  CHECK_THROWS_AS(build_tta_tensor(TokenCorpus{{{}}, 3, {}}), ValidationError);
}

TEST_CASE("file round trips are exact") {
  TempDir tmp;
  Matrix M = oracle::random_matrix(7, 4, 1);
  M(0, 0) = 0.1;
  M(1, 1) = -1e-300;
  M(2, 2) = 123456789.123456789;
  save_dense_csv(tmp.file("m.csv"), M);
  CHECK(load_dense_csv(tmp.file("m.csv")) == M);

  SparseTensor3 T(3, 4, 5);
  T.add(2, 3, 4, 1.0 / 3.0);
  T.add(0, 0, 0, -2.5);
  T.canonicalize();
  save_sparse_tensor(tmp.file("t.txt"), T);
  const SparseTensor3 U = load_sparse_tensor(tmp.file("t.txt"));
  CHECK(U.dims() == T.dims());
  CHECK(U.at(2, 3, 4) == 1.0 / 3.0);
  CHECK(U.nnz() == 2);

  LabelSet L;
  L.labels = {Label::Positive, Label::Unknown, Label::Negative};
  save_labels(tmp.file("l.csv"), L);
  CHECK(load_labels(tmp.file("l.csv")).labels == L.labels);

  const WeightedGraph G(4, {{0, 3, 0.7}, {1, 2, 1e-5}});
  save_graph(tmp.file("g.txt"), G);
  const WeightedGraph H = load_graph(tmp.file("g.txt"));
  CHECK(H.nodes() == 4);
  CHECK(H.edges() == G.edges());

  for (double x : {0.1, 1.0 / 7.0, -3e-17, 1e300})
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("parse errors name the offending line") {
  TempDir tmp;
  CHECK(parse_error_line([&] { load_dense_csv(tmp.file("a.csv", "2,2\n1,2\n3,x\n")); }) == 3);
  CHECK(parse_error_line([&] { load_dense_csv(tmp.file("b.csv", "2,2\n1,2\n")); }) > 0);
  CHECK(parse_error_line([&] { load_dense_csv(tmp.file("c.csv", "1,2\n1,nan\n")); }) == 2);
  CHECK(parse_error_line([&] { load_dense_csv(tmp.file("d.csv", "1,2\n1,inf\n")); }) == 2);
  CHECK(parse_error_line([&] { load_dense_csv(tmp.file("e.csv", "1,2\n1,2\n3,4\n")); }) == 3);
  CHECK(parse_error_line([&] { load_sparse_tensor(tmp.file("f.txt", "%dims 2 2 2\n0 0 0 1\n0 2 0 1\n")); }) == 3);
  CHECK(parse_error_line([&] { load_sparse_tensor(tmp.file("g.txt", "dims 2 2 2\n")); }) == 1);
  CHECK(parse_error_line([&] { load_labels(tmp.file("h.csv", "0,1\n1,2\n")); }) == 2);
  CHECK(parse_error_line([&] { load_labels(tmp.file("i.csv", "0,1\n5,0\n"), 3); }) == 2);
  CHECK(parse_error_line([&] { load_graph(tmp.file("j.txt", "%nodes 3\n0 1 1\n\n1 1 2\n")); }) == 4);
  CHECK_THROWS_AS(load_dense_csv(tmp.path / "missing.csv"), Error);
}

TEST_CASE("labels missing from the file are unknown") {
  TempDir tmp;
  const LabelSet L = load_labels(tmp.file("l.csv", "0,1\n3,0\n"), 6);
  CHECK(L.labels == std::vector<Label>{Label::Positive, Label::Unknown, Label::Unknown,
                                       Label::Negative, Label::Unknown, Label::Unknown});
  CHECK(load_labels(tmp.file("m.csv", "2,0\n")).size() == 3);
}

TEST_CASE("corpus loading") {
  TempDir tmp;
  const TokenCorpus c = load_corpus(tmp.file("c.txt", "art1\t0 3 1\n2 2\n"));
  CHECK(c.documents.size() == 2);
  CHECK(c.doc_ids == std::vector<std::string>{"art1", "1"});
  CHECK(c.vocab_size == 4);
  CHECK(parse_error_line([&] { load_corpus(tmp.file("d.txt", "0 1\n2 -1\n")); }) == 2);
}

TEST_CASE("synthetic views") {
  SynthSpec spec;
  spec.n_entities = 60;
  spec.view_dims = {8, 9};
  spec.seed = 3;
  const SynthData a = synth_two_view(spec), b = synth_two_view(spec);
  CHECK(a.views[0].values == b.views[0].values);
  CHECK(a.views[1].values == b.views[1].values);
  CHECK(a.truth.count(Label::Positive) == 30);
  CHECK(a.cluster[0] == 0);
  CHECK(a.cluster[1] == 1);
  spec.seed = 4;
  CHECK(synth_two_view(spec).views[0].values != a.views[0].values);

  spec.noise_sigma = 0.0;
  spec.n_entities = 200;
  const SynthData clean = synth_two_view(spec);
  CHECK(one_nn_accuracy(clean.views[0].values, clean.truth) == 1.0);

  spec.noise_sigma = 50.0;
  const SynthData noisy = synth_two_view(spec);
  const double acc = one_nn_accuracy(noisy.views[0].values, noisy.truth);
  CHECK(acc > 0.35);
  CHECK(acc < 0.65);
}

TEST_CASE("noiseless views share their latent space exactly") {
  SynthSpec spec;
  spec.n_entities = 100;
  spec.view_dims = {12, 15};
  spec.seed = 9;
  const SynthData data = synth_two_view(spec);
  const CanonicalProjection p = cca(data.views[0], data.views[1], 1, 1e-10);
  CHECK(p.correlations[0] >= 0.99);
}

TEST_CASE("synth validation") {
  SynthSpec spec;
  spec.n_clusters = 1;
  CHECK_THROWS_AS(synth_views(spec), ValidationError);
  spec = {};
  spec.noise_sigma = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(synth_views(spec), ValidationError);
  spec = {};
  spec.view_dims = {3, 4, 5};
  CHECK_THROWS_AS(synth_two_view(spec), ValidationError);
  CHECK_THROWS_AS(one_nn_accuracy(Matrix::Zero(3, 2), LabelSet{{Label::Positive}}),
                  ValidationError);
}
