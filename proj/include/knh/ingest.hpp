#pragma once

#include "knh/correlate.hpp"
#include "knh/graph.hpp"
#include "knh/linalg.hpp"
#include "knh/propagate.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace knh {

// ---------------------------------------------------------------------------
// File formats
//
//   dense matrix  : "rows,cols" then one comma-separated row per line
//   sparse tensor : "%dims I J K" then "i j k value" lines (0-based)
//   labels        : "entity_id,label" lines, label in {1, 0, -1}
//   graph         : "%nodes N" then "u v weight" lines (0-based, u < v)
//
// Numbers are written with 17 significant digits so a save/load round trip
// is exact. Loaders reject NaN and infinities and report the offending line.
// ---------------------------------------------------------------------------

Matrix load_dense_csv(const std::filesystem::path& path);
void save_dense_csv(const std::filesystem::path& path, const Matrix& m);

SparseTensor3 load_sparse_tensor(const std::filesystem::path& path);
void save_sparse_tensor(const std::filesystem::path& path,
                        const SparseTensor3& t);

/// Entities missing from the file are Unknown. With no `entities` count the
/// set is sized to the largest id + 1.
LabelSet load_labels(const std::filesystem::path& path,
                     std::optional<Index> entities = std::nullopt);
void save_labels(const std::filesystem::path& path, const LabelSet& labels);

WeightedGraph load_graph(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const WeightedGraph& g);

/// Shortest decimal text that reads back to exactly `x` (17 significant
/// digits).
std::string format_number(double x);

// ---------------------------------------------------------------------------
// (Term, Term, Article) co-occurrence tensor
// ---------------------------------------------------------------------------

struct TokenCorpus {
  std::vector<std::vector<std::int64_t>> documents;
  std::int64_t vocab_size = 0;
  std::vector<std::string> doc_ids;
};

struct TtaOptions {
  /// Tokens at positions p < q co-occur when q - p < window.
  int window = 5;
  /// Pairs involving a term seen in fewer documents than this are dropped.
  int min_document_frequency = 1;
};

/// Entry (w1, w2, d) counts the position pairs of document d holding w1 and
/// w2 within one window. Symmetric in the term modes; equal-term pairs are
/// excluded. Shape is vocab x vocab x documents.
SparseTensor3 build_tta_tensor(const TokenCorpus& corpus,
                               const TtaOptions& opts = {});

/// Whitespace-separated token ids, one document per line. Ids are
/// "doc_id<TAB>tokens..." when a tab is present.
TokenCorpus load_corpus(const std::filesystem::path& path,
                        std::optional<std::int64_t> vocab_size = std::nullopt);

// ---------------------------------------------------------------------------
// Synthetic multi-view benchmark
// ---------------------------------------------------------------------------

struct SynthSpec {
  Index n_entities = 300;
  Index n_clusters = 2;
  Index latent_dim = 4;
  std::vector<Index> view_dims{30, 40};
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  /// Distance between any two cluster centres in latent space.
  double separation = 2.0;
  /// Standard deviation of entity latents around their centre.
  double cluster_spread = 0.25;
};

struct SynthData {
  std::vector<ViewMatrix> views;
  LabelSet truth;
  std::vector<Index> cluster;
};

/// Entities are assigned round-robin to clusters; each draws a latent vector
/// around its cluster centre, which every view maps through its own random
/// linear map before adding independent Gaussian noise. Odd clusters are
/// labelled positive.
SynthData synth_views(const SynthSpec& spec);

/// synth_views restricted to exactly two views.
SynthData synth_two_view(const SynthSpec& spec);

/// Leave-one-out 1-nearest-neighbour accuracy of the rows of X (ties to the
/// lower index) over entities with a known label.
double one_nn_accuracy(const Matrix& X, const LabelSet& truth);

}  // namespace knh
