#include "knh/errors.hpp"
#include "knh/ingest.hpp"

#include <set>

namespace knh {

SparseTensor3 build_tta_tensor(const TokenCorpus& corpus, const TtaOptions& opts) {
  if (opts.window < 2) throw ValidationError("tta: window must be at least 2");
  if (corpus.vocab_size < 1) throw ValidationError("tta: empty vocabulary");
  bool any_tokens = false;
  for (const auto& doc : corpus.documents) {
    for (auto t : doc) {
      if (t < 0 || t >= corpus.vocab_size) {
        throw ValidationError("tta: token id " + std::to_string(t) +
                              " outside the vocabulary");
      }
    }
    any_tokens = any_tokens || !doc.empty();
  }
  if (!any_tokens) throw ValidationError("tta: corpus has no tokens");

  std::vector<int> doc_freq(corpus.vocab_size, 0);
  for (const auto& doc : corpus.documents) {
    for (auto t : std::set<std::int64_t>(doc.begin(), doc.end())) ++doc_freq[t];
  }
  auto kept = [&](std::int64_t t) {
    return doc_freq[t] >= opts.min_document_frequency;
  };

  const auto n_docs = static_cast<std::int64_t>(corpus.documents.size());
  SparseTensor3 T(corpus.vocab_size, corpus.vocab_size, n_docs);
  for (std::int64_t d = 0; d < n_docs; ++d) {
    const auto& doc = corpus.documents[d];
    const auto len = doc.size();
    for (std::size_t p = 0; p < len; ++p) {
      for (std::size_t q = p + 1; q < len && q - p < static_cast<std::size_t>(opts.window); ++q) {
        const auto a = doc[p], b = doc[q];
        if (a == b || !kept(a) || !kept(b)) continue;
        T.add(a, b, d, 1.0);
        T.add(b, a, d, 1.0);
      }
    }
  }
  T.canonicalize();
  return T;
}

}  // namespace knh
