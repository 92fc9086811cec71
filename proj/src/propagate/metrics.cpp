#include "knh/errors.hpp"
#include "knh/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace knh {

Classification classify(const Beliefs& b) {
  Classification out;
  out.labels.labels.resize(b.values.size());
  out.tie.resize(b.values.size());
  for (Index i = 0; i < b.values.size(); ++i) {
    out.labels.labels[i] = b.values(i) > 0 ? Label::Positive : Label::Negative;
    out.tie[i] = b.values(i) == 0.0;
  }
  return out;
}

LabelSplit split_labels(const LabelSet& truth, double train_frac,
                        std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ValidationError("split_labels: train_frac must lie in (0, 1)");
  }
  LabelSplit out;
  out.priors.labels.assign(truth.size(), Label::Unknown);
  out.heldout.assign(truth.size(), false);

  std::mt19937_64 rng(seed);
  for (Label cls : {Label::Positive, Label::Negative}) {
    std::vector<Index> members;
    for (Index i = 0; i < truth.size(); ++i)
      if (truth.labels[i] == cls) members.push_back(i);
    if (members.size() < 2) {
      throw ValidationError(std::string("split_labels: ") +
                            (cls == Label::Positive ? "positive" : "negative") +
                            " class has fewer than 2 members");
    }
    std::shuffle(members.begin(), members.end(), rng);
    // The epsilon keeps products such as 0.29 * 100 from flooring low.
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::floor(train_frac * static_cast<double>(members.size()) + 1e-9)));
    for (std::size_t r = 0; r < members.size(); ++r) {
      if (r < take) {
        out.priors.labels[members[r]] = cls;
      } else {
        out.heldout[members[r]] = true;
      }
    }
  }
  return out;
}

Metrics metrics_from_counts(Index tp, Index fp, Index fn, Index tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  const auto ratio = [](Index num, Index den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  return m;
}

Metrics evaluate(const LabelSet& pred, const LabelSet& truth,
                 const std::vector<bool>& heldout) {
  if (pred.size() != truth.size() ||
      static_cast<Index>(heldout.size()) != truth.size()) {
    throw ValidationError("evaluate: prediction, truth and mask sizes differ");
  }
  Index tp = 0, fp = 0, fn = 0, tn = 0;
  for (Index i = 0; i < truth.size(); ++i) {
    if (!heldout[i] || truth.labels[i] == Label::Unknown) continue;
    const bool actual = truth.labels[i] == Label::Positive;
    const bool predicted = pred.labels[i] == Label::Positive;
    if (actual && predicted) ++tp;
    else if (!actual && predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  if (tp + fp + fn + tn == 0) {
    throw ValidationError("evaluate: held-out set is empty");
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

}  // namespace knh
