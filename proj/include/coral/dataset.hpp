// Labeled feature sets and the seeded per-class subsampling protocol.
#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "coral/errors.hpp"
#include "coral/types.hpp"

namespace coral {

/// Feature rows plus one integer class id per row. `num_classes` is
/// max(label) + 1; a class id may have zero examples (accepted for
/// evaluation, rejected by training operations).
struct LabeledDataset {
  Matrix features;
  Labels labels;
  int num_classes = 0;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
};

namespace detail {

inline std::vector<Index> shuffled_indices(Index n, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace detail

inline LabeledDataset make_dataset(Matrix features, Labels labels) {
  if (features.rows() < 1 || features.cols() < 1) {
    throw InputError("feature matrix must have at least one row and column");
  }
  if (!features.allFinite()) {
    throw InputError("feature matrix contains non-finite entries");
  }
  if (static_cast<Index>(labels.size()) != features.rows()) {
    std::ostringstream os;
    os << "label count " << labels.size() << " does not match feature rows "
       << features.rows();
    throw ShapeError(os.str());
  }
  int max_label = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      std::ostringstream os;
      os << "negative label " << labels[i] << " at row " << i;
      throw InputError(os.str());
    }
    max_label = std::max(max_label, labels[i]);
  }
  return LabeledDataset{std::move(features), std::move(labels), max_label + 1};
}

inline std::vector<int> class_counts(const LabeledDataset& data) {
  std::vector<int> counts(static_cast<size_t>(data.num_classes), 0);
  for (int label : data.labels) ++counts[static_cast<size_t>(label)];
  return counts;
}

/// Draw exactly `per_class` examples from every class, uniformly without
/// replacement. Deterministic given the seed.
inline LabeledDataset subsample(const LabeledDataset& data, int per_class,
                                uint64_t seed) {
  if (per_class < 1) {
    throw InputError("per-class sample count must be at least 1");
  }
  std::vector<std::vector<Index>> by_class(
      static_cast<size_t>(data.num_classes));
  for (Index i = 0; i < data.size(); ++i) {
    by_class[static_cast<size_t>(data.labels[static_cast<size_t>(i)])]
        .push_back(i);
  }

  std::mt19937_64 rng(seed);
  std::vector<Index> picked;
  picked.reserve(static_cast<size_t>(per_class) * by_class.size());
  for (size_t c = 0; c < by_class.size(); ++c) {
    if (static_cast<int>(by_class[c].size()) < per_class) {
      std::ostringstream os;
      os << "class " << c << " has " << by_class[c].size()
         << " examples, need " << per_class;
      throw ProtocolError(os.str());
    }
    auto order = detail::shuffled_indices(
        static_cast<Index>(by_class[c].size()), rng);
    for (int k = 0; k < per_class; ++k) {
      picked.push_back(by_class[c][static_cast<size_t>(order[k])]);
    }
  }

  Matrix features(static_cast<Index>(picked.size()), data.dim());
  Labels labels(picked.size());
  for (size_t i = 0; i < picked.size(); ++i) {
    features.row(static_cast<Index>(i)) = data.features.row(picked[i]);
    labels[i] = data.labels[static_cast<size_t>(picked[i])];
  }
  return LabeledDataset{std::move(features), std::move(labels),
                        data.num_classes};
}

}  // namespace coral
