// One-vs-rest L2-regularized linear SVM with hinge loss, trained by a
// deterministic dual coordinate descent solver.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "coral/dataset.hpp"
#include "coral/errors.hpp"
#include "coral/types.hpp"

namespace coral {

/// Linear decision directions of the base classifier. A binary problem
/// stores one direction (class 1 vs class 0); multi-class stores one row
/// per class. The bias is kept out of `weights` so weight-space transforms
/// leave it untouched.
struct LinearModel {
  Matrix weights;  // rows x D; rows == (num_classes == 2 ? 1 : num_classes)
  Vector biases;   // one per weight row
  double C = 1.0;
  int num_classes = 0;

  Index dim() const { return weights.cols(); }
  Index rows() const { return weights.rows(); }
};

namespace detail {

// Dual coordinate descent for min_w 1/2 ||w||^2 + C sum_i max(0, 1 - y_i w.x_i)
// (LIBLINEAR's L1-loss dual). The bias rides along as an appended constant
// feature of value 1, so it is part of the regularized vector here; it is
// split back out by the caller. Epoch permutations come from a fixed seed,
// which makes training bitwise reproducible.
inline Vector solve_binary_hinge(const Matrix& features,
                                 const std::vector<double>& sign, double C) {
  const Index n = features.rows();
  const Index d = features.cols();  // includes the bias column

  Vector diag_q(n);
  for (Index i = 0; i < n; ++i) diag_q(i) = features.row(i).squaredNorm();

  Vector w = Vector::Zero(d);
  Vector alpha = Vector::Zero(n);

  constexpr int kMaxEpochs = 1000;
  constexpr double kTol = 1e-8;
  std::mt19937_64 rng(0x5eed);

  for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
    auto order = shuffled_indices(n, rng);
    double worst = 0.0;
    for (Index k = 0; k < n; ++k) {
      const Index i = order[static_cast<size_t>(k)];
      const double y = sign[static_cast<size_t>(i)];
      const double g = y * features.row(i).dot(w) - 1.0;

      double pg = g;
      if (alpha(i) <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha(i) >= C) {
        pg = std::max(g, 0.0);
      }
      worst = std::max(worst, std::abs(pg));

      if (std::abs(pg) > 1e-12) {
        const double old = alpha(i);
        alpha(i) = std::min(std::max(old - g / diag_q(i), 0.0), C);
        w += (alpha(i) - old) * y * features.row(i).transpose();
      }
    }
    if (worst < kTol) break;
  }
  return w;
}

}  // namespace detail

/// Train the one-vs-rest linear SVM. Deterministic given (data, C).
inline LinearModel train_linear_svm(const LabeledDataset& data, double C) {
  if (C <= 0.0) throw InputError("SVM cost C must be positive");
  if (!data.features.allFinite()) {
    throw InputError("training features contain non-finite entries");
  }
  if (data.size() < 2) {
    throw ProtocolError("training needs at least two examples");
  }
  const auto counts = class_counts(data);
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      std::ostringstream os;
      os << "degenerate labels: class " << c << " has no examples";
      throw ProtocolError(os.str());
    }
  }
  if (data.num_classes < 2) {
    throw ProtocolError("degenerate labels: need at least two classes");
  }

  const Index n = data.size();
  const Index d = data.dim();
  Matrix augmented(n, d + 1);
  augmented.leftCols(d) = data.features;
  augmented.col(d).setOnes();

  const Index rows = data.num_classes == 2 ? 1 : data.num_classes;
  LinearModel model;
  model.weights.resize(rows, d);
  model.biases.resize(rows);
  model.C = C;
  model.num_classes = data.num_classes;

  std::vector<double> sign(static_cast<size_t>(n));
  for (Index r = 0; r < rows; ++r) {
    // Binary problems train class 1 against class 0; one-vs-rest otherwise.
    const int positive = data.num_classes == 2 ? 1 : static_cast<int>(r);
    for (Index i = 0; i < n; ++i) {
      sign[static_cast<size_t>(i)] =
          data.labels[static_cast<size_t>(i)] == positive ? 1.0 : -1.0;
    }
    const Vector w = detail::solve_binary_hinge(augmented, sign, C);
    model.weights.row(r) = w.head(d).transpose();
    model.biases(r) = w(d);
  }
  return model;
}

/// Per-class scores w.x + b, one column per class. For binary models the
/// two columns are the stored direction and its negation.
inline Matrix decision_function(const LinearModel& model, const Matrix& F) {
  if (F.cols() != model.dim()) {
    std::ostringstream os;
    os << "feature dimension " << F.cols() << " does not match model "
       << model.dim();
    throw ShapeError(os.str());
  }
  if (model.num_classes == 2) {
    const Vector s = F * model.weights.row(0).transpose() +
                     Vector::Constant(F.rows(), model.biases(0));
    Matrix scores(F.rows(), 2);
    scores.col(0) = -s;
    scores.col(1) = s;
    return scores;
  }
  return (F * model.weights.transpose()).rowwise() +
         model.biases.transpose();
}

/// Argmax over class scores; ties break toward the smallest class id.
inline Labels predict(const LinearModel& model, const Matrix& F) {
  const Matrix scores = decision_function(model, F);
  Labels out(static_cast<size_t>(F.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    int best = 0;
    double best_score = scores(i, 0);
    for (Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > best_score) {
        best_score = scores(i, c);
        best = static_cast<int>(c);
      }
    }
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

/// Fraction of exact label matches.
inline double accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size()) {
    std::ostringstream os;
    os << "label vectors differ in length: " << predicted.size() << " vs "
       << truth.size();
    throw ShapeError(os.str());
  }
  if (predicted.empty()) throw InputError("accuracy of empty label vectors");
  size_t hits = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

namespace detail {

inline LabeledDataset take_rows(const LabeledDataset& data,
                                const std::vector<Index>& rows) {
  Matrix features(static_cast<Index>(rows.size()), data.dim());
  Labels labels(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    features.row(static_cast<Index>(i)) = data.features.row(rows[i]);
    labels[i] = data.labels[static_cast<size_t>(rows[i])];
  }
  return LabeledDataset{std::move(features), std::move(labels),
                        data.num_classes};
}

}  // namespace detail

/// Pick C from the grid by stratified k-fold cross-validation accuracy.
/// Ties break toward the smallest C; fold assignment is seeded.
inline double cross_validate_C(const LabeledDataset& data,
                               const std::vector<double>& grid, int folds,
                               uint64_t seed) {
  if (grid.empty()) throw InputError("cross-validation grid is empty");
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  const auto counts = class_counts(data);
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < folds) {
      std::ostringstream os;
      os << "class " << c << " has " << counts[c]
         << " examples, cannot stratify into " << folds << " folds";
      throw ProtocolError(os.str());
    }
  }

  // Stratified assignment: shuffle within each class, deal round-robin.
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(static_cast<size_t>(data.size()), 0);
  std::vector<std::vector<Index>> by_class(
      static_cast<size_t>(data.num_classes));
  for (Index i = 0; i < data.size(); ++i) {
    by_class[static_cast<size_t>(data.labels[static_cast<size_t>(i)])]
        .push_back(i);
  }
  for (auto& members : by_class) {
    auto order =
        detail::shuffled_indices(static_cast<Index>(members.size()), rng);
    for (size_t k = 0; k < members.size(); ++k) {
      fold_of[static_cast<size_t>(members[static_cast<size_t>(order[k])])] =
          static_cast<int>(k % static_cast<size_t>(folds));
    }
  }

  std::vector<double> sorted_grid = grid;
  std::sort(sorted_grid.begin(), sorted_grid.end());

  double best_c = sorted_grid.front();
  double best_acc = -1.0;
  for (double c : sorted_grid) {
    double acc_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<Index> train_rows, val_rows;
      for (Index i = 0; i < data.size(); ++i) {
        (fold_of[static_cast<size_t>(i)] == f ? val_rows : train_rows)
            .push_back(i);
      }
      const LabeledDataset train = detail::take_rows(data, train_rows);
      const LabeledDataset val = detail::take_rows(data, val_rows);
      const LinearModel model = train_linear_svm(train, c);
      acc_sum += accuracy(predict(model, val.features), val.labels);
    }
    const double mean_acc = acc_sum / folds;
    if (mean_acc > best_acc) {
      best_acc = mean_acc;
      best_c = c;
    }
  }
  return best_c;
}

}  // namespace coral
