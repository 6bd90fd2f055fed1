// Copyright 2025 The toneprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "toneprobe/probe/ridge.h"

#include <Eigen/Dense>

#include "toneprobe/common/error.h"
#include "toneprobe/common/strings.h"

namespace toneprobe::probe {

using strings::strf;

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

}  // namespace

// ---------------------------------------------------------------------------
// RidgeStats

RidgeStats::RidgeStats(size_t dim, int n_classes)
    : dim_(dim), n_classes_(n_classes) {
  if (dim == 0) throw Error("ridge statistics need at least one feature dimension");
  if (n_classes < 2) {
    throw Error(strf("ridge statistics need at least two classes, got %d", n_classes));
  }
  class_counts_.assign(static_cast<size_t>(n_classes), 0);
  feature_sum_.assign(dim, 0.0);
  class_sums_.assign(static_cast<size_t>(n_classes) * dim, 0.0);
  gram_.assign(dim * dim, 0.0);
  scratch_.assign(dim, 0.0);
}

void RidgeStats::add(std::span<const float> x, int class_index) {
  if (x.size() != dim_) {
    throw Error(strf("feature row has %zu dimensions, statistics expect %zu",
                     x.size(), dim_));
  }
  if (class_index < 0 || class_index >= n_classes_) {
    throw Error(strf("class index %d outside [0, %d)", class_index, n_classes_));
  }
  for (size_t d = 0; d < dim_; ++d) scratch_[d] = static_cast<double>(x[d]);

  ConstVectorMap v(scratch_.data(), static_cast<Eigen::Index>(dim_));
  VectorMap sum(feature_sum_.data(), static_cast<Eigen::Index>(dim_));
  VectorMap class_sum(class_sums_.data() + static_cast<size_t>(class_index) * dim_,
                      static_cast<Eigen::Index>(dim_));
  MatrixMap gram(gram_.data(), static_cast<Eigen::Index>(dim_),
                 static_cast<Eigen::Index>(dim_));

  sum += v;
  class_sum += v;
  gram.selfadjointView<Eigen::Upper>().rankUpdate(v);
  ++class_counts_[static_cast<size_t>(class_index)];
  ++count_;
}

void RidgeStats::merge(const RidgeStats& other) {
  if (other.dim_ != dim_ || other.n_classes_ != n_classes_) {
    throw Error("cannot merge ridge statistics of different shapes");
  }
  count_ += other.count_;
  for (size_t c = 0; c < class_counts_.size(); ++c) class_counts_[c] += other.class_counts_[c];
  for (size_t i = 0; i < feature_sum_.size(); ++i) feature_sum_[i] += other.feature_sum_[i];
  for (size_t i = 0; i < class_sums_.size(); ++i) class_sums_[i] += other.class_sums_[i];
  for (size_t i = 0; i < gram_.size(); ++i) gram_[i] += other.gram_[i];
}

void RidgeStats::remove(const RidgeStats& other) {
  if (other.dim_ != dim_ || other.n_classes_ != n_classes_) {
    throw Error("cannot subtract ridge statistics of different shapes");
  }
  if (other.count_ > count_) {
    throw Error("cannot subtract ridge statistics: subset larger than the whole");
  }
  count_ -= other.count_;
  for (size_t c = 0; c < class_counts_.size(); ++c) class_counts_[c] -= other.class_counts_[c];
  for (size_t i = 0; i < feature_sum_.size(); ++i) feature_sum_[i] -= other.feature_sum_[i];
  for (size_t i = 0; i < class_sums_.size(); ++i) class_sums_[i] -= other.class_sums_[i];
  for (size_t i = 0; i < gram_.size(); ++i) gram_[i] -= other.gram_[i];
}

int64_t RidgeStats::class_count(int class_index) const {
  if (class_index < 0 || class_index >= n_classes_) {
    throw Error(strf("class index %d outside [0, %d)", class_index, n_classes_));
  }
  return class_counts_[static_cast<size_t>(class_index)];
}

// ---------------------------------------------------------------------------
// Fitting

RidgeModel fit_ridge(const RidgeStats& stats, const RidgeOptions& opts) {
  if (stats.count_ == 0) throw Error("cannot fit a ridge model on zero rows");
  if (!(opts.alpha > 0.0)) {
    throw Error(strf("regularization strength must be positive, got %g", opts.alpha));
  }
  const auto dim = static_cast<Eigen::Index>(stats.dim_);
  const auto n_classes = static_cast<Eigen::Index>(stats.n_classes_);
  const double n = static_cast<double>(stats.count_);

  ConstMatrixMap gram(stats.gram_.data(), dim, dim);
  ConstVectorMap s(stats.feature_sum_.data(), dim);

  // Normal-equation matrix A = Xc' Xc + alpha I, from the raw Gram matrix:
  // sum (x - m)(x - m)' = sum x x' - s s' / n.
  RowMajorMatrix a = gram.selfadjointView<Eigen::Upper>();
  if (opts.center) a.noalias() -= (s * s.transpose()) / n;
  a.diagonal().array() += opts.alpha;

  // Right-hand side: Xc' Y for +1/-1 one-vs-rest targets. Column c of the raw
  // product is 2 s_c - s; centering the features replaces it with
  // 2 (s_c - s n_c / n) because the centered columns sum to zero.
  RowMajorMatrix rhs(dim, n_classes);
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    ConstVectorMap s_c(stats.class_sums_.data() + static_cast<size_t>(c) * stats.dim_, dim);
    const double n_c = static_cast<double>(stats.class_counts_[static_cast<size_t>(c)]);
    if (opts.center) {
      rhs.col(c) = 2.0 * (s_c - s * (n_c / n));
    } else {
      rhs.col(c) = 2.0 * s_c - s;
    }
  }

  // The system is symmetric positive definite (PSD Gram plus alpha I), so
  // Cholesky applies; fall back to the more forgiving LDLT if rounding makes
  // the leading minors collapse at very small alpha.
  RowMajorMatrix w;
  Eigen::LLT<RowMajorMatrix> llt(a.selfadjointView<Eigen::Upper>());
  if (llt.info() == Eigen::Success) {
    w = llt.solve(rhs);
  } else {
    Eigen::LDLT<RowMajorMatrix> ldlt(a.selfadjointView<Eigen::Upper>());
    if (ldlt.info() != Eigen::Success) {
      throw Error(strf("ridge normal equations are not solvable at alpha %g", opts.alpha));
    }
    w = ldlt.solve(rhs);
  }

  RidgeModel model;
  model.dim = stats.dim_;
  model.n_classes = stats.n_classes_;
  model.alpha = opts.alpha;
  model.centered = opts.center;
  model.feature_mean.assign(stats.dim_, 0.0);
  model.intercepts.assign(static_cast<size_t>(stats.n_classes_), 0.0);
  if (opts.center) {
    for (size_t d = 0; d < stats.dim_; ++d) model.feature_mean[d] = stats.feature_sum_[d] / n;
    for (int c = 0; c < stats.n_classes_; ++c) {
      const double n_c = static_cast<double>(stats.class_counts_[static_cast<size_t>(c)]);
      model.intercepts[static_cast<size_t>(c)] = (2.0 * n_c - n) / n;
    }
  }
  model.weights.assign(static_cast<size_t>(dim) * static_cast<size_t>(n_classes), 0.0);
  MatrixMap(model.weights.data(), dim, n_classes) = w;
  return model;
}

RidgeStats accumulate_ridge_stats(const MatrixF& features,
                                  const std::vector<int>& classes,
                                  const std::vector<uint32_t>& rows, int n_classes) {
  if (features.rows != classes.size()) {
    throw Error(strf("feature matrix has %zu rows but %zu class labels supplied",
                     features.rows, classes.size()));
  }
  RidgeStats stats(features.cols, n_classes);
  for (uint32_t r : rows) {
    if (r >= features.rows) {
      throw Error(strf("row index %u outside feature matrix of %zu rows", r, features.rows));
    }
    stats.add(features.row_span(r), classes[r]);
  }
  return stats;
}

RidgeModel fit_ridge_ovr(const MatrixF& features, const std::vector<int>& classes,
                         const std::vector<uint32_t>& rows, int n_classes,
                         const RidgeOptions& opts) {
  return fit_ridge(accumulate_ridge_stats(features, classes, rows, n_classes), opts);
}

RidgeModel fit_ridge_rows(const MatrixF& features, const std::vector<int>& classes,
                          const std::vector<uint32_t>& rows, int n_classes,
                          const RidgeOptions& opts) {
  if (rows.size() >= features.cols) {
    return fit_ridge_ovr(features, classes, rows, n_classes, opts);
  }
  if (rows.empty()) throw Error("cannot fit a ridge model on zero rows");
  if (!(opts.alpha > 0.0)) {
    throw Error(strf("regularization strength must be positive, got %g", opts.alpha));
  }
  if (n_classes < 2) {
    throw Error(strf("ridge fitting needs at least two classes, got %d", n_classes));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(features.cols);
  const auto c = static_cast<Eigen::Index>(n_classes);

  std::vector<int64_t> class_counts(static_cast<size_t>(n_classes), 0);
  RowMajorMatrix xc(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const uint32_t r = rows[static_cast<size_t>(i)];
    if (r >= features.rows) {
      throw Error(strf("row index %u outside feature matrix of %zu rows", r, features.rows));
    }
    const int cls = classes[r];
    if (cls < 0 || cls >= n_classes) {
      throw Error(strf("class index %d outside [0, %d)", cls, n_classes));
    }
    ++class_counts[static_cast<size_t>(cls)];
    const float* src = features.row(r);
    for (Eigen::Index j = 0; j < d; ++j) xc(i, j) = static_cast<double>(src[j]);
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  if (opts.center) {
    mean = xc.colwise().mean();
    xc.rowwise() -= mean.transpose();
  }

  // Kernel system: (Xc Xc' + alpha I) beta = Y, then W = Xc' beta. This is
  // the textbook identity (A'A + aI)^-1 A' = A'(AA' + aI)^-1 applied to the
  // centered design, so it solves the same normal equations as fit_ridge.
  RowMajorMatrix kernel = xc * xc.transpose();
  kernel.diagonal().array() += opts.alpha;
  RowMajorMatrix targets = RowMajorMatrix::Constant(n, c, -1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    targets(i, classes[rows[static_cast<size_t>(i)]]) = 1.0;
  }

  RowMajorMatrix beta;
  Eigen::LLT<RowMajorMatrix> llt(kernel);
  if (llt.info() == Eigen::Success) {
    beta = llt.solve(targets);
  } else {
    Eigen::LDLT<RowMajorMatrix> ldlt(kernel);
    if (ldlt.info() != Eigen::Success) {
      throw Error(strf("ridge kernel system is not solvable at alpha %g", opts.alpha));
    }
    beta = ldlt.solve(targets);
  }
  RowMajorMatrix w = xc.transpose() * beta;

  RidgeModel model;
  model.dim = features.cols;
  model.n_classes = n_classes;
  model.alpha = opts.alpha;
  model.centered = opts.center;
  model.feature_mean.assign(features.cols, 0.0);
  model.intercepts.assign(static_cast<size_t>(n_classes), 0.0);
  if (opts.center) {
    for (Eigen::Index j = 0; j < d; ++j) model.feature_mean[static_cast<size_t>(j)] = mean(j);
    for (int k = 0; k < n_classes; ++k) {
      const double n_k = static_cast<double>(class_counts[static_cast<size_t>(k)]);
      model.intercepts[static_cast<size_t>(k)] =
          (2.0 * n_k - static_cast<double>(n)) / static_cast<double>(n);
    }
  }
  model.weights.assign(static_cast<size_t>(d) * static_cast<size_t>(c), 0.0);
  MatrixMap(model.weights.data(), d, c) = w;
  return model;
}

// ---------------------------------------------------------------------------
// Prediction

void RidgeModel::scores(std::span<const float> x, std::span<double> out) const {
  if (x.size() != dim) {
    throw Error(strf("input has %zu dimensions, model expects %zu", x.size(), dim));
  }
  if (out.size() != static_cast<size_t>(n_classes)) {
    throw Error("score buffer size does not match the class count");
  }
  for (int c = 0; c < n_classes; ++c) out[static_cast<size_t>(c)] = intercepts[static_cast<size_t>(c)];
  const size_t c_count = static_cast<size_t>(n_classes);
  for (size_t d = 0; d < dim; ++d) {
    const double xd = static_cast<double>(x[d]) - feature_mean[d];
    const double* w_row = weights.data() + d * c_count;
    for (size_t c = 0; c < c_count; ++c) out[c] += xd * w_row[c];
  }
}

int RidgeModel::predict(std::span<const float> x) const {
  std::vector<double> s(static_cast<size_t>(n_classes));
  scores(x, s);
  int best = 0;
  for (int c = 1; c < n_classes; ++c) {
    if (s[static_cast<size_t>(c)] > s[static_cast<size_t>(best)]) best = c;
  }
  return best;
}

}  // namespace toneprobe::probe
