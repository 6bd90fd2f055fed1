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

#ifndef TONEPROBE_PROBE_RIDGE_H_
#define TONEPROBE_PROBE_RIDGE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "toneprobe/common/matrix.h"

namespace toneprobe::probe {

struct RidgeOptions {
  // Regularization strength; must be positive.
  double alpha = 1.0;
  // Subtract the fit-side feature mean before solving and carry a per-class
  // intercept (the fit-side target mean). With centering off the model is
  // plain no-intercept ridge on raw features.
  bool center = true;
};

// One-vs-rest ridge regression model. Class c scores
//   score_c(x) = sum_d (x_d - mean_d) * weights[d, c] + intercepts[c]
// and prediction is the argmax over classes (ties to the smallest index).
struct RidgeModel {
  size_t dim = 0;
  int n_classes = 0;
  double alpha = 0.0;
  bool centered = true;
  std::vector<double> feature_mean;  // dim (zeros when centered is false)
  std::vector<double> weights;       // dim x n_classes, row-major [d * C + c]
  std::vector<double> intercepts;    // n_classes

  void scores(std::span<const float> x, std::span<double> out) const;
  int predict(std::span<const float> x) const;
};

// Additive sufficient statistics for the centered one-vs-rest ridge normal
// equations over a row subset: the row count, per-class counts, the feature
// sum, per-class feature sums, and the raw Gram matrix (upper triangle).
// Statistics of disjoint subsets combine with merge(); remove() subtracts a
// previously merged subset, which is what makes leave-one-fold-out
// cross-validation a single pass over the data. Instances are cheap to fit
// from repeatedly (the solve never touches the rows again), but a single
// instance must not be filled from several threads at once.
class RidgeStats {
 public:
  RidgeStats() = default;
  RidgeStats(size_t dim, int n_classes);

  void add(std::span<const float> x, int class_index);
  void merge(const RidgeStats& other);
  void remove(const RidgeStats& other);

  size_t dim() const { return dim_; }
  int n_classes() const { return n_classes_; }
  int64_t count() const { return count_; }
  int64_t class_count(int class_index) const;

 private:
  friend RidgeModel fit_ridge(const RidgeStats& stats, const RidgeOptions& opts);

  size_t dim_ = 0;
  int n_classes_ = 0;
  int64_t count_ = 0;
  std::vector<int64_t> class_counts_;  // C
  std::vector<double> feature_sum_;    // D
  std::vector<double> class_sums_;     // C x D, row-major (class c's feature sum)
  std::vector<double> gram_;           // D x D, row-major; upper triangle valid
  std::vector<double> scratch_;        // D; float-to-double staging for add()
};

// Solves (Xc' Xc + alpha I) W = Xc' Y from sufficient statistics, where Xc is
// the (optionally centered) fit-side feature matrix and Y holds one +1/-1
// column per class. Throws toneprobe::Error on an empty subset or a
// non-positive alpha.
RidgeModel fit_ridge(const RidgeStats& stats, const RidgeOptions& opts);

// Accumulates statistics for the given rows of a feature matrix.
// classes[r] must lie in [0, n_classes) for every selected row.
RidgeStats accumulate_ridge_stats(const MatrixF& features,
                                  const std::vector<int>& classes,
                                  const std::vector<uint32_t>& rows, int n_classes);

// Convenience: accumulate + fit in one call.
RidgeModel fit_ridge_ovr(const MatrixF& features, const std::vector<int>& classes,
                         const std::vector<uint32_t>& rows, int n_classes,
                         const RidgeOptions& opts);

// Fits directly from a row subset, solving whichever of the two equivalent
// formulations is smaller: the D x D normal equations when there are at
// least as many rows as dimensions, otherwise the n x n kernel (dual) system
// W = Xc' (Xc Xc' + alpha I)^-1 Y. The results agree up to rounding; the
// dual path is what keeps cross-validation on small datasets cheap when the
// feature dimension is large.
RidgeModel fit_ridge_rows(const MatrixF& features, const std::vector<int>& classes,
                          const std::vector<uint32_t>& rows, int n_classes,
                          const RidgeOptions& opts);

}  // namespace toneprobe::probe

#endif  // TONEPROBE_PROBE_RIDGE_H_
