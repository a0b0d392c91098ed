#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "orthoinfer/errors.hpp"
#include "orthoinfer/rng.hpp"

namespace orthoinfer {

// A screening function maps (X, Y) to the indices of the retained columns.
using ScreenFn =
    std::function<std::vector<int>(const Eigen::MatrixXd&, const Eigen::VectorXd&)>;

// Top-k columns by absolute marginal correlation with the response,
// correlations computed on the supplied sample (centered within it).
inline std::vector<int> marginal_screen_indices(const Eigen::MatrixXd& X,
                                                const Eigen::VectorXd& Y, int k) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (k <= 0) throw DataError("marginal_screen: k must be positive");
  k = std::min<int>(k, static_cast<int>(p));
  Eigen::VectorXd yc = Y.array() - Y.mean();
  double ynorm = yc.norm();
  Eigen::MatrixXd Xc = X;
  Xc.rowwise() -= X.colwise().mean();
  std::vector<std::pair<double, int>> scored(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    double xnorm = Xc.col(j).norm();
    double denom = xnorm * ynorm;
    double r = denom > 0.0 ? std::abs(Xc.col(j).dot(yc)) / denom : 0.0;
    scored[static_cast<std::size_t>(j)] = {-r, static_cast<int>(j)};  // ties break by index
  }
  std::sort(scored.begin(), scored.end());
  std::vector<int> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = scored[static_cast<std::size_t>(i)].second;
  std::sort(out.begin(), out.end());
  (void)n;
  return out;
}

inline ScreenFn marginal_screen(int k) {
  return [k](const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
    return marginal_screen_indices(X, Y, k);
  };
}

// Stability wrapper: run the base screen on R random half-samples of the rows
// and keep the variables selected in at least half of the repeats.
inline ScreenFn stability_screen(ScreenFn base, int repeats, std::uint64_t seed) {
  if (repeats <= 0) throw DataError("stability_screen: repeats must be positive");
  return [base, repeats, seed](const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
    const Eigen::Index n = X.rows();
    std::vector<int> counts(static_cast<std::size_t>(X.cols()), 0);
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int r = 0; r < repeats; ++r) {
      std::iota(rows.begin(), rows.end(), 0);
      SubStream stream(seed, Role::kSplit, static_cast<std::uint64_t>(r));
      stream.shuffle_indices(rows);
      const Eigen::Index half = (n + 1) / 2;
      Eigen::MatrixXd Xh(half, X.cols());
      Eigen::VectorXd Yh(half);
      for (Eigen::Index i = 0; i < half; ++i) {
        Xh.row(i) = X.row(rows[static_cast<std::size_t>(i)]);
        Yh(i) = Y(rows[static_cast<std::size_t>(i)]);
      }
      for (int j : base(Xh, Yh)) ++counts[static_cast<std::size_t>(j)];
    }
    std::vector<int> out;
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (2 * counts[j] >= repeats) out.push_back(static_cast<int>(j));
    return out;
  };
}

}  // namespace orthoinfer
