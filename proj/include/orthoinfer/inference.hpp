#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orthoinfer/dataset.hpp"
#include "orthoinfer/errors.hpp"
#include "orthoinfer/numeric.hpp"
#include "orthoinfer/orthogonalize.hpp"
#include "orthoinfer/rng.hpp"
#include "orthoinfer/screening.hpp"

namespace orthoinfer {

struct VarianceRecord {
  double value = 1.0;
  std::string method = "known";
  int df = 0;
};

struct CoefficientRecord {
  int index = -1;
  std::string id;
  double psi_hat = 0.0;
  double std_err = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double sum_theta_sq = 0.0;
  std::optional<double> berry_esseen;  // e_n
  std::optional<double> g_n;
};

struct InferenceReport {
  std::vector<CoefficientRecord> coefficients;
  double alpha = 0.05;
  VarianceRecord variance;
};

struct CovarianceEntry {
  int i = -1;
  int j = -1;
  double v = 0.0;  // v_ij, the covariance of the estimators up to tau
};

inline double estimate_coefficient(const OrthoSolution& sol, const Eigen::VectorXd& Y) {
  if (sol.qTx == 0.0) throw NumericError("estimate_coefficient: q'x is zero");
  return sol.q.dot(Y) / sol.qTx;
}

inline CovarianceEntry covariance(const OrthoSolution& a, const OrthoSolution& b) {
  if (a.qTx == 0.0 || b.qTx == 0.0) throw NumericError("covariance: q'x is zero");
  return CovarianceEntry{a.column_index, b.column_index, a.q.dot(b.q) / (a.qTx * b.qTx)};
}

inline std::pair<double, double> confidence_interval(double psi_hat, double v, double Vn,
                                                     double alpha) {
  if (!(v > 0.0)) throw DataError("confidence_interval: v must be positive");
  if (!(Vn > 0.0)) throw DataError("confidence_interval: variance estimate must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("confidence_interval: alpha must lie in (0,1)");
  double hw = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(Vn * v);
  return {psi_hat - hw, psi_hat + hw};
}

inline double pivot_U(const OrthoSolution& sol, const Eigen::VectorXd& Y, double psi0, double Vn) {
  if (!(Vn > 0.0)) throw DataError("pivot_U: variance estimate must be positive");
  double psi_hat = estimate_coefficient(sol, Y);
  return sol.qTx * (psi_hat - psi0) / std::sqrt(Vn * sol.q.squaredNorm());
}

// Exact bias of the estimator given the true coefficient vector (simulation
// use): b = sum over nuisance columns of theta * beta. The Cauchy-Schwarz
// bound b^2 <= |beta_nuisance|^2 * sum(theta^2) is asserted as a sanity check.
inline double true_bias(const OrthoSolution& sol, const Eigen::VectorXd& beta, Eigen::Index j) {
  if (beta.size() != sol.theta.size() + 1)
    throw DataError("true_bias: beta length must equal the full column count");
  double b = 0.0, lambda_sq = 0.0;
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < beta.size(); ++c) {
    if (c == j) continue;
    b += sol.theta(k) * beta(c);
    lambda_sq += beta(c) * beta(c);
    ++k;
  }
  double bound = lambda_sq * sol.sum_theta_sq;
  if (b * b > bound * (1.0 + 1e-12) + 1e-300)
    throw NumericError("true_bias: Cauchy-Schwarz bound violated (numerical inconsistency)");
  return b;
}

struct SplitOptions {
  bool symmetric = true;  // average both half orderings (refitted cross-validation)
  int k = 0;              // screened-set size; 0 means min(n/4, p)
};

// Refitted cross-validation: screen on one half, estimate the residual
// variance on the other with plain least squares, swap and average.
inline VarianceRecord estimate_variance_split(const Dataset& d, const ScreenFn& screen,
                                              std::uint64_t split_seed,
                                              const SplitOptions& opts = {}) {
  const Eigen::Index n = d.n();
  if (n < 8) throw DataError("estimate_variance_split: needs n >= 8");

  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  SubStream stream(split_seed, Role::kSplit, 0);
  stream.shuffle_indices(rows);
  const Eigen::Index n1 = n / 2;
  std::vector<int> I1(rows.begin(), rows.begin() + n1);
  std::vector<int> I2(rows.begin() + n1, rows.end());

  auto take = [&](const std::vector<int>& idx, Eigen::MatrixXd& Xs, Eigen::VectorXd& Ys) {
    Xs.resize(static_cast<Eigen::Index>(idx.size()), d.p());
    Ys.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      Xs.row(static_cast<Eigen::Index>(i)) = d.X.row(idx[i]);
      Ys(static_cast<Eigen::Index>(i)) = d.Y(idx[i]);
    }
  };

  auto one_direction = [&](const std::vector<int>& screen_half,
                           const std::vector<int>& fit_half) -> std::pair<double, int> {
    Eigen::MatrixXd Xa, Xb;
    Eigen::VectorXd Ya, Yb;
    take(screen_half, Xa, Ya);
    take(fit_half, Xb, Yb);
    std::vector<int> sel = screen(Xa, Ya);
    const int k = static_cast<int>(sel.size());
    if (k >= static_cast<int>(fit_half.size()))
      throw DataError("estimate_variance_split: screened size k=" + std::to_string(k) +
                      " is not below the fitting half size " + std::to_string(fit_half.size()));
    Eigen::MatrixXd Xsel(Xb.rows(), k);
    for (int c = 0; c < k; ++c) Xsel.col(c) = Xb.col(sel[static_cast<std::size_t>(c)]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xsel);
    if (qr.rank() < k)
      throw NumericError("estimate_variance_split: screened submodel rank-deficient on the fitting half");
    Eigen::VectorXd coef = qr.solve(Yb);
    double rss = (Yb - Xsel * coef).squaredNorm();
    int df = static_cast<int>(fit_half.size()) - k;
    return {rss / df, df};
  };

  auto [v1, df1] = one_direction(I1, I2);
  VarianceRecord rec;
  if (opts.symmetric) {
    auto [v2, df2] = one_direction(I2, I1);
    rec.value = 0.5 * (v1 + v2);
    rec.df = df1 + df2;
    rec.method = "refitted-cv";
  } else {
    rec.value = v1;
    rec.df = df1;
    rec.method = "split-single";
  }
  return rec;
}

// Default-screen convenience: top-k marginal correlation, k = min(n/4, p).
inline VarianceRecord estimate_variance_split(const Dataset& d, std::uint64_t split_seed,
                                              const SplitOptions& opts = {}) {
  int k = opts.k > 0 ? opts.k
                     : static_cast<int>(std::min<Eigen::Index>(d.n() / 4, d.p()));
  return estimate_variance_split(d, marginal_screen(k), split_seed, opts);
}

// Third absolute moment of a centered Gaussian with variance tau.
inline double gaussian_third_abs_moment(double tau) {
  return 2.0 * std::sqrt(2.0 / 3.14159265358979323846) * std::pow(tau, 1.5);
}

// e_n = sum |q_i|^3 E|eps|^3 / ((n tau)^{3/2} (q'q)^{3/4}). Note the degree-3/2
// homogeneity in q: the bound is tied to the scale convention of q.
inline double berry_esseen_e_n(const OrthoSolution& sol, double tau, double third_abs_moment) {
  if (!(tau > 0.0)) throw DataError("berry_esseen: tau must be positive");
  if (!(third_abs_moment > 0.0)) throw DataError("berry_esseen: third moment must be positive");
  const double n = static_cast<double>(sol.q.size());
  double cube_sum = sol.q.array().abs().cube().sum();
  return cube_sum * third_abs_moment /
         (std::pow(n * tau, 1.5) * std::pow(sol.q.squaredNorm(), 0.75));
}

inline double berry_esseen(const OrthoSolution& sol, double tau, double third_abs_moment,
                           double C = 0.5606) {
  return C * berry_esseen_e_n(sol, tau, third_abs_moment);
}

// Leading Lagrange-inversion term of the Studentized diagnostic.
inline double g_n_diagnostic(double e_n) {
  if (!(e_n > 0.0 && e_n < std::exp(-1.0)))
    throw DataError("g_n_diagnostic: e_n must lie in (0, 1/e)");
  double L = std::log(1.0 / e_n);
  return L - std::log(L);
}

// Per-coefficient report over an explicit list of columns.
inline InferenceReport build_report(const Dataset& d, const OrthoConfig& cfg, double alpha,
                                    const VarianceRecord& variance, bool with_diagnostics,
                                    const std::vector<int>& columns) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("build_report: alpha must lie in (0,1)");
  std::vector<OrthoSolution> sols = compute_q_batch(d, columns, cfg);

  InferenceReport rep;
  rep.alpha = alpha;
  rep.variance = variance;
  rep.coefficients.reserve(sols.size());
  for (const auto& sol : sols) {
    CoefficientRecord rec;
    rec.index = sol.column_index;
    rec.id = d.column_ids[static_cast<std::size_t>(sol.column_index)];
    rec.psi_hat = estimate_coefficient(sol, d.Y);
    rec.std_err = std::sqrt(variance.value * sol.v);
    auto [lo, hi] = confidence_interval(rec.psi_hat, sol.v, variance.value, alpha);
    rec.ci_lower = lo;
    rec.ci_upper = hi;
    rec.sum_theta_sq = sol.sum_theta_sq;
    if (with_diagnostics) {
      double e_n = berry_esseen_e_n(sol, variance.value,
                                    gaussian_third_abs_moment(variance.value));
      rec.berry_esseen = e_n;
      if (e_n > 0.0 && e_n < std::exp(-1.0)) rec.g_n = g_n_diagnostic(e_n);
    }
    rep.coefficients.push_back(std::move(rec));
  }
  return rep;
}

// Convenience: all (or the first m) columns of the dataset.
inline InferenceReport build_report(const Dataset& d, const OrthoConfig& cfg, double alpha,
                                    const VarianceRecord& variance, bool with_diagnostics = true,
                                    int n_report = 0) {
  const int m = n_report > 0 ? std::min<int>(n_report, static_cast<int>(d.p()))
                             : static_cast<int>(d.p());
  std::vector<int> cols(static_cast<std::size_t>(m));
  std::iota(cols.begin(), cols.end(), 0);
  return build_report(d, cfg, alpha, variance, with_diagnostics, cols);
}

}  // namespace orthoinfer
