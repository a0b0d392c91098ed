#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "orthoinfer/dataset.hpp"
#include "orthoinfer/errors.hpp"

namespace orthoinfer {

struct OrthoConfig {
  double delta = 1.0;
  // NaN means "use delta" (the interpretable default choice a = delta).
  double a = std::numeric_limits<double>::quiet_NaN();
  double saddle_rel_tolerance = 1e-8;  // relative to the spectral scale of L
  bool check_saddle = false;           // full eigendecomposition is O(n^3) per column

  double effective_a() const { return std::isnan(a) ? delta : a; }
  void validate() const {
    if (!(delta > 0.0)) throw DataError("OrthoConfig: delta must be positive");
    if (effective_a() == 0.0) throw DataError("OrthoConfig: a must be nonzero");
  }
};

struct OrthoSolution {
  int column_index = -1;
  Eigen::VectorXd q;       // debiasing vector
  double qTx = 0.0;        // q'x_psi
  double v = 0.0;          // v_psipsi = q'q / (q'x)^2
  Eigen::VectorXd theta;   // leakage coefficients, nuisance columns in index order
  double sum_theta_sq = 0.0;
  double objective = 0.0;  // m(q) = q'M q / (q'x)^2
  bool saddle_checked = false;
  bool saddle_ok = true;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
};

struct SaddleReport {
  double min_eigenvalue = 0.0;
  double scale = 0.0;  // spectral norm of L, the reference for tolerances
  bool has_zero = false;
};

// B = (delta I + X X')^{-1}, the one factorization every column shares.
inline Eigen::MatrixXd base_inverse(const Eigen::MatrixXd& X, double delta) {
  if (!(delta > 0.0)) throw DataError("base_inverse: delta must be positive");
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd M = X * X.transpose();
  M.diagonal().array() += delta;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success)
    throw NumericError("base_inverse: factorization failed");
  return ldlt.solve(Eigen::MatrixXd::Identity(n, n));
}

namespace detail {

// M_delta q with M_delta = delta I + X X' - x_j x_j', without forming M.
inline Eigen::VectorXd apply_m_delta(const Eigen::MatrixXd& X, Eigen::Index j, double delta,
                                     const Eigen::VectorXd& q) {
  Eigen::VectorXd t = X.transpose() * q;
  Eigen::VectorXd out = delta * q + X * t - X.col(j) * t(j);
  return out;
}

inline Eigen::MatrixXd m_delta_matrix(const Eigen::MatrixXd& X, Eigen::Index j, double delta) {
  Eigen::MatrixXd M = X * X.transpose();
  M -= X.col(j) * X.col(j).transpose();
  M.diagonal().array() += delta;
  return M;
}

// Fill the diagnostic fields shared by both computation paths.
inline OrthoSolution finish_solution(const Dataset& d, Eigen::Index j, const OrthoConfig& cfg,
                                     Eigen::VectorXd q) {
  const Eigen::VectorXd& x = d.X.col(j);
  OrthoSolution sol;
  sol.column_index = static_cast<int>(j);
  sol.q = std::move(q);
  sol.qTx = sol.q.dot(x);
  if (sol.qTx == 0.0)
    throw NumericError("compute_q: q'x vanished for column " +
                       d.column_ids[static_cast<std::size_t>(j)]);
  sol.v = sol.q.squaredNorm() / (sol.qTx * sol.qTx);

  Eigen::VectorXd t = d.X.transpose() * sol.q;
  sol.theta.resize(d.p() - 1);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < d.p(); ++c) {
    if (c == j) continue;
    sol.theta(k++) = t(c) / sol.qTx;
  }
  sol.sum_theta_sq = sol.theta.squaredNorm();
  Eigen::VectorXd mq = cfg.delta * sol.q + d.X * t - x * t(j);
  sol.objective = sol.q.dot(mq) / (sol.qTx * sol.qTx);
  return sol;
}

}  // namespace detail

// Full eigen-structure of L = M_delta - (x'M^{-1}x)^{-1} x x'. The matrix
// determinant lemma forces det(L) = 0, so one eigenvalue sits at zero; the
// closed-form q is a genuine minimizer iff no eigenvalue is materially negative.
inline SaddleReport saddle_check(const Dataset& d, Eigen::Index j, double delta,
                                 double rel_tolerance = 1e-8) {
  if (!(delta > 0.0)) throw DataError("saddle_check: delta must be positive");
  const Eigen::VectorXd& x = d.X.col(j);
  Eigen::MatrixXd M = detail::m_delta_matrix(d.X, j, delta);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw NumericError("saddle_check: factorization failed");
  Eigen::VectorXd minv_x = ldlt.solve(x);
  Eigen::MatrixXd L = M - (x * x.transpose()) / x.dot(minv_x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L);
  if (eig.info() != Eigen::Success) throw NumericError("saddle_check: eigensolver failed");
  const auto& ev = eig.eigenvalues();
  SaddleReport rep;
  rep.scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  rep.min_eigenvalue = ev(0);
  rep.has_zero = ev.cwiseAbs().minCoeff() <= rel_tolerance * rep.scale;
  return rep;
}

// Closed-form debiasing vector q = a (delta I + X_{-j} X_{-j}')^{-1} x_j.
// With a shared base inverse B the per-column cost is one rank-one downdate;
// a near-singular downdate denominator falls back to direct inversion.
inline OrthoSolution compute_q(const Dataset& d, Eigen::Index j, const OrthoConfig& cfg,
                               const Eigen::MatrixXd* base = nullptr) {
  cfg.validate();
  if (j < 0 || j >= d.p()) throw DataError("compute_q: column index out of range");
  const Eigen::VectorXd& x = d.X.col(j);
  const double a = cfg.effective_a();

  Eigen::VectorXd q_raw;
  bool downdated = false;
  if (base != nullptr) {
    Eigen::VectorXd bx = (*base) * x;
    double denom = 1.0 - x.dot(bx);
    if (std::abs(denom) >= 1e-12) {
      q_raw = bx / denom;
      downdated = true;
    }
  }
  if (!downdated) {
    Eigen::MatrixXd M = detail::m_delta_matrix(d.X, j, cfg.delta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success)
      throw NumericError("compute_q: direct inversion failed for column " +
                         d.column_ids[static_cast<std::size_t>(j)]);
    q_raw = ldlt.solve(x);
  }

  OrthoSolution sol = detail::finish_solution(d, j, cfg, a * q_raw);
  if (cfg.check_saddle) {
    SaddleReport rep = saddle_check(d, j, cfg.delta, cfg.saddle_rel_tolerance);
    sol.saddle_checked = true;
    sol.min_eigenvalue = rep.min_eigenvalue;
    sol.saddle_ok = rep.min_eigenvalue >= -cfg.saddle_rel_tolerance * rep.scale;
  }
  return sol;
}

// Batched form of compute_q for many columns of one dataset: one base inverse,
// two large matrix products, identical results to the per-column path.
inline std::vector<OrthoSolution> compute_q_batch(const Dataset& d,
                                                  const std::vector<int>& columns,
                                                  const OrthoConfig& cfg) {
  cfg.validate();
  const double a = cfg.effective_a();
  const Eigen::Index m = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd B = base_inverse(d.X, cfg.delta);
  Eigen::MatrixXd Xsel(d.n(), m);
  for (Eigen::Index k = 0; k < m; ++k) Xsel.col(k) = d.X.col(columns[static_cast<std::size_t>(k)]);
  Eigen::MatrixXd BX = B * Xsel;

  Eigen::MatrixXd Q(d.n(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double denom = 1.0 - Xsel.col(k).dot(BX.col(k));
    if (std::abs(denom) < 1e-12) {
      // Rare: defer to the robust per-column path.
      OrthoSolution sol =
          compute_q(d, columns[static_cast<std::size_t>(k)], cfg, &B);
      Q.col(k) = sol.q / a;
    } else {
      Q.col(k) = BX.col(k) / denom;
    }
  }
  Eigen::MatrixXd T = d.X.transpose() * Q;  // t-th column holds X'q_k

  std::vector<OrthoSolution> out;
  out.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    const int j = columns[static_cast<std::size_t>(k)];
    OrthoSolution sol;
    sol.column_index = j;
    sol.q = a * Q.col(k);
    sol.qTx = sol.q.dot(d.X.col(j));
    if (sol.qTx == 0.0)
      throw NumericError("compute_q_batch: q'x vanished for column " +
                         d.column_ids[static_cast<std::size_t>(j)]);
    sol.v = sol.q.squaredNorm() / (sol.qTx * sol.qTx);
    sol.theta.resize(d.p() - 1);
    Eigen::Index w = 0;
    for (Eigen::Index c = 0; c < d.p(); ++c) {
      if (c == j) continue;
      sol.theta(w++) = a * T(c, k) / sol.qTx;
    }
    sol.sum_theta_sq = sol.theta.squaredNorm();
    sol.objective = cfg.delta * sol.v + sol.sum_theta_sq;
    out.push_back(std::move(sol));
  }
  return out;
}

// Relative residual of the stationarity condition (q'x) M q = (q'M q) x.
inline double stationarity_residual(const Dataset& d, Eigen::Index j, const OrthoConfig& cfg,
                                    const Eigen::VectorXd& q) {
  cfg.validate();
  if (q.size() != d.n() || q.norm() == 0.0)
    throw DataError("stationarity_residual: q must be a nonzero length-n vector");
  const Eigen::VectorXd& x = d.X.col(j);
  Eigen::VectorXd mq = detail::apply_m_delta(d.X, j, cfg.delta, q);
  Eigen::VectorXd lhs = q.dot(x) * mq;
  Eigen::VectorXd rhs = q.dot(mq) * x;
  return (lhs - rhs).norm() / rhs.norm();
}

// P(delta,delta) by both Woodbury forms, asserting elementwise agreement.
// The tolerance scales with the conditioning of delta I + X X': at tiny delta
// the primal solve necessarily loses ~eps*|M|/delta, and a fixed threshold
// would reject correct results.
inline Eigen::MatrixXd projector(const Dataset& d, Eigen::Index j, double delta) {
  if (!(delta > 0.0)) throw DataError("projector: delta must be positive");
  const Eigen::Index n = d.n();
  const Eigen::Index pm1 = d.p() - 1;
  Eigen::MatrixXd Xm(n, pm1);
  {
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < d.p(); ++c)
      if (c != j) Xm.col(k++) = d.X.col(c);
  }
  if (pm1 == 0) return Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd M = Xm * Xm.transpose();
  M.diagonal().array() += delta;
  Eigen::LDLT<Eigen::MatrixXd> primal(M);
  if (primal.info() != Eigen::Success) throw NumericError("projector: primal factorization failed");
  Eigen::MatrixXd P1 = delta * primal.solve(Eigen::MatrixXd::Identity(n, n));

  Eigen::MatrixXd G = Xm.transpose() * Xm;
  G.diagonal().array() += delta;
  Eigen::LDLT<Eigen::MatrixXd> dual(G);
  if (dual.info() != Eigen::Success) throw NumericError("projector: dual factorization failed");
  Eigen::MatrixXd P2 = Eigen::MatrixXd::Identity(n, n) - Xm * dual.solve(Xm.transpose());

  const double eps = std::numeric_limits<double>::epsilon();
  double tol = std::max(1e-9, 16.0 * eps * (1.0 + M.cwiseAbs().maxCoeff() / delta));
  double gap = (P1 - P2).cwiseAbs().maxCoeff();
  if (gap > tol)
    throw NumericError("projector: Woodbury forms disagree by " + std::to_string(gap) +
                       " (tolerance " + std::to_string(tol) + ")");
  return P1;
}

// Cox-Reid multiplier c = (X_{-j}'X_{-j})^{-1} X_{-j}'x_j (needs p-1 < n).
inline Eigen::VectorXd cox_reid_coef(const Dataset& d, Eigen::Index j) {
  const Eigen::Index n = d.n();
  const Eigen::Index pm1 = d.p() - 1;
  if (pm1 >= n)
    throw DataError("cox_reid_coef: requires p-1 < n (nuisance Gram matrix singular otherwise)");
  Eigen::MatrixXd Xm(n, pm1);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < d.p(); ++c)
    if (c != j) Xm.col(k++) = d.X.col(c);
  if (pm1 == 0) return Eigen::VectorXd();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xm);
  if (qr.rank() < pm1)
    throw NumericError("cox_reid_coef: nuisance design is rank deficient");
  return qr.solve(d.X.col(j));
}

}  // namespace orthoinfer
