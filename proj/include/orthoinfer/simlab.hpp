#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orthoinfer/dataset.hpp"
#include "orthoinfer/errors.hpp"
#include "orthoinfer/inference.hpp"
#include "orthoinfer/numeric.hpp"
#include "orthoinfer/orthogonalize.hpp"
#include "orthoinfer/parallel.hpp"
#include "orthoinfer/rng.hpp"

namespace orthoinfer {

struct SimConfig {
  double rho = 0.0;            // equicorrelation in [0,1)
  int n = 70;
  int p = 2450;
  int s = 5;                   // nonzero coefficients (leading block)
  double beta_value = 1.0;
  int reps = 1000;
  double tau = 1.0;            // error variance; 0 turns noise off (test hook)
  double alpha = 0.05;
  double delta = 1.0;
  double a = 1.0;
  int n_report = 0;            // 0 -> min(1000, p)
  std::uint64_t master_seed = 0;
  bool master_seed_set = false;
  bool studentized = false;    // estimate the variance per replication
  bool zero_noise = false;     // test hook: eps = 0 while tau still sets widths

  int effective_n_report() const { return n_report > 0 ? std::min(n_report, p) : std::min(1000, p); }

  void validate() const {
    if (!(rho >= 0.0 && rho < 1.0)) throw DataError("SimConfig: rho must lie in [0,1)");
    if (n < 2 || p < 1) throw DataError("SimConfig: needs n >= 2 and p >= 1");
    if (s < 0 || s > p) throw DataError("SimConfig: needs 0 <= s <= p");
    if (reps < 1) throw DataError("SimConfig: reps must be >= 1");
    if (!(tau >= 0.0)) throw DataError("SimConfig: tau must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("SimConfig: alpha must lie in (0,1)");
    if (!(delta > 0.0)) throw DataError("SimConfig: delta must be > 0");
    if (!(a != 0.0) || !std::isfinite(a)) throw DataError("SimConfig: a must be finite and nonzero");
    if (n_report < 0) throw DataError("SimConfig: n_report must be >= 0");
  }
};

inline nlohmann::json to_json(const SimConfig& cfg) {
  return {{"schema", 1},
          {"rho", cfg.rho},
          {"n", cfg.n},
          {"p", cfg.p},
          {"s", cfg.s},
          {"beta_value", cfg.beta_value},
          {"reps", cfg.reps},
          {"tau", cfg.tau},
          {"alpha", cfg.alpha},
          {"delta", cfg.delta},
          {"a", cfg.a},
          {"n_report", cfg.n_report},
          {"master_seed", cfg.master_seed},
          {"studentized", cfg.studentized},
          {"zero_noise", cfg.zero_noise}};
}

inline SimConfig sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("SimConfig: document must be a JSON object");
  if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"].get<int>() != 1)
    throw DataError("SimConfig: unsupported or missing schema (expected 1)");
  static const std::set<std::string> known = {"schema", "rho", "n", "p", "s", "beta_value",
                                              "reps", "tau", "alpha", "delta", "a", "n_report",
                                              "master_seed", "studentized", "zero_noise"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw DataError("SimConfig: unknown field '" + it.key() + "'");
  SimConfig cfg;
  auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
  };
  auto integer = [&](const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
  };
  cfg.rho = num("rho", cfg.rho);
  cfg.n = integer("n", cfg.n);
  cfg.p = integer("p", cfg.p);
  cfg.s = integer("s", cfg.s);
  cfg.beta_value = num("beta_value", cfg.beta_value);
  cfg.reps = integer("reps", cfg.reps);
  cfg.tau = num("tau", cfg.tau);
  cfg.alpha = num("alpha", cfg.alpha);
  cfg.delta = num("delta", cfg.delta);
  cfg.a = num("a", cfg.a);
  cfg.n_report = integer("n_report", cfg.n_report);
  if (j.contains("master_seed")) {
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    cfg.master_seed_set = true;
  }
  if (j.contains("studentized")) cfg.studentized = j.at("studentized").get<bool>();
  if (j.contains("zero_noise")) cfg.zero_noise = j.at("zero_noise").get<bool>();
  cfg.validate();
  return cfg;
}

struct CoefficientSummary {
  int index = 0;
  double coverage = 0.0;
  double mean_length = 0.0;
  double abs_bias = 0.0;
  double mean_estimate = 0.0;
  double sum_theta_sq = 0.0;
  double v = 0.0;
};

struct SimAggregates {
  double modal_coverage = 0.0;
  double median_coverage = 0.0;
  double median_length = 0.0;
  double median_theta_sq = 0.0;
  double p95_theta_sq = 0.0;
};

struct SimReport {
  SimConfig config;
  std::uint64_t seed = 0;
  std::vector<CoefficientSummary> coefficients;
  SimAggregates aggregates;
  double mean_vn = 1.0;  // 1 exactly for known-variance runs
};

inline SimAggregates summarize(const std::vector<CoefficientSummary>& coefficients,
                               const std::vector<double>& theta_sq_flat);

// Rows i.i.d. N(0, rho*11' + (1-rho)*I) via the exact one-factor form
// x = sqrt(rho)*z0*1 + sqrt(1-rho)*z, then columns centered. Each row owns a
// counter-derived substream, so the draw is independent of any parallel split.
inline Dataset generate_design(const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Eigen::MatrixXd X(cfg.n, cfg.p);
  const double w0 = std::sqrt(cfg.rho), w1 = std::sqrt(1.0 - cfg.rho);
  for (int i = 0; i < cfg.n; ++i) {
    double z0 = SubStream(seed, Role::kDesignShared, static_cast<std::uint64_t>(i)).next_normal();
    SubStream zs(seed, Role::kDesignNoise, static_cast<std::uint64_t>(i));
    for (int j = 0; j < cfg.p; ++j) X(i, j) = w0 * z0 + w1 * zs.next_normal();
  }
  Dataset d = make_dataset(std::move(X), Eigen::VectorXd::Zero(cfg.n), false);
  return center_columns(d);
}

// Coverage study over a fixed design: q vectors are computed once, then each
// replication only touches the noise through the projections q'eps.
inline SimReport run_experiment(const SimConfig& cfg, int threads = 0) {
  cfg.validate();
  const int nthreads = resolve_threads(threads);
  Dataset d = generate_design(cfg, cfg.master_seed);
  const int n = cfg.n, m = cfg.effective_n_report(), R = cfg.reps;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cfg.p);
  beta.head(cfg.s).setConstant(cfg.beta_value);

  std::vector<int> cols(static_cast<std::size_t>(m));
  std::iota(cols.begin(), cols.end(), 0);
  OrthoConfig ocfg;
  ocfg.delta = cfg.delta;
  ocfg.a = cfg.a;
  std::vector<OrthoSolution> sols = compute_q_batch(d, cols, ocfg);

  const double z = normal_quantile(1.0 - cfg.alpha / 2.0);
  Eigen::MatrixXd Qn(n, m);          // columns q_j / (q_j' x_j)
  Eigen::VectorXd bias(m), hw(m);
  std::vector<double> theta_sq_flat;
  theta_sq_flat.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(std::max(cfg.p - 1, 1)));
  for (int k = 0; k < m; ++k) {
    const OrthoSolution& sol = sols[static_cast<std::size_t>(k)];
    Qn.col(k) = sol.q / sol.qTx;
    bias(k) = true_bias(sol, beta, sol.column_index);
    hw(k) = z * std::sqrt(cfg.tau * sol.v);
    for (int t = 0; t < sol.theta.size(); ++t)
      theta_sq_flat.push_back(sol.theta(t) * sol.theta(t));
  }
  const Eigen::VectorXd signal = d.X.leftCols(cfg.s) * beta.head(cfg.s);

  const int chunk = 256;
  const int n_chunks = (R + chunk - 1) / chunk;
  std::vector<Eigen::VectorXi> hits(static_cast<std::size_t>(n_chunks));
  std::vector<Eigen::VectorXd> shift_sums(static_cast<std::size_t>(n_chunks));
  std::vector<Eigen::VectorXd> length_sums(static_cast<std::size_t>(n_chunks));
  std::vector<double> vn_sums(static_cast<std::size_t>(n_chunks), 0.0);

  parallel_for(static_cast<std::size_t>(n_chunks), nthreads, [&](std::size_t c) {
    const int lo = static_cast<int>(c) * chunk;
    const int hi = std::min(lo + chunk, R);
    const int width = hi - lo;
    Eigen::MatrixXd E(n, width);
    if (cfg.tau > 0.0 && !cfg.zero_noise) {
      const double sd = std::sqrt(cfg.tau);
      for (int r = 0; r < width; ++r) {
        SubStream stream(cfg.master_seed, Role::kReplicationNoise, static_cast<std::uint64_t>(lo + r));
        for (int i = 0; i < n; ++i) E(i, r) = sd * stream.next_normal();
      }
    } else {
      E.setZero();
    }
    Eigen::MatrixXd W = Qn.transpose() * E;  // m x width: per-rep noise shifts
    Eigen::VectorXi hit = Eigen::VectorXi::Zero(m);
    Eigen::VectorXd shift_sum = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd length_sum = Eigen::VectorXd::Zero(m);
    double vn_sum = 0.0;
    for (int r = 0; r < width; ++r) {
      double vn = cfg.tau;
      if (cfg.studentized) {
        Dataset dr = d;
        dr.Y = signal + E.col(r);
        std::uint64_t split_seed =
            SubStream(cfg.master_seed, Role::kSplit, static_cast<std::uint64_t>(lo + r)).next_u64();
        vn = estimate_variance_split(dr, split_seed).value;
      }
      vn_sum += vn;
      const double scale = z * std::sqrt(vn);
      for (int k = 0; k < m; ++k) {
        double err = bias(k) + W(k, r);
        double half = cfg.studentized ? scale * std::sqrt(sols[static_cast<std::size_t>(k)].v)
                                      : hw(k);
        if (std::abs(err) <= half) hit(k) += 1;
        shift_sum(k) += err;
        length_sum(k) += 2.0 * half;
      }
    }
    hits[c] = std::move(hit);
    shift_sums[c] = std::move(shift_sum);
    length_sums[c] = std::move(length_sum);
    vn_sums[c] = vn_sum;
  });

  SimReport report;
  report.config = cfg;
  report.seed = cfg.master_seed;
  report.coefficients.resize(static_cast<std::size_t>(m));
  double vn_total = 0.0;
  for (int c = 0; c < n_chunks; ++c) vn_total += vn_sums[static_cast<std::size_t>(c)];
  report.mean_vn = cfg.studentized ? vn_total / static_cast<double>(R) : cfg.tau;
  for (int k = 0; k < m; ++k) {
    long hit = 0;
    double shift = 0.0, length = 0.0;
    for (int c = 0; c < n_chunks; ++c) {
      hit += hits[static_cast<std::size_t>(c)](k);
      shift += shift_sums[static_cast<std::size_t>(c)](k);
      length += length_sums[static_cast<std::size_t>(c)](k);
    }
    CoefficientSummary& cs = report.coefficients[static_cast<std::size_t>(k)];
    const OrthoSolution& sol = sols[static_cast<std::size_t>(k)];
    cs.index = sol.column_index;
    cs.coverage = static_cast<double>(hit) / static_cast<double>(R);
    cs.mean_length = length / static_cast<double>(R);
    cs.abs_bias = std::abs(bias(k));
    cs.mean_estimate = beta(sol.column_index) + shift / static_cast<double>(R);
    cs.sum_theta_sq = sol.sum_theta_sq;
    cs.v = sol.v;
  }
  report.aggregates = summarize(report.coefficients, theta_sq_flat);
  return report;
}

// Exact order statistics of the per-coefficient arrays plus the pooled
// theta^2 values (n_report * (p-1) of them).
inline SimAggregates summarize(const std::vector<CoefficientSummary>& coefficients,
                               const std::vector<double>& theta_sq_flat) {
  if (coefficients.empty()) throw DataError("summarize: no coefficients");
  std::vector<double> cov, len;
  cov.reserve(coefficients.size());
  len.reserve(coefficients.size());
  for (const auto& c : coefficients) {
    cov.push_back(c.coverage);
    len.push_back(c.mean_length);
  }
  SimAggregates a;
  a.modal_coverage = mode_value(cov);
  a.median_coverage = median(cov);
  a.median_length = median(len);
  if (!theta_sq_flat.empty()) {
    a.median_theta_sq = median(theta_sq_flat);
    a.p95_theta_sq = percentile_nearest_rank(theta_sq_flat, 0.95);
  }
  return a;
}

// ---- Factorial analysis of 2x2x2 cell summaries ----------------------------

struct CellSummary {
  double rho = 0.0;
  int n = 0;
  int p = 0;
  int reps = 1000;
  double modal_coverage = 0.0;
  double median_coverage = 0.0;
  double median_length = 0.0;
};

struct FactorEffect {
  std::string factor;           // "rho", "n", "p"
  double modal_odds_ratio = 1.0;
  double median_odds_ratio = 1.0;
  double length_effect = 0.0;   // raw OLS coefficient on the 0/1 code
};

struct EffectsTable {
  std::vector<FactorEffect> effects;  // rho, n, p order
  double modal_intercept = 0.0;       // log-odds at the low level of every factor
  double median_intercept = 0.0;
  double length_intercept = 0.0;
};

namespace detail {

// Binomial logistic fit by Fisher scoring. successes/trials per row of Z.
inline Eigen::VectorXd irls_logistic(const Eigen::MatrixXd& Z, const Eigen::VectorXd& successes,
                                     const Eigen::VectorXd& trials) {
  const Eigen::Index k = Z.cols(), m = Z.rows();
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(k);
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd eta = Z * coef;
    Eigen::VectorXd mu(m), w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      double pr = 1.0 / (1.0 + std::exp(-eta(i)));
      if (pr < 1e-12 || pr > 1.0 - 1e-12)
        throw NumericError("factorial_effects: separation (fitted probability at 0 or 1)");
      mu(i) = pr;
      w(i) = trials(i) * pr * (1.0 - pr);
    }
    Eigen::VectorXd grad = Z.transpose() * (successes - trials.cwiseProduct(mu));
    if (grad.lpNorm<Eigen::Infinity>() < 1e-10) return coef;
    Eigen::MatrixXd H = Z.transpose() * w.asDiagonal() * Z;
    Eigen::VectorXd step = H.ldlt().solve(grad);
    coef += step;
    // With huge trial counts the count-scale gradient bottoms out at rounding
    // noise above the absolute tolerance; a stalled step means the
    // coefficients themselves are already at machine precision.
    if (step.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + coef.lpNorm<Eigen::Infinity>()))
      return coef;
  }
  throw NumericError("factorial_effects: IRLS did not converge in 100 iterations");
}

}  // namespace detail

// Main effects of the 2^3 coverage experiment: binomial logistic regression
// for the coverage responses (odds ratios per low->high factor move) and OLS
// for median length (raw coefficients).
inline EffectsTable factorial_effects(const std::vector<CellSummary>& cells) {
  if (cells.size() != 8) throw DataError("factorial_effects: expected exactly 8 cells");
  auto levels = [&](auto get) {
    std::set<double> s;
    for (const auto& c : cells) s.insert(get(c));
    if (s.size() != 2) throw DataError("factorial_effects: each factor needs exactly 2 levels");
    return std::pair<double, double>(*s.begin(), *s.rbegin());
  };
  auto [rho_lo, rho_hi] = levels([](const CellSummary& c) { return c.rho; });
  auto [n_lo, n_hi] = levels([](const CellSummary& c) { return static_cast<double>(c.n); });
  auto [p_lo, p_hi] = levels([](const CellSummary& c) { return static_cast<double>(c.p); });
  (void)rho_lo; (void)n_lo; (void)p_lo;

  Eigen::MatrixXd Z(8, 4);
  Eigen::VectorXd trials(8), succ_modal(8), succ_median(8), length(8);
  std::set<std::uint64_t> combos;
  for (int i = 0; i < 8; ++i) {
    const CellSummary& c = cells[static_cast<std::size_t>(i)];
    if (c.reps < 1) throw DataError("factorial_effects: reps must be >= 1");
    double zr = (c.rho == rho_hi) ? 1.0 : 0.0;
    double zn = (static_cast<double>(c.n) == n_hi) ? 1.0 : 0.0;
    double zp = (static_cast<double>(c.p) == p_hi) ? 1.0 : 0.0;
    Z.row(i) << 1.0, zr, zn, zp;
    combos.insert((static_cast<std::uint64_t>(zr) << 2) | (static_cast<std::uint64_t>(zn) << 1) |
                  static_cast<std::uint64_t>(zp));
    trials(i) = static_cast<double>(c.reps);
    // Boundary counts (zero or all replications) make the logistic likelihood
    // unbounded; the half-count correction keeps the fit finite and leaves
    // interior cells untouched.
    auto successes = [&](double coverage) {
      double s = std::round(coverage * trials(i));
      return std::min(std::max(s, 0.5), trials(i) - 0.5);
    };
    succ_modal(i) = successes(c.modal_coverage);
    succ_median(i) = successes(c.median_coverage);
    length(i) = c.median_length;
  }
  if (combos.size() != 8)
    throw DataError("factorial_effects: the 8 cells must cover every factor combination once");

  Eigen::VectorXd modal_coef = detail::irls_logistic(Z, succ_modal, trials);
  Eigen::VectorXd median_coef = detail::irls_logistic(Z, succ_median, trials);
  Eigen::VectorXd length_coef = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(Z).solve(length);

  EffectsTable table;
  table.modal_intercept = modal_coef(0);
  table.median_intercept = median_coef(0);
  table.length_intercept = length_coef(0);
  const char* names[3] = {"rho", "n", "p"};
  for (int f = 0; f < 3; ++f) {
    FactorEffect e;
    e.factor = names[f];
    e.modal_odds_ratio = std::exp(modal_coef(f + 1));
    e.median_odds_ratio = std::exp(median_coef(f + 1));
    e.length_effect = length_coef(f + 1);
    table.effects.push_back(std::move(e));
  }
  return table;
}

inline CellSummary cell_summary(const SimReport& report) {
  CellSummary c;
  c.rho = report.config.rho;
  c.n = report.config.n;
  c.p = report.config.p;
  c.reps = report.config.reps;
  c.modal_coverage = report.aggregates.modal_coverage;
  c.median_coverage = report.aggregates.median_coverage;
  c.median_length = report.aggregates.median_length;
  return c;
}

// One row per coefficient: absolute bias, coverage, mean length.
inline std::string export_figure_data(const SimReport& report) {
  std::ostringstream out;
  out << "abs_bias,coverage,mean_length\n";
  for (const auto& c : report.coefficients)
    out << detail::format_double(c.abs_bias) << ',' << detail::format_double(c.coverage) << ','
        << detail::format_double(c.mean_length) << '\n';
  return out.str();
}

}  // namespace orthoinfer
