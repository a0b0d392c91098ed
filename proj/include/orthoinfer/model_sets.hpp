#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orthoinfer/dataset.hpp"
#include "orthoinfer/errors.hpp"
#include "orthoinfer/inference.hpp"

namespace orthoinfer {

struct OlsFit {
  Eigen::VectorXd coefs;
  double rss = 0.0;
  int df = 0;
};

struct ModelMember {
  std::vector<int> variables;  // original dataset column indices, ascending
  double F_stat = 0.0;
  double p_value = 1.0;
  std::vector<double> ols_coefs;
};

struct ModelConfidenceSet {
  std::vector<int> encompassing;  // S_hat, ascending
  double alpha_F = 0.05;
  int max_size = 5;
  std::vector<ModelMember> members;        // retained: p_value > alpha_F
  std::vector<ModelMember> ci_compatible;  // members that also pass the CI filter
  std::uint64_t candidates_enumerated = 0;
};

inline OlsFit ols_fit(const Eigen::VectorXd& Y, const Eigen::MatrixXd& Xsub) {
  const Eigen::Index n = Xsub.rows(), k = Xsub.cols();
  if (k >= n) throw DataError("ols_fit: needs fewer columns than rows");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xsub);
  if (qr.rank() < k) throw NumericError("ols_fit: design is rank deficient");
  OlsFit fit;
  fit.coefs = qr.solve(Y);
  fit.rss = (Y - Xsub * fit.coefs).squaredNorm();
  fit.df = static_cast<int>(n - k);
  return fit;
}

// F-test of a submodel against the encompassing model it is nested in.
inline std::pair<double, double> f_test(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X_enc,
                                        const Eigen::MatrixXd& X_sub) {
  const Eigen::Index n = Y.size();
  const Eigen::Index k_enc = X_enc.cols(), k_sub = X_sub.cols();
  if (k_sub >= k_enc)
    throw DataError("f_test: submodel must be a proper subset of the encompassing model "
                    "(zero numerator degrees of freedom is undefined)");
  if (n <= k_enc) throw DataError("f_test: needs n > encompassing size");
  OlsFit enc = ols_fit(Y, X_enc);
  OlsFit sub = ols_fit(Y, X_sub);
  if (enc.rss <= 1e-12 * Y.squaredNorm())
    throw NumericError("f_test: encompassing fit is saturated (zero residual)");
  double d1 = static_cast<double>(k_enc - k_sub);
  double d2 = static_cast<double>(n - k_enc);
  double F = std::max(0.0, ((sub.rss - enc.rss) / d1) / (enc.rss / d2));
  boost::math::fisher_f dist(d1, d2);
  double p = boost::math::cdf(boost::math::complement(dist, F));
  return {F, p};
}

inline std::uint64_t count_candidate_models(int set_size, int max_size) {
  std::uint64_t total = 0;
  for (int k = 1; k <= max_size; ++k) {
    // C(set_size, k) built multiplicatively; cap to avoid overflow.
    std::uint64_t c = 1;
    for (int i = 0; i < k; ++i) {
      c = c * static_cast<std::uint64_t>(set_size - i) / static_cast<std::uint64_t>(i + 1);
      if (c > (1ULL << 62)) return 1ULL << 62;
    }
    total += c;
    if (total > (1ULL << 62)) return 1ULL << 62;
  }
  return total;
}

// Enumerate all proper submodels of S_hat with 1..max_size variables in
// lexicographic order (size-major, then lexicographic within a size) and
// retain those an F-test cannot reject at level alpha_F. All fits run off one
// Gram matrix, so per-candidate work does not involve n.
inline ModelConfidenceSet enumerate_confidence_set(const Eigen::VectorXd& Y, const Dataset& d,
                                                   std::vector<int> S_hat, double alpha_F,
                                                   int max_size) {
  std::sort(S_hat.begin(), S_hat.end());
  S_hat.erase(std::unique(S_hat.begin(), S_hat.end()), S_hat.end());
  const int K = static_cast<int>(S_hat.size());
  const Eigen::Index n = d.n();
  if (K == 0) throw DataError("enumerate_confidence_set: empty encompassing set");
  if (K >= n) throw DataError("enumerate_confidence_set: needs |S_hat| < n");
  if (max_size < 1 || max_size > K)
    throw DataError("enumerate_confidence_set: max_size must lie in [1, |S_hat|]");
  if (!(alpha_F >= 0.0 && alpha_F < 1.0))
    throw DataError("enumerate_confidence_set: alpha_F must lie in [0,1)");
  for (int v : S_hat)
    if (v < 0 || v >= d.p()) throw DataError("enumerate_confidence_set: variable index out of range");

  const std::uint64_t n_candidates = count_candidate_models(K, max_size);
  if (n_candidates > 10000000ULL)
    throw SizingError("enumerate_confidence_set: " + std::to_string(n_candidates) +
                      " candidate models exceed the 1e7 guard; shrink S_hat or max_size");

  Eigen::MatrixXd Xs(n, K);
  for (int c = 0; c < K; ++c) Xs.col(c) = d.X.col(S_hat[static_cast<std::size_t>(c)]);
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    if (qr.rank() < K)
      throw NumericError("enumerate_confidence_set: encompassing design is rank deficient");
  }
  const Eigen::MatrixXd G = Xs.transpose() * Xs;
  const Eigen::VectorXd g = Xs.transpose() * Y;
  const double yy = Y.squaredNorm();

  Eigen::LDLT<Eigen::MatrixXd> enc_solver(G);
  Eigen::VectorXd c_enc = enc_solver.solve(g);
  const double rss_enc = std::max(0.0, yy - g.dot(c_enc));
  if (rss_enc <= 1e-12 * yy)
    throw NumericError("enumerate_confidence_set: encompassing fit is saturated");
  const double d2 = static_cast<double>(n - K);
  const double enc_scale = rss_enc / d2;

  ModelConfidenceSet set;
  set.encompassing = S_hat;
  set.alpha_F = alpha_F;
  set.max_size = max_size;
  set.candidates_enumerated = n_candidates;

  Eigen::MatrixXd Gsub(max_size, max_size);
  Eigen::VectorXd gsub(max_size);
  std::vector<int> pick(static_cast<std::size_t>(max_size));
  for (int size = 1; size <= max_size; ++size) {
    if (size == K) continue;  // proper subsets only
    // Lexicographic k-combinations of {0..K-1}.
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      for (int r = 0; r < size; ++r) {
        gsub(r) = g(pick[static_cast<std::size_t>(r)]);
        for (int c = 0; c <= r; ++c) {
          double val = G(pick[static_cast<std::size_t>(r)], pick[static_cast<std::size_t>(c)]);
          Gsub(r, c) = val;
          Gsub(c, r) = val;
        }
      }
      Eigen::LLT<Eigen::MatrixXd> llt(Gsub.topLeftCorner(size, size));
      if (llt.info() != Eigen::Success)
        throw NumericError("enumerate_confidence_set: singular submodel Gram matrix");
      Eigen::VectorXd coef = llt.solve(gsub.head(size));
      double rss_sub = std::max(0.0, yy - gsub.head(size).dot(coef));
      double d1 = static_cast<double>(K - size);
      double F = std::max(0.0, ((rss_sub - rss_enc) / d1) / enc_scale);
      boost::math::fisher_f dist(d1, d2);
      double p = boost::math::cdf(boost::math::complement(dist, F));
      if (p > alpha_F) {
        ModelMember m;
        m.variables.reserve(static_cast<std::size_t>(size));
        for (int r = 0; r < size; ++r)
          m.variables.push_back(S_hat[static_cast<std::size_t>(pick[static_cast<std::size_t>(r)])]);
        m.F_stat = F;
        m.p_value = p;
        m.ols_coefs.assign(coef.data(), coef.data() + size);
        set.members.push_back(std::move(m));
      }
      // Advance to the next combination.
      int i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == K - size + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int r = i + 1; r < size; ++r)
        pick[static_cast<std::size_t>(r)] = pick[static_cast<std::size_t>(r - 1)] + 1;
    }
  }
  return set;
}

// Keep the members whose fitted coefficients all lie inside the marginal
// confidence intervals (optionally widened by a slack multiplier).
inline ModelConfidenceSet ci_compatibility_filter(ModelConfidenceSet set,
                                                  const InferenceReport& report,
                                                  double slack = 1.0) {
  std::map<int, std::pair<double, double>> interval;
  for (const auto& rec : report.coefficients) {
    double center = rec.psi_hat;
    double hw = slack * 0.5 * (rec.ci_upper - rec.ci_lower);
    interval[rec.index] = {center - hw, center + hw};
  }
  for (int v : set.encompassing)
    if (!interval.count(v))
      throw DataError("ci_compatibility_filter: no interval for variable index " +
                      std::to_string(v));
  set.ci_compatible.clear();
  for (const auto& m : set.members) {
    bool ok = true;
    for (std::size_t i = 0; i < m.variables.size() && ok; ++i) {
      auto [lo, hi] = interval.at(m.variables[i]);
      ok = m.ols_coefs[i] >= lo && m.ols_coefs[i] <= hi;
    }
    if (ok) set.ci_compatible.push_back(m);
  }
  return set;
}

// One row per model, one column per encompassing variable: '*' when the
// variable enters the model, '-' otherwise.
inline std::string table4_csv(const ModelConfidenceSet& set,
                              const std::vector<std::string>& column_ids,
                              const std::vector<ModelMember>& models) {
  std::ostringstream out;
  out << "model";
  for (int v : set.encompassing) out << ',' << column_ids[static_cast<std::size_t>(v)];
  out << '\n';
  for (std::size_t r = 0; r < models.size(); ++r) {
    out << (r + 1);
    for (int v : set.encompassing) {
      bool in = std::binary_search(models[r].variables.begin(), models[r].variables.end(), v);
      out << ',' << (in ? '*' : '-');
    }
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const ModelConfidenceSet& set) {
  auto members_json = [](const std::vector<ModelMember>& ms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : ms)
      arr.push_back({{"variables", m.variables},
                     {"F", m.F_stat},
                     {"p", m.p_value},
                     {"ols_coefs", m.ols_coefs}});
    return arr;
  };
  return {{"encompassing", set.encompassing},
          {"alpha_F", set.alpha_F},
          {"max_size", set.max_size},
          {"candidates_enumerated", set.candidates_enumerated},
          {"members", members_json(set.members)},
          {"ci_compatible", members_json(set.ci_compatible)}};
}

}  // namespace orthoinfer
