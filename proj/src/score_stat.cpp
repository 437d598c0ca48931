#include "setassoc/score_stat.hpp"

#include <cmath>
#include <limits>

#include "setassoc/error.hpp"

namespace setassoc {

ResponseVector center_response(const ResponseVector& y) {
  const long n = y.values.size();
  if (n < 3) {
    throw ContractError("response '" + y.id + "': needs at least 3 samples, got " +
                        std::to_string(n));
  }
  if (!y.values.allFinite()) {
    throw DataError("response '" + y.id + "': non-finite value encountered");
  }
  ResponseVector out;
  out.id = y.id;
  out.values = y.values.array() - y.values.mean();
  return out;
}

void center_columns(CovariateSet& set, bool unit_variance, std::vector<std::string>* dropped) {
  const long n = set.matrix.rows();
  if (n == 0) return;
  std::vector<std::string> kept_ids;
  Eigen::MatrixXd kept(n, set.matrix.cols());
  long out_col = 0;
  for (long j = 0; j < set.matrix.cols(); ++j) {
    Eigen::VectorXd col = set.matrix.col(j);
    col.array() -= col.mean();
    const double ss = col.squaredNorm();
    if (ss == 0.0) {
      if (dropped) {
        dropped->push_back(j < static_cast<long>(set.feature_ids.size())
                               ? set.feature_ids[static_cast<std::size_t>(j)]
                               : set.set_label + "[" + std::to_string(j) + "]");
      }
      continue;
    }
    if (unit_variance) col /= std::sqrt(ss / static_cast<double>(n - 1));
    kept.col(out_col++) = col;
    if (j < static_cast<long>(set.feature_ids.size())) {
      kept_ids.push_back(set.feature_ids[static_cast<std::size_t>(j)]);
    }
  }
  set.matrix = kept.leftCols(out_col);
  set.feature_ids = std::move(kept_ids);
}

void kernel_moments(const Eigen::MatrixXd& x, double* expected_q, double* var_q) {
  const long n = x.rows();
  const long j = x.cols();
  if (j == 0) {
    *expected_q = 0.0;
    *var_q = 0.0;
    return;
  }
  // trace(X X') and trace((X X')^2) through whichever Gram matrix is smaller.
  double trace = 0.0;
  double trace_sq = 0.0;
  if (j <= n) {
    const Eigen::MatrixXd gram = x.transpose() * x;  // J x J
    trace = gram.trace();
    trace_sq = gram.squaredNorm();
  } else {
    const Eigen::MatrixXd gram = x * x.transpose();  // N x N
    trace = gram.trace();
    trace_sq = gram.squaredNorm();
  }
  const double jd = static_cast<double>(j);
  *expected_q = trace / jd;
  *var_q = 2.0 * trace_sq / (jd * jd);
}

SingleSetStat single_set_stat(const ResponseVector& y_centered, const CovariateSet& x) {
  const long n = y_centered.values.size();
  if (x.matrix.rows() != n) {
    throw ContractError("covariate set '" + x.set_label + "': " + std::to_string(x.matrix.rows()) +
                        " rows vs " + std::to_string(n) + " response samples");
  }
  SingleSetStat s;
  s.n_samples = static_cast<int>(n);
  s.n_features = static_cast<int>(x.matrix.cols());
  const double m2 = y_centered.values.squaredNorm();
  if (m2 == 0.0) {
    throw DataError("degenerate response '" + y_centered.id + "': zero variance after centering");
  }
  kernel_moments(x.matrix, &s.expected_q, &s.var_q);
  if (s.n_features == 0 || s.var_q == 0.0) {
    // No usable covariate signal: the statistic is identically zero.
    s.zero_covariates = true;
    s.q_raw = 0.0;
    s.t_standardized = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.q_raw = (x.matrix.transpose() * y_centered.values).squaredNorm() / m2;
  const double q_scaled =
      static_cast<double>(n - 1) * s.q_raw / static_cast<double>(s.n_features);
  s.t_standardized = (q_scaled - s.expected_q) / std::sqrt(s.var_q);
  return s;
}

CombinedStat combined_stat_sum(const std::vector<SingleSetStat>& stats, CombineMode mode) {
  (void)mode;  // both aggregate fields are always filled; mode documents intent
  if (stats.size() < 2) {
    throw ContractError("combined statistic needs at least 2 covariate sets, got " +
                        std::to_string(stats.size()));
  }
  CombinedStat c;
  for (const auto& s : stats) {
    c.q_sum += s.q_raw;
    if (!s.zero_covariates) c.t2_sum += s.t_standardized * s.t_standardized;
  }
  return c;
}

double combined_stat_with_corr(double tx, double tz, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw ContractError("correlation " + std::to_string(rho) + " outside [-1, 1]");
  }
  if (rho == 1.0) {
    throw NumericError(
        "statistic correlation is 1: the adjusted form is singular; fall back to the sum "
        "statistic");
  }
  return (tx * tx + tz * tz - 2.0 * rho * tx * tz) / (1.0 - rho);
}

}  // namespace setassoc
