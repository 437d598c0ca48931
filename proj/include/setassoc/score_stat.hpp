#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace setassoc {

// A single response variable (one row of the response matrix).
struct ResponseVector {
  std::string id;
  Eigen::VectorXd values;  // length N, finite
};

// One covariate set: N samples by J features, plus bookkeeping labels.
struct CovariateSet {
  std::string set_label;
  std::vector<std::string> feature_ids;  // length J
  Eigen::MatrixXd matrix;                // N x J
};

// Score statistic for one covariate set against one centered response.
//
// q_raw is the pure ratio form  y' X X' y / y' y  (proportionality constant
// fixed at 1).  The moments expected_q / var_q follow the 1/J-scaled kernel
// X X' / J; the standardized value is therefore computed from the matching
// scaling of the ratio,  (N - 1) / J * q_raw,  whose mean over response
// permutations equals expected_q exactly when the covariate columns are
// centered.
struct SingleSetStat {
  double q_raw = 0.0;
  double expected_q = 0.0;
  double var_q = 0.0;
  double t_standardized = 0.0;
  int n_samples = 0;
  int n_features = 0;
  bool zero_covariates = false;  // warning flag: X had no usable signal at all
};

// The joint statistics for a group of covariate sets tested together.
struct CombinedStat {
  double q_sum = 0.0;                      // sum of raw ratio statistics
  double t2_sum = 0.0;                     // sum of squared standardized statistics
  std::optional<double> t2_with_corr;      // two-set correlation-adjusted form
  std::optional<double> rho_xz;            // estimated statistic correlation
};

enum class CombineMode { kRaw, kStandardized };

// Subtracts the mean (the fitted value of the intercept-only null model).
// Rejects non-finite inputs naming the offending response.
ResponseVector center_response(const ResponseVector& y);

// Centers every column of the set in place; optionally scales each column to
// unit variance. Constant (zero-variance) columns are dropped with their ids
// appended to *dropped (they contribute nothing to the kernel once centered).
void center_columns(CovariateSet& set, bool unit_variance = false,
                    std::vector<std::string>* dropped = nullptr);

// Moments of the 1/J-scaled quadratic-form statistic for this covariate
// matrix: expected = trace(X X')/J, variance = 2 trace((X X')^2)/J^2.
void kernel_moments(const Eigen::MatrixXd& x, double* expected_q, double* var_q);

// Computes q_raw, the moments, and the standardized statistic. The response
// must already be centered; covariate columns are used exactly as given.
SingleSetStat single_set_stat(const ResponseVector& y_centered, const CovariateSet& x);

// Sum combination over M >= 2 sets: raw mode fills q_sum, standardized mode
// fills t2_sum (the other field is computed as well; mode selects which one
// downstream inference should use).
CombinedStat combined_stat_sum(const std::vector<SingleSetStat>& stats, CombineMode mode);

// Two-set correlation-adjusted statistic (tx^2 + tz^2 - 2 rho tx tz)/(1 - rho).
// rho must lie in (-1, 1); values at 1 are rejected with guidance to fall back
// to the sum statistic.
double combined_stat_with_corr(double tx, double tz, double rho);

}  // namespace setassoc
