#include "setassoc/genome_map.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "setassoc/error.hpp"

namespace setassoc {

namespace {

const FeatureAnnotation& annotation_for(const AnnotationMap& ann, const std::string& feature_id,
                                        const char* role) {
  const auto it = ann.find(feature_id);
  if (it == ann.end()) {
    throw DataError(std::string(role) + " feature '" + feature_id + "' has no annotation");
  }
  return it->second;
}

void require_same_samples(const DataMatrix& responses, const DataMatrix& covariates) {
  if (responses.sample_ids == covariates.sample_ids) return;
  std::unordered_set<std::string> resp(responses.sample_ids.begin(), responses.sample_ids.end());
  std::unordered_set<std::string> cov(covariates.sample_ids.begin(), covariates.sample_ids.end());
  std::ostringstream msg;
  msg << "sample-id mismatch between response and covariate matrices;";
  msg << " only in responses: [";
  bool first = true;
  for (const auto& id : responses.sample_ids) {
    if (cov.count(id)) continue;
    if (!first) msg << ", ";
    msg << id;
    first = false;
  }
  msg << "], only in covariates: [";
  first = true;
  for (const auto& id : covariates.sample_ids) {
    if (resp.count(id)) continue;
    if (!first) msg << ", ";
    msg << id;
    first = false;
  }
  msg << "]";
  if (resp == cov) msg << " (same ids, different order; align the matrices first)";
  throw DataError(msg.str());
}

}  // namespace

WindowSets build_window_sets(const DataMatrix& responses, const AnnotationMap& response_ann,
                             const DataMatrix& covariates, const AnnotationMap& covariate_ann,
                             const CovariateWindowSpec& spec) {
  if (spec.window_halfwidth <= 0) {
    throw ContractError("window halfwidth must be positive, got " +
                        std::to_string(spec.window_halfwidth));
  }
  require_same_samples(responses, covariates);

  // Bucket covariate rows by chromosome once; windows then scan one bucket.
  std::unordered_map<std::string, std::vector<int>> by_chromosome;
  std::vector<const FeatureAnnotation*> cov_ann(covariates.feature_ids.size());
  for (std::size_t r = 0; r < covariates.feature_ids.size(); ++r) {
    const auto& a = annotation_for(covariate_ann, covariates.feature_ids[r], "covariate");
    cov_ann[r] = &a;
    by_chromosome[a.chromosome].push_back(static_cast<int>(r));
  }

  WindowSets sets;
  sets.covariate_rows.resize(responses.feature_ids.size());
  for (std::size_t r = 0; r < responses.feature_ids.size(); ++r) {
    const auto& anchor = annotation_for(response_ann, responses.feature_ids[r], "response");
    const auto bucket = by_chromosome.find(anchor.chromosome);
    if (bucket == by_chromosome.end()) continue;
    for (const int cov_row : bucket->second) {
      const long long distance = std::llabs(cov_ann[static_cast<std::size_t>(cov_row)]->position -
                                            anchor.position);
      if (distance <= spec.window_halfwidth) {
        sets.covariate_rows[r].push_back(cov_row);
      }
    }
  }
  return sets;
}

double methylation_logit(double m, double u, double eps) {
  if (m < 0.0 || u < 0.0 || !std::isfinite(m) || !std::isfinite(u)) {
    throw ContractError("methylation intensities must be finite and nonnegative");
  }
  if (eps <= 0.0 || eps >= 0.5) throw ContractError("logit clamp eps must lie in (0, 0.5)");
  const double total = m + u;
  if (total == 0.0) return std::numeric_limits<double>::quiet_NaN();
  double ratio = m / total;
  if (ratio < eps) ratio = eps;
  if (ratio > 1.0 - eps) ratio = 1.0 - eps;
  return std::log(ratio / (1.0 - ratio));
}

Eigen::VectorXd residualize_confounders(const Eigen::VectorXd& y,
                                        const Eigen::MatrixXd& confounders) {
  const long n = y.size();
  const long c = confounders.cols();
  if (confounders.rows() != 0 && confounders.rows() != n) {
    throw ContractError("confounder matrix has " + std::to_string(confounders.rows()) +
                        " rows for " + std::to_string(n) + " samples");
  }
  if (c + 1 >= n) {
    throw ContractError("need fewer confounders than samples: " + std::to_string(c) +
                        " confounders, " + std::to_string(n) + " samples");
  }
  Eigen::MatrixXd design(n, c + 1);
  design.col(0).setConstant(1.0);
  if (c > 0) design.rightCols(c) = confounders;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < c + 1) {
    // The pivot order puts the dependent columns last; report those.
    const auto& perm = qr.colsPermutation().indices();
    std::ostringstream msg;
    msg << "confounder design is rank deficient; collinear columns:";
    for (long k = qr.rank(); k < c + 1; ++k) {
      const long col = perm(k);
      if (col == 0) {
        msg << " intercept";
      } else {
        msg << " confounder_" << col;  // 1-based confounder index
      }
    }
    throw DataError(msg.str());
  }
  return y - design * qr.solve(y);
}

CovariateSet make_window_covariate_set(const DataMatrix& covariates,
                                       const std::vector<int>& covariate_rows,
                                       const std::vector<int>& active_samples,
                                       const std::string& set_label, bool unit_variance,
                                       std::vector<std::string>* dropped_columns) {
  CovariateSet set;
  set.set_label = set_label;
  const long n = static_cast<long>(active_samples.size());
  const long j = static_cast<long>(covariate_rows.size());
  set.matrix.resize(n, j);
  set.feature_ids.reserve(covariate_rows.size());
  for (long col = 0; col < j; ++col) {
    const int row = covariate_rows[static_cast<std::size_t>(col)];
    set.feature_ids.push_back(covariates.feature_ids[static_cast<std::size_t>(row)]);
    for (long i = 0; i < n; ++i) {
      set.matrix(i, col) = covariates.values(row, active_samples[static_cast<std::size_t>(i)]);
    }
  }
  center_columns(set, unit_variance, dropped_columns);
  return set;
}

}  // namespace setassoc
