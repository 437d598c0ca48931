#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "setassoc/matrix_io.hpp"
#include "setassoc/score_stat.hpp"

namespace setassoc {

// Window rule for building one covariate set per response: all covariate
// features on the response's chromosome whose position lies within
// window_halfwidth basepairs of the response anchor (inclusive boundary).
// The anchor is the annotated position (transcription start site) as-is.
struct CovariateWindowSpec {
  std::string set_label;
  long long window_halfwidth = 0;  // > 0
};

// Window assignment for all responses against one covariate matrix.
struct WindowSets {
  // For each response row index (into the response matrix), the covariate
  // row indices inside its window; empty vectors mark responses excluded
  // from testing against this covariate source.
  std::vector<std::vector<int>> covariate_rows;
};

// Builds per-response covariate windows. Requires annotations for every
// response and covariate feature and an identical sample axis on both
// matrices (checked; mismatch reported with the asymmetric difference).
WindowSets build_window_sets(const DataMatrix& responses, const AnnotationMap& response_ann,
                             const DataMatrix& covariates, const AnnotationMap& covariate_ann,
                             const CovariateWindowSpec& spec);

// logit(m / (m + u)) with the ratio clamped to [eps, 1 - eps]; m + u == 0
// yields NaN (the missing-value code).
double methylation_logit(double m, double u, double eps = 1e-3);

// Least-squares residuals of y on [intercept | confounders]. Residuals are
// orthogonal to every design column within 1e-10 of scale. Rank-deficient
// designs are rejected naming the collinear columns. An empty confounder
// matrix (0 columns) reduces to mean-centering.
Eigen::VectorXd residualize_confounders(const Eigen::VectorXd& y,
                                        const Eigen::MatrixXd& confounders);

// Materializes the covariate set for one response from its window rows:
// samples in `sample_mask` order, columns centered (and optionally scaled),
// constant columns dropped.
CovariateSet make_window_covariate_set(const DataMatrix& covariates,
                                       const std::vector<int>& covariate_rows,
                                       const std::vector<int>& active_samples,
                                       const std::string& set_label, bool unit_variance,
                                       std::vector<std::string>* dropped_columns);

}  // namespace setassoc
