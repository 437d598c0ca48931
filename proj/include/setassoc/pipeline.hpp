#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "setassoc/parallel.hpp"

namespace setassoc {

// One covariate source supplied to `test`: a matrix, its annotations, the
// window rule, and the label under which its results are reported.
struct CovariateSource {
  std::string matrix_path;
  std::string annotation_path;
  std::string label;
  long long window_halfwidth = 0;
};

struct TestRunOptions {
  std::string responses_path;
  std::string response_annotation_path;
  std::string confounders_path;  // optional
  std::vector<CovariateSource> covariates;
  std::string out_dir;
  long b_permutations = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.001;
  std::string statistic = "sum";  // "sum" (raw sum / merged set) or "with-corr"
  bool asymptotic = false;        // spectral null distribution instead of permutation
  bool scale_columns = false;     // unit-variance covariate columns
  int workers = 0;                // 0 = hardware default
};

struct SimulateOptions {
  std::string regime = "null";
  bool correlated = false;
  double u_sd = 1.0;
  int n_features = 200;  // desk-scale default
  bool full_scale = false;  // overrides n_features to the full 1000
  int n_samples = 100;
  double effect_size = 0.5;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct RocOptions {
  std::string results_path;
  std::string truth_path;
  std::string p_column = "p_joint";
  std::string out_dir;
};

struct ReportOptions {
  std::string results_path;
  double alpha = 0.001;
  std::string out_dir;
};

// Each runner writes its artifacts plus manifest.json into out_dir and
// returns a process exit code. On failure all partially written outputs of
// the invocation are removed.
int run_test(const TestRunOptions& opt);
int run_simulate(const SimulateOptions& opt);
int run_roc(const RocOptions& opt);
int run_report(const ReportOptions& opt);

}  // namespace setassoc
