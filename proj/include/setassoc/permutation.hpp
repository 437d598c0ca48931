#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "setassoc/score_stat.hpp"

namespace setassoc {

// How to collapse per-set statistics into the joint test statistic.
enum class StatVariant { kSumRaw, kSumStandardized, kWithCorr };

// Which transform of the per-permutation standardized statistics feeds the
// Pearson estimate of the cross-term correlation.
enum class RhoMode { kSquaredStats, kUnsquaredStats };

struct PermutationPlan {
  long n_permutations = 1000;  // B >= 99
  std::uint64_t seed = 0;
  RhoMode rho_mode = RhoMode::kSquaredStats;
};

// Full output of one response's permutation test against M covariate sets.
// The batched pass derives every joint variant from the same draws, so all
// joint p-values are reported; p_joint echoes the requested variant.
struct JointTestResult {
  std::vector<SingleSetStat> per_set;  // observed statistics, one per set
  std::vector<double> p_set;           // permutation p-value per set
  CombinedStat combined;               // observed joint statistics
  double p_sum_raw = 1.0;
  double p_sum_std = 1.0;
  std::optional<double> p_with_corr;   // only for exactly 2 sets
  double p_joint = 1.0;
  StatVariant variant = StatVariant::kSumRaw;
};

// Result of a single-statistic permutation run (diagnostic form).
struct PermutationPvalue {
  double p = 0.0;
  std::vector<double> null_draws;  // requested joint statistic for draws 1..B
};

// Permutes the response across B keyed draws and tests it against the given
// covariate sets jointly and per set. The response must be centered and the
// covariate columns centered; the permutation leaves every covariate matrix
// untouched. Draw b for response `y.id` is keyed by (plan.seed, hash(y.id), b),
// so results do not depend on scheduling or worker count. Requesting the
// correlation-adjusted variant with M != 2 sets is a contract violation.
JointTestResult joint_permutation_test(const ResponseVector& y_centered,
                                       const std::vector<CovariateSet>& sets,
                                       StatVariant variant, const PermutationPlan& plan);

// Diagnostic wrapper: p-value plus the raw null draws of the joint statistic
// for the chosen variant.
PermutationPvalue permutation_pvalue(const ResponseVector& y_centered,
                                     const std::vector<CovariateSet>& sets,
                                     StatVariant variant, const PermutationPlan& plan);

// Resampling estimate of the correlation between the two single-set
// statistics: Pearson correlation over the B permutation draws of the pair of
// standardized statistics (squared or unsquared per plan.rho_mode), clamped
// to [-0.999, 0.999]. Returns 0 if either permuted sequence is constant
// (*degenerate flags that case when supplied).
double estimate_rho(const ResponseVector& y_centered, const CovariateSet& x,
                    const CovariateSet& z, const PermutationPlan& plan,
                    bool* degenerate = nullptr);

// Add-one empirical p-value convention shared by all permutation counts.
inline double add_one_pvalue(long n_at_least_as_extreme, long n_draws) {
  return static_cast<double>(1 + n_at_least_as_extreme) / static_cast<double>(1 + n_draws);
}

}  // namespace setassoc
