#include "setassoc/permutation.hpp"

#include <algorithm>
#include <cmath>

#include "setassoc/error.hpp"
#include "setassoc/rng.hpp"

namespace setassoc {

namespace {

constexpr long kBlockCols = 256;  // fixed GEMM batch width (independent of workers)

double pearson(const std::vector<double>& a, const std::vector<double>& b, bool* degenerate) {
  const std::size_t n = a.size();
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return sab / std::sqrt(saa * sbb);
}

struct EngineOutput {
  JointTestResult result;
  std::vector<double> requested_draws;
  bool rho_degenerate = false;
};

EngineOutput run_engine(const ResponseVector& y, const std::vector<CovariateSet>& sets,
                        StatVariant variant, const PermutationPlan& plan, bool keep_draws) {
  if (plan.n_permutations < 99) {
    throw ContractError("permutation count must be at least 99, got " +
                        std::to_string(plan.n_permutations));
  }
  if (sets.empty()) throw ContractError("permutation test needs at least one covariate set");
  if (variant == StatVariant::kWithCorr && sets.size() != 2) {
    throw ContractError(
        "the correlation-adjusted statistic is defined for exactly 2 covariate sets; use the "
        "sum statistic for " +
        std::to_string(sets.size()));
  }
  const long n = y.values.size();
  const long b_total = plan.n_permutations;
  const std::size_t n_sets = sets.size();
  const std::size_t b_size = static_cast<std::size_t>(b_total);

  EngineOutput out;
  JointTestResult& res = out.result;
  res.variant = variant;
  res.per_set.reserve(n_sets);
  for (const auto& s : sets) res.per_set.push_back(single_set_stat(y, s));
  const double m2 = y.values.squaredNorm();

  // Raw ratio statistic of every set for every permutation draw, via one
  // batched projection per (set, block). The denominator ||pi(y)||^2 equals
  // ||y||^2 for every permutation, so it is hoisted out of the draw loop.
  std::vector<std::vector<double>> q_draws(n_sets, std::vector<double>(b_size));
  const std::uint64_t rid_hash = fnv1a64(y.id);
  Eigen::MatrixXd permuted(n, kBlockCols);
  Eigen::MatrixXd projected;
  for (long start = 0; start < b_total; start += kBlockCols) {
    const long cols = std::min(kBlockCols, b_total - start);
    for (long c = 0; c < cols; ++c) {
      const auto perm = keyed_permutation(
          plan.seed, rid_hash, static_cast<std::uint64_t>(start + c + 1), static_cast<int>(n));
      for (long i = 0; i < n; ++i) {
        permuted(i, c) = y.values(perm[static_cast<std::size_t>(i)]);
      }
    }
    for (std::size_t m = 0; m < n_sets; ++m) {
      if (res.per_set[m].zero_covariates) {
        std::fill_n(q_draws[m].begin() + start, cols, 0.0);
        continue;
      }
      projected.noalias() = sets[m].matrix.transpose() * permuted.leftCols(cols);
      for (long c = 0; c < cols; ++c) {
        q_draws[m][static_cast<std::size_t>(start + c)] = projected.col(c).squaredNorm() / m2;
      }
    }
  }

  // Per-set p-values (raw and standardized forms are monotone in each other
  // for a fixed set, so one count serves both).
  res.p_set.resize(n_sets);
  for (std::size_t m = 0; m < n_sets; ++m) {
    long count = 0;
    const double observed = res.per_set[m].q_raw;
    for (double q : q_draws[m]) {
      if (q >= observed) ++count;
    }
    res.p_set[m] = add_one_pvalue(count, b_total);
  }

  auto standardize = [n](const SingleSetStat& s, double q_raw) {
    const double q_scaled = static_cast<double>(n - 1) * q_raw / static_cast<double>(s.n_features);
    return (q_scaled - s.expected_q) / std::sqrt(s.var_q);
  };

  if (n_sets >= 2) {
    res.combined = combined_stat_sum(res.per_set, variant == StatVariant::kSumRaw
                                                      ? CombineMode::kRaw
                                                      : CombineMode::kStandardized);
  } else {
    res.combined.q_sum = res.per_set[0].q_raw;
    const double t = res.per_set[0].zero_covariates ? 0.0 : res.per_set[0].t_standardized;
    res.combined.t2_sum = t * t;
  }

  // Joint draws for all variants in one pass over the stored statistics.
  std::vector<double> joint_raw(b_size, 0.0);
  std::vector<double> joint_std(b_size, 0.0);
  std::vector<std::vector<double>> t_draws;
  if (n_sets == 2) t_draws.assign(2, std::vector<double>(b_size, 0.0));
  for (std::size_t m = 0; m < n_sets; ++m) {
    const bool zero = res.per_set[m].zero_covariates;
    for (std::size_t b = 0; b < b_size; ++b) {
      joint_raw[b] += q_draws[m][b];
      const double t = zero ? 0.0 : standardize(res.per_set[m], q_draws[m][b]);
      joint_std[b] += t * t;
      if (n_sets == 2) t_draws[m][b] = t;
    }
  }

  auto count_pvalue = [b_total](const std::vector<double>& draws, double observed) {
    long count = 0;
    for (double s : draws) {
      if (s >= observed) ++count;
    }
    return add_one_pvalue(count, b_total);
  };

  res.p_sum_raw = count_pvalue(joint_raw, res.combined.q_sum);
  res.p_sum_std = count_pvalue(joint_std, res.combined.t2_sum);

  std::vector<double> joint_corr;
  if (n_sets == 2) {
    std::vector<double> ax(t_draws[0]), az(t_draws[1]);
    if (plan.rho_mode == RhoMode::kSquaredStats) {
      for (auto& v : ax) v *= v;
      for (auto& v : az) v *= v;
    }
    double rho = pearson(ax, az, &out.rho_degenerate);
    rho = std::clamp(rho, -0.999, 0.999);
    res.combined.rho_xz = rho;
    const double obs_tx = res.per_set[0].zero_covariates ? 0.0 : res.per_set[0].t_standardized;
    const double obs_tz = res.per_set[1].zero_covariates ? 0.0 : res.per_set[1].t_standardized;
    const double observed_corr = combined_stat_with_corr(obs_tx, obs_tz, rho);
    res.combined.t2_with_corr = observed_corr;
    joint_corr.resize(b_size);
    for (std::size_t b = 0; b < b_size; ++b) {
      joint_corr[b] = combined_stat_with_corr(t_draws[0][b], t_draws[1][b], rho);
    }
    res.p_with_corr = count_pvalue(joint_corr, observed_corr);
  }

  switch (variant) {
    case StatVariant::kSumRaw:
      res.p_joint = res.p_sum_raw;
      if (keep_draws) out.requested_draws = std::move(joint_raw);
      break;
    case StatVariant::kSumStandardized:
      res.p_joint = res.p_sum_std;
      if (keep_draws) out.requested_draws = std::move(joint_std);
      break;
    case StatVariant::kWithCorr:
      res.p_joint = *res.p_with_corr;
      if (keep_draws) out.requested_draws = std::move(joint_corr);
      break;
  }
  return out;
}

}  // namespace

JointTestResult joint_permutation_test(const ResponseVector& y_centered,
                                       const std::vector<CovariateSet>& sets,
                                       StatVariant variant, const PermutationPlan& plan) {
  return run_engine(y_centered, sets, variant, plan, /*keep_draws=*/false).result;
}

PermutationPvalue permutation_pvalue(const ResponseVector& y_centered,
                                     const std::vector<CovariateSet>& sets,
                                     StatVariant variant, const PermutationPlan& plan) {
  EngineOutput out = run_engine(y_centered, sets, variant, plan, /*keep_draws=*/true);
  PermutationPvalue pv;
  pv.p = out.result.p_joint;
  pv.null_draws = std::move(out.requested_draws);
  return pv;
}

double estimate_rho(const ResponseVector& y_centered, const CovariateSet& x,
                    const CovariateSet& z, const PermutationPlan& plan, bool* degenerate) {
  EngineOutput out =
      run_engine(y_centered, {x, z}, StatVariant::kWithCorr, plan, /*keep_draws=*/false);
  if (degenerate) *degenerate = out.rho_degenerate;
  return out.result.combined.rho_xz.value_or(0.0);
}

}  // namespace setassoc
