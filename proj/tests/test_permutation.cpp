#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "setassoc/error.hpp"
#include "setassoc/permutation.hpp"
#include "setassoc/rng.hpp"
#include "setassoc/score_stat.hpp"

using namespace setassoc;

namespace {

ResponseVector make_y(const std::string& id, long n, Stream& s) {
  ResponseVector y;
  y.id = id;
  y.values.resize(n);
  for (long i = 0; i < n; ++i) y.values(i) = s.next_normal();
  return center_response(y);
}

CovariateSet make_set(const std::string& label, long n, long j, Stream& s) {
  CovariateSet set;
  set.set_label = label;
  set.matrix.resize(n, j);
  for (long c = 0; c < j; ++c) {
    set.feature_ids.push_back(label + std::to_string(c));
    for (long r = 0; r < n; ++r) set.matrix(r, c) = s.next_normal();
  }
  center_columns(set);
  return set;
}

double ks_distance_uniform(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - values[i],
                             values[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace

TEST_CASE("add-one p-value convention") {
  CHECK(add_one_pvalue(0, 999) == doctest::Approx(0.001));   // observed beats all draws
  CHECK(add_one_pvalue(999, 999) == doctest::Approx(1.0));   // every draw at least as large
  CHECK(add_one_pvalue(500, 1000) == doctest::Approx(501.0 / 1001.0));  // median case ~ 0.5
}

TEST_CASE("identical inputs give bit-identical results") {
  Stream s{10};
  auto y = make_y("probe1", 25, s);
  auto x = make_set("x", 25, 4, s);
  auto z = make_set("z", 25, 3, s);
  PermutationPlan plan;
  plan.n_permutations = 500;
  plan.seed = 99;

  const Eigen::MatrixXd x_before = x.matrix;
  const auto r1 = joint_permutation_test(y, {x, z}, StatVariant::kSumRaw, plan);
  const auto r2 = joint_permutation_test(y, {x, z}, StatVariant::kSumRaw, plan);
  CHECK(r1.p_joint == r2.p_joint);
  CHECK(r1.p_sum_std == r2.p_sum_std);
  CHECK(*r1.p_with_corr == *r2.p_with_corr);
  CHECK(r1.p_set == r2.p_set);
  CHECK(x.matrix == x_before);  // covariates untouched by response permutation

  const auto d1 = permutation_pvalue(y, {x, z}, StatVariant::kSumRaw, plan);
  PermutationPlan other = plan;
  other.seed = 100;
  const auto d2 = permutation_pvalue(y, {x, z}, StatVariant::kSumRaw, other);
  CHECK(d1.null_draws != d2.null_draws);  // a new seed resamples the null

  ResponseVector renamed = y;
  renamed.id = "probe2";
  const auto d3 = permutation_pvalue(renamed, {x, z}, StatVariant::kSumRaw, plan);
  CHECK(d1.null_draws != d3.null_draws);  // response id keys its own stream
}

TEST_CASE("engine guards its contract") {
  Stream s{11};
  auto y = make_y("p", 12, s);
  auto x = make_set("x", 12, 2, s);
  auto z = make_set("z", 12, 2, s);
  auto w = make_set("w", 12, 2, s);
  PermutationPlan plan;
  plan.n_permutations = 50;  // < 99
  CHECK_THROWS_AS(joint_permutation_test(y, {x, z}, StatVariant::kSumRaw, plan), ContractError);
  plan.n_permutations = 200;
  CHECK_THROWS_AS(joint_permutation_test(y, {x, z, w}, StatVariant::kWithCorr, plan),
                  ContractError);
  CHECK_THROWS_AS(joint_permutation_test(y, {}, StatVariant::kSumRaw, plan), ContractError);
}

TEST_CASE("sampled p-value matches the exhaustive 720-permutation oracle") {
  Stream s{606};
  auto y = make_y("small", 6, s);
  auto x = make_set("x", 6, 2, s);
  auto z = make_set("z", 6, 2, s);

  const double m2 = y.values.squaredNorm();
  const auto q_sum_of = [&](const Eigen::VectorXd& v) {
    return ((x.matrix.transpose() * v).squaredNorm() +
            (z.matrix.transpose() * v).squaredNorm()) /
           m2;
  };
  const double q_obs = q_sum_of(y.values);

  std::vector<double> values(6);
  for (long i = 0; i < 6; ++i) values[static_cast<std::size_t>(i)] = y.values(i);
  std::sort(values.begin(), values.end());
  std::vector<double> exhaustive;
  exhaustive.reserve(720);
  Eigen::VectorXd perm(6);
  do {
    for (long i = 0; i < 6; ++i) perm(i) = values[static_cast<std::size_t>(i)];
    exhaustive.push_back(q_sum_of(perm));
  } while (std::next_permutation(values.begin(), values.end()));
  REQUIRE(exhaustive.size() == 720);
  long exact_count = 0;
  for (double q : exhaustive) {
    if (q >= q_obs) ++exact_count;
  }
  const double p_exact = static_cast<double>(exact_count) / 720.0;

  PermutationPlan plan;
  plan.n_permutations = 100000;
  plan.seed = 17;
  const auto pv = permutation_pvalue(y, {x, z}, StatVariant::kSumRaw, plan);
  const double se = std::sqrt(p_exact * (1.0 - p_exact) / static_cast<double>(plan.n_permutations));
  CHECK(std::abs(pv.p - p_exact) < 4.0 * se + 2.0 / static_cast<double>(plan.n_permutations));

  // every sampled draw must be a member of the exhaustive support
  std::sort(exhaustive.begin(), exhaustive.end());
  for (std::size_t i = 0; i < 200; ++i) {
    const double q = pv.null_draws[i];
    const auto it = std::lower_bound(exhaustive.begin(), exhaustive.end(), q - 1e-9);
    REQUIRE(it != exhaustive.end());
    CHECK(std::abs(*it - q) < 1e-9);
  }
}

TEST_CASE("row relabeling leaves observed statistics intact and p within noise") {
  Stream s{33};
  const long n = 30;
  auto y = make_y("relabel", n, s);
  auto x = make_set("x", n, 5, s);
  auto z = make_set("z", n, 4, s);
  PermutationPlan plan;
  plan.n_permutations = 2000;
  plan.seed = 5;
  const auto r1 = joint_permutation_test(y, {x, z}, StatVariant::kSumRaw, plan);

  // reverse the shared row order
  ResponseVector y2 = y;
  y2.values = y.values.reverse().eval();
  CovariateSet x2 = x, z2 = z;
  x2.matrix = x.matrix.colwise().reverse().eval();
  z2.matrix = z.matrix.colwise().reverse().eval();
  const auto r2 = joint_permutation_test(y2, {x2, z2}, StatVariant::kSumRaw, plan);

  CHECK(r2.per_set[0].q_raw == doctest::Approx(r1.per_set[0].q_raw).epsilon(1e-12));
  CHECK(r2.per_set[1].q_raw == doctest::Approx(r1.per_set[1].q_raw).epsilon(1e-12));
  CHECK(r2.combined.q_sum == doctest::Approx(r1.combined.q_sum).epsilon(1e-12));
  const double p = r1.p_joint;
  const double band =
      6.0 * std::sqrt(2.0 * p * (1.0 - p) / static_cast<double>(plan.n_permutations));
  CHECK(std::abs(r2.p_joint - r1.p_joint) < band + 2.0 / static_cast<double>(plan.n_permutations));
}

TEST_CASE("null p-values are uniform") {
  Stream s{2718};
  const long n = 30;
  auto x = make_set("x", n, 5, s);
  auto z = make_set("z", n, 3, s);
  PermutationPlan plan;
  plan.n_permutations = 499;
  plan.seed = 31;
  std::vector<double> pvalues;
  const int reps = 200;
  pvalues.reserve(reps);
  for (int rep = 0; rep < reps; ++rep) {
    auto y = make_y("null" + std::to_string(rep), n, s);
    pvalues.push_back(joint_permutation_test(y, {x, z}, StatVariant::kSumRaw, plan).p_joint);
  }
  CHECK(ks_distance_uniform(pvalues) < 1.628 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("estimate_rho is near zero for independent sets") {
  Stream s{404};
  const long n = 40;
  auto y = make_y("rho0", n, s);
  auto x = make_set("x", n, 5, s);
  auto z = make_set("z", n, 5, s);
  PermutationPlan plan;
  plan.n_permutations = 5000;
  plan.seed = 8;
  for (RhoMode mode : {RhoMode::kSquaredStats, RhoMode::kUnsquaredStats}) {
    plan.rho_mode = mode;
    const double rho = estimate_rho(y, x, z, plan);
    CHECK(std::abs(rho) < 2.0 / std::sqrt(static_cast<double>(plan.n_permutations)) + 0.02);
  }
}

TEST_CASE("estimate_rho clamps for identical sets and flags degenerate input") {
  Stream s{405};
  const long n = 20;
  auto y = make_y("same", n, s);
  auto x = make_set("x", n, 4, s);
  CovariateSet z = x;
  z.set_label = "z";
  PermutationPlan plan;
  plan.n_permutations = 500;
  for (RhoMode mode : {RhoMode::kSquaredStats, RhoMode::kUnsquaredStats}) {
    plan.rho_mode = mode;
    CHECK(estimate_rho(y, x, z, plan) == doctest::Approx(0.999));  // T_X == T_Z every draw
  }

  CovariateSet dead;  // all-zero covariates: constant statistic sequence
  dead.set_label = "dead";
  dead.feature_ids = {"d0"};
  dead.matrix = Eigen::MatrixXd::Zero(n, 1);
  bool degenerate = false;
  CHECK(estimate_rho(y, x, dead, plan, &degenerate) == 0.0);
  CHECK(degenerate);
}

TEST_CASE("statistic correlation is diluted relative to covariate correlation") {
  // Z = X + U construction: covariate pairs correlate at ~1/sqrt(2) but the
  // permutation-resampled correlation of the set statistics sits well below.
  Stream s{777};
  const long n = 100, j = 50;
  Eigen::MatrixXd xm(n, j), zm(n, j);
  for (long c = 0; c < j; ++c) {
    for (long r = 0; r < n; ++r) {
      const double xv = s.next_normal();
      xm(r, c) = xv;
      zm(r, c) = xv + s.next_normal();
    }
  }
  CovariateSet x{"x", {}, xm}, z{"z", {}, zm};
  center_columns(x);
  center_columns(z);

  double mean_corr = 0.0;
  for (long c = 0; c < j; ++c) {
    const double num = x.matrix.col(c).dot(z.matrix.col(c));
    mean_corr += num / (x.matrix.col(c).norm() * z.matrix.col(c).norm());
  }
  mean_corr /= static_cast<double>(j);
  CHECK(mean_corr == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));

  auto y = make_y("dilute", n, s);
  PermutationPlan plan;
  plan.n_permutations = 2000;
  plan.seed = 13;
  for (RhoMode mode : {RhoMode::kSquaredStats, RhoMode::kUnsquaredStats}) {
    plan.rho_mode = mode;
    const double rho = estimate_rho(y, x, z, plan);
    CHECK(rho < mean_corr);
    CHECK(rho > 0.0);
  }
}

TEST_CASE("all joint variants come from one pass and echo the requested one") {
  Stream s{88};
  auto y = make_y("multi", 24, s);
  auto x = make_set("x", 24, 3, s);
  auto z = make_set("z", 24, 3, s);
  PermutationPlan plan;
  plan.n_permutations = 400;
  plan.seed = 21;

  const auto raw = joint_permutation_test(y, {x, z}, StatVariant::kSumRaw, plan);
  const auto stdz = joint_permutation_test(y, {x, z}, StatVariant::kSumStandardized, plan);
  const auto corr = joint_permutation_test(y, {x, z}, StatVariant::kWithCorr, plan);

  CHECK(raw.p_joint == raw.p_sum_raw);
  CHECK(stdz.p_joint == stdz.p_sum_std);
  CHECK(corr.p_joint == *corr.p_with_corr);
  // the same draws underlie every variant
  CHECK(raw.p_sum_std == stdz.p_sum_std);
  CHECK(*raw.p_with_corr == *corr.p_with_corr);
  CHECK(raw.p_set == corr.p_set);
  REQUIRE(corr.combined.rho_xz.has_value());
  CHECK(*corr.combined.rho_xz >= -0.999);
  CHECK(*corr.combined.rho_xz <= 0.999);
}
