#include "setassoc/simulate.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "setassoc/error.hpp"
#include "setassoc/rng.hpp"

namespace setassoc {

Regime parse_regime(const std::string& token) {
  if (token == "x-only") return Regime::kXOnly;
  if (token == "additive") return Regime::kAdditive;
  if (token == "multiplicative") return Regime::kMultiplicative;
  if (token == "complementary") return Regime::kComplementary;
  if (token == "null") return Regime::kNull;
  throw ContractError("unknown regime '" + token +
                      "' (expected x-only, additive, multiplicative, complementary, or null)");
}

std::string regime_name(Regime regime) {
  switch (regime) {
    case Regime::kXOnly: return "x-only";
    case Regime::kAdditive: return "additive";
    case Regime::kMultiplicative: return "multiplicative";
    case Regime::kComplementary: return "complementary";
    case Regime::kNull: return "null";
  }
  throw ContractError("invalid regime value");
}

namespace {

void validate_config(const RegionConfig& cfg) {
  if (cfg.n_features < 2) {
    throw ContractError("need at least 2 features per region, got " +
                        std::to_string(cfg.n_features));
  }
  if (cfg.n_samples < 4) {
    throw ContractError("need at least 4 samples, got " + std::to_string(cfg.n_samples));
  }
  if (!std::isfinite(cfg.effect_size)) throw ContractError("effect size must be finite");
  if (cfg.regime == Regime::kComplementary && cfg.n_samples % 2 != 0) {
    throw ContractError("complementary regime needs an even sample count, got " +
                        std::to_string(cfg.n_samples));
  }
}

void fill_normals(Eigen::MatrixXd& m, Stream& stream) {
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) m(r, c) = stream.next_normal();
  }
}

std::string padded_id(char prefix, int index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%c%04d", prefix, index);
  return buf;
}

std::vector<std::string> id_column(char prefix, int count) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) ids.push_back(padded_id(prefix, i));
  return ids;
}

// Builds responses from covariates already drawn: every response row starts
// as unit-normal noise, then the first half receive the regime's signal term
// through the same-index covariate row.
SimulatedRegion assemble(const RegionConfig& cfg, Eigen::MatrixXd x, Eigen::MatrixXd z) {
  const int i_features = cfg.n_features;
  const int n = cfg.n_samples;
  const double beta = cfg.effect_size;

  Eigen::MatrixXd y(i_features, n);
  Stream noise{cfg.seed, fnv1a64("sim.noise")};
  fill_normals(y, noise);

  std::vector<bool> truth(static_cast<std::size_t>(i_features), false);
  // effect_size 0 leaves every response pure noise; no feature is marked as
  // signal so downstream ROC labels stay honest.
  if (cfg.regime != Regime::kNull && beta != 0.0) {
    const int signal_count = i_features / 2;
    const int half_n = n / 2;
    for (int i = 0; i < signal_count; ++i) {
      truth[static_cast<std::size_t>(i)] = true;
      switch (cfg.regime) {
        case Regime::kXOnly:
          y.row(i) += beta * x.row(i);
          break;
        case Regime::kAdditive:
          y.row(i) += beta * x.row(i) + beta * z.row(i);
          break;
        case Regime::kMultiplicative:
          y.row(i) += beta * x.row(i) + beta * z.row(i) +
                      beta * x.row(i).cwiseProduct(z.row(i));
          break;
        case Regime::kComplementary:
          y.row(i).head(half_n) += beta * x.row(i).head(half_n);
          y.row(i).tail(n - half_n) += beta * z.row(i).tail(n - half_n);
          break;
        case Regime::kNull:
          break;
      }
    }
  }

  SimulatedRegion region;
  const auto samples = id_column('s', n);
  region.responses.feature_ids = id_column('y', i_features);
  region.responses.sample_ids = samples;
  region.responses.values = std::move(y);
  region.covariates_x.feature_ids = id_column('x', i_features);
  region.covariates_x.sample_ids = samples;
  region.covariates_x.values = std::move(x);
  region.covariates_z.feature_ids = id_column('z', i_features);
  region.covariates_z.sample_ids = samples;
  region.covariates_z.values = std::move(z);
  region.truth = std::move(truth);
  return region;
}

}  // namespace

SimulatedRegion generate_region(const RegionConfig& cfg) {
  validate_config(cfg);
  Eigen::MatrixXd x(cfg.n_features, cfg.n_samples);
  Eigen::MatrixXd z(cfg.n_features, cfg.n_samples);
  Stream sx{cfg.seed, fnv1a64("sim.x")};
  Stream sz{cfg.seed, fnv1a64("sim.z")};
  fill_normals(x, sx);
  fill_normals(z, sz);
  return assemble(cfg, std::move(x), std::move(z));
}

SimulatedRegion generate_correlated(const RegionConfig& cfg, double u_sd) {
  validate_config(cfg);
  if (!(u_sd >= 0.0) || !std::isfinite(u_sd)) {
    throw ContractError("u_sd must be finite and nonnegative");
  }
  Eigen::MatrixXd x(cfg.n_features, cfg.n_samples);
  Stream sx{cfg.seed, fnv1a64("sim.x")};
  fill_normals(x, sx);
  Eigen::MatrixXd z = x;
  if (u_sd > 0.0) {
    Stream su{cfg.seed, fnv1a64("sim.u")};
    for (long r = 0; r < z.rows(); ++r) {
      for (long c = 0; c < z.cols(); ++c) z(r, c) += u_sd * su.next_normal();
    }
  }
  return assemble(cfg, std::move(x), std::move(z));
}

RocCurve roc_from_pvalues(const std::vector<double>& pvalues, const std::vector<bool>& truth) {
  if (pvalues.size() != truth.size()) {
    throw ContractError("p-value and truth vectors differ in length");
  }
  long positives = 0;
  for (const bool t : truth) positives += t ? 1 : 0;
  const long negatives = static_cast<long>(truth.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw ContractError("ROC needs at least one true and one false label");
  }
  for (const double p : pvalues) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
      throw ContractError("p-values must lie in [0, 1]");
    }
  }

  std::vector<std::size_t> order(pvalues.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

  RocCurve curve;
  long tp = 0, fp = 0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = pvalues[order[i]];
    while (i < order.size() && pvalues[order[i]] == t) {
      if (truth[order[i]]) ++tp; else ++fp;
      ++i;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(positives);
    const double fpr = static_cast<double>(fp) / static_cast<double>(negatives);
    curve.thresholds.push_back(t);
    curve.tpr.push_back(tpr);
    curve.fpr.push_back(fpr);
    curve.auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return curve;
}

}  // namespace setassoc
