#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "setassoc/matrix_io.hpp"

namespace setassoc {

enum class Regime { kXOnly, kAdditive, kMultiplicative, kComplementary, kNull };

Regime parse_regime(const std::string& token);   // rejects unknown tokens
std::string regime_name(Regime regime);

// One simulated genomic block: I response features against two covariate
// sets of I features each, N samples, the first half of the responses
// carrying signal through the same-index covariate column.
struct RegionConfig {
  Regime regime = Regime::kNull;
  int n_features = 200;   // I = J = K
  int n_samples = 100;    // N (complementary requires even N)
  double effect_size = 0.5;
  std::uint64_t seed = 0;
};

struct SimulatedRegion {
  DataMatrix responses;     // I x N, ids y0001..
  DataMatrix covariates_x;  // I x N, ids x0001..
  DataMatrix covariates_z;  // I x N, ids z0001..
  std::vector<bool> truth;  // per response: carries signal
};

// Independent covariate sets (first power study).
SimulatedRegion generate_region(const RegionConfig& cfg);

// Correlated covariate sets Z = X + U with U ~ N(0, u_sd^2) (second power
// study; u_sd = 1 gives corr(X_j, Z_j) = 1/sqrt(2)).
SimulatedRegion generate_correlated(const RegionConfig& cfg, double u_sd = 1.0);

// ROC curve over p-value thresholds (one vertex per unique p-value, ties
// grouped), with trapezoid AUC anchored at (0,0).
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

RocCurve roc_from_pvalues(const std::vector<double>& pvalues, const std::vector<bool>& truth);

}  // namespace setassoc
