#pragma once

#include <Eigen/Core>
#include <vector>

namespace setassoc {

// Spectral summary of a covariate kernel (X X' or a sum of such kernels).
// Under the normal null, the ratio statistic q_raw is distributed as
//   sum_i w_i u_i^2 / sum_{j=1..N-1} u_j^2,   u_j iid standard normal,
// where the w_i are the nonzero kernel eigenvalues restricted to the
// mean-centered subspace.
struct SpectralNull {
  std::vector<double> weights;  // nonzero eigenvalues, descending
  int n_samples = 0;            // N
  int rank = 0;                 // number of retained weights
};

// Eigen-decomposes a symmetric positive semidefinite kernel (N x N).
// Eigenvalues below 1e-10 of the largest are truncated. Asymmetry or
// negative eigenvalues beyond 1e-8 of scale violate the contract.
SpectralNull spectral_decompose(const Eigen::MatrixXd& kernel);

// Upper-tail probability P(ratio >= q_raw) for the weighted chi-square ratio
// law, computed by numerical inversion of the characteristic function of the
// difference form  sum_i (w_i - q) u_i^2 - q sum_{rest} u_j^2  at zero.
// Absolute accuracy target 1e-6; throws NumericError with diagnostics when
// the quadrature cannot certify it (callers may fall back to permutation).
double pvalue_asymptotic(double q_raw, const SpectralNull& null_dist);

}  // namespace setassoc
