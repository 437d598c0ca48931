#include "setassoc/null_dist.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "setassoc/error.hpp"

namespace setassoc {

namespace {

constexpr double kAbsTarget = 1e-6;  // total absolute error target for p

// Imhof-style integrand for P(sum lam_i u_i^2 >= 0): the characteristic
// function of the indefinite quadratic form, reduced to a real integral
//   p = 1/2 + (1/pi) * Int_0^inf sin(theta(u)) / (u * rho(u)) du,
//   theta(u) = 1/2 sum atan(lam_i u),  rho(u) = prod (1 + lam_i^2 u^2)^(1/4),
// evaluated after the substitution u = e^t (which cancels the 1/u). In t the
// phase advances at rate |theta'(t)| <= k/4 everywhere, so one adaptive pass
// resolves the oscillation no matter how widely the lam magnitudes spread --
// in particular when q sits within rounding distance of a weight and the
// truncation point is pushed out to 1/|w - q|.
struct LogIntegrand {
  const std::vector<double>& lam;

  double operator()(double t) const {
    const double u = std::exp(t);
    double theta = 0.0;
    double log_rho = 0.0;
    for (double l : lam) {
      const double lu = l * u;
      theta += std::atan(lu);
      log_rho += std::log1p(lu * lu);
    }
    return std::sin(0.5 * theta) * std::exp(-0.25 * log_rho);
  }
};

}  // namespace

SpectralNull spectral_decompose(const Eigen::MatrixXd& kernel) {
  const long n = kernel.rows();
  if (kernel.cols() != n) {
    throw ContractError("kernel must be square, got " + std::to_string(n) + "x" +
                        std::to_string(kernel.cols()));
  }
  const double scale = kernel.cwiseAbs().maxCoeff();
  const double asym = (kernel - kernel.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-8 * scale) {
    throw ContractError("kernel asymmetry " + std::to_string(asym) + " exceeds 1e-8 of scale " +
                        std::to_string(scale));
  }
  SpectralNull out;
  out.n_samples = static_cast<int>(n);
  if (scale == 0.0) return out;  // zero kernel: empty spectrum

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (kernel + kernel.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();  // ascending
  const double largest = ev(n - 1);
  if (largest <= 0.0) {
    throw ContractError("kernel has no positive eigenvalue (largest = " +
                        std::to_string(largest) + ")");
  }
  if (ev(0) < -1e-8 * largest) {
    throw ContractError("kernel indefinite: eigenvalue " + std::to_string(ev(0)) +
                        " below -1e-8 of largest " + std::to_string(largest));
  }
  const double cutoff = 1e-10 * largest;
  for (long i = n - 1; i >= 0; --i) {
    if (ev(i) > cutoff) out.weights.push_back(ev(i));
  }
  out.rank = static_cast<int>(out.weights.size());
  return out;
}

double pvalue_asymptotic(double q_raw, const SpectralNull& null_dist) {
  const int r = null_dist.rank;
  const int m = null_dist.n_samples - 1;  // centered-subspace dimension
  if (m < 1) throw ContractError("null distribution needs at least 2 samples");
  if (r > m) {
    throw ContractError("rank " + std::to_string(r) + " exceeds centered dimension " +
                        std::to_string(m));
  }
  if (q_raw <= 0.0) return 1.0;
  if (r == 0) return 0.0;  // zero kernel: ratio is 0 almost surely
  const double w_max = null_dist.weights.front();
  const double w_min = null_dist.weights.back();
  if (q_raw >= w_max) return 0.0;  // the ratio never exceeds the top weight
  if (r == m && q_raw <= w_min) return 1.0;  // full-rank ratio never drops below w_min

  // Difference form: ratio >= q  iff  sum (w_i - q) u_i^2 - q sum_rest u_j^2 >= 0.
  std::vector<double> lam;
  lam.reserve(static_cast<std::size_t>(m));
  for (double w : null_dist.weights) {
    const double l = w - q_raw;
    if (l != 0.0) lam.push_back(l);
  }
  for (int i = r; i < m; ++i) lam.push_back(-q_raw);

  // Truncation point: for u >= 1/min|lam| the integrand magnitude is below
  // u^(-1 - k/2) / prod |lam_i|^(1/2), so the tail beyond U is bounded by
  // 2 / (k * U^(k/2) * prod |lam|^(1/2)). Half the error budget goes to the
  // tail, half to the quadrature on [0, U].
  const std::size_t k = lam.size();
  double min_abs = std::abs(lam[0]);
  double sum_abs = 0.0;
  double log_prod = 0.0;
  for (double l : lam) {
    min_abs = std::min(min_abs, std::abs(l));
    sum_abs += std::abs(l);
    log_prod += std::log(std::abs(l));
  }
  const double kd = static_cast<double>(k);
  // Solve 2 / (k * U^(k/2) * exp(log_prod/2)) = kAbsTarget/2 for U (in logs);
  // the closed-form tail bound needs U >= 1/min|lam|.
  const double log_u =
      (std::log(4.0) - std::log(kd) - std::log(kAbsTarget) - 0.5 * log_prod) * (2.0 / kd);
  const double t_upper = std::max(-std::log(min_abs), log_u);
  // Below t_lower the integrand sits under (sum|lam|/2) e^t, so the skipped
  // head is at most kAbsTarget/4.
  const double t_lower = std::log(0.5 * kAbsTarget / sum_abs);

  const LogIntegrand f{lam};
  double quad_error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, t_lower, t_upper, 15, 1e-10, &quad_error);
  if (quad_error > 0.5 * kAbsTarget) {
    std::ostringstream diag;
    diag << "quadrature error " << quad_error << " exceeds budget " << 0.5 * kAbsTarget
         << " (rank " << r << ", terms " << k << ", log-range " << t_lower << ".." << t_upper
         << ", q " << q_raw << ")";
    throw NumericError("tail probability integration did not converge: " + diag.str());
  }
  const double p = 0.5 + integral / std::numbers::pi;
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace setassoc
