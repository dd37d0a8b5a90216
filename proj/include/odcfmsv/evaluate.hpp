#pragma once

// Accuracy measures (MAE, Frobenius, KL), the smoothing-accuracy study, the
// wrong-minus-true MKL experiment and rolling-window correlations.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "odcfmsv/gibbs.hpp"

namespace odcf {

/// Quantile of the standard normal used for the 5% VaR.
inline constexpr double kVarMultiplier = 1.645;

/// (1/T) sum_t |est_t - truth_t|.
double mae_series(const std::vector<double>& estimate, const std::vector<double>& truth);
double mae_series(const VectorXd& estimate, const VectorXd& truth);

/// Frobenius norm of the difference.
double frobenius_error(const MatrixXd& truth, const MatrixXd& estimate);
/// Frobenius error averaged over periods.
double fn_mean(const std::vector<MatrixXd>& truth, const std::vector<MatrixXd>& estimate);

/// KL(N(0, sigma0) || N(0, sigma_est)).
double kl_normal(const MatrixXd& sigma0, const MatrixXd& sigma_est);
/// Time average of kl_normal.
double mkl(const std::vector<MatrixXd>& sigma0_path, const std::vector<MatrixXd>& sigma_est_path);

/// [C_t]_{ij} along a path of correlation (or covariance) matrices.
std::vector<double> element_series(const std::vector<MatrixXd>& path, Index i, Index j);
/// 1.645 sqrt(w' Sigma_t w) along a covariance path.
std::vector<double> var_path(const std::vector<MatrixXd>& cov_path, const VectorXd& w);

/// True return covariance path of a simulated dataset.
std::vector<MatrixXd> true_return_cov_path(const SimulatedData& sim);

struct SmoothingAccuracy {
  std::vector<double> rho_true;
  std::vector<double> rho_est;  // posterior mean of [Sigma_eps,t]_{21}
  std::vector<double> var_true;
  std::vector<double> var_est;  // 1.645 x posterior mean of the portfolio sd
  double mae_rho = 0.0;
  double mae_var = 0.0;
};

/// Compares smoothed estimates of a chain with the simulation truth; the
/// portfolio is the one the chain accumulated (ChainDraws::portfolio_weights).
SmoothingAccuracy smoothing_accuracy(const SimulatedData& truth, const ChainDraws& chain);

struct DeltaMklConfig {
  Index T = 300;
  long replications = 10;
  McmcConfig mcmc;  // variant and seed are set per fit
  PriorConfig priors;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct DeltaMklReplication {
  long index = 0;
  double mkl_true = 0.0;   // true model fitted
  double mkl_wrong = 0.0;  // competing model fitted
  double delta = 0.0;
  std::optional<std::string> failure;
};

struct DeltaMklResult {
  ModelVariant dgp = ModelVariant::ODCFMSV;
  std::vector<DeltaMklReplication> replications;
  double mean = 0.0;
  double std_error = 0.0;
  long failures = 0;
};

/// ODCFMSV data is fitted by ODCFMSV (true) and PG (wrong), and vice versa.
ModelVariant competing_variant(ModelVariant dgp);

/// Replication r simulates from the reference design under `dgp`, fits both
/// models and records MKL(wrong) - MKL(true). Failed replications are kept
/// with their message and excluded from the mean.
DeltaMklResult delta_mkl_experiment(ModelVariant dgp, const DeltaMklConfig& config);

/// Mean and standard error of the successful replications.
void finalize_delta_mkl(DeltaMklResult& result);

/// Pairwise correlations over the window [t - r, t + r], truncated at the
/// sample ends. Columns are the pairs (i, j), i < j, in row-major order.
MatrixXd rolling_corr(const MatrixXd& X, Index r);

/// Demeaned sample covariance scaled by n/(n - 1).
MatrixXd realized_covariance(const MatrixXd& obs);

struct PerformanceReport {
  std::optional<double> mae_rho;
  std::optional<double> mae_var;
  std::optional<double> fn;
  std::optional<double> ratio_mae_var;  // competitor / reference
  std::optional<double> ratio_fn;
  std::optional<double> mkl;
  std::optional<double> delta_mkl_mean;
  std::optional<double> delta_mkl_se;

  void write(std::ostream& out) const;
};

}  // namespace odcf
