#pragma once

// One-step-ahead predictive draws, VaR, log predictive scores and Bayes-factor
// bookkeeping for rolling forecasts.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "odcfmsv/gibbs.hpp"

namespace odcf {

/// One draw of the period T+1 predictive hierarchy from one kept sweep.
struct PredictiveDraw {
  VectorXd v;           // factor variances exp(h_{T+1}) (empty for PG)
  MatrixXd corr;        // standardized P_{T+1}
  MatrixXd R;           // factor covariance
  VectorXd f;           // factor draw
  MatrixXd B;
  VectorXd omega;       // error variances at T+1
  MatrixXd return_cov;  // B R B' + diag(omega)
};

PredictiveDraw draw_predictive(const DrawRecord& draw, ModelVariant variant, Rng& rng);
std::vector<PredictiveDraw> draw_predictive(const ChainDraws& chain, Rng& rng);

/// Mean of B R B' + Omega over draws.
MatrixXd predictive_return_cov(const std::vector<PredictiveDraw>& draws);

/// 1.645 sqrt(mean_l w' Sigma_l w).
double var_estimate(const std::vector<MatrixXd>& cov_draws, const VectorXd& w);
double var_estimate(const std::vector<PredictiveDraw>& draws, const VectorXd& w);

/// log of (1/M) sum_l N_p(y | B_l f_l, Omega_l), evaluated with a max shift.
double lps(const VectorXd& y, const std::vector<PredictiveDraw>& draws);
/// Portfolio analogue with mean w'B_l f_l and variance w'Omega_l w.
double lps_ew(const VectorXd& y, const VectorXd& w, const std::vector<PredictiveDraw>& draws);

/// sum_t [lps1(t) - lps0(t)].
double cum_log_bayes_factor(const std::vector<double>& lps_model1, const std::vector<double>& lps_model0);

enum class Evidence { FavorModel0, BareMention, Positive, Strong, VeryStrong };
std::string_view to_string(Evidence e);
Evidence evidence_label(double log_bf);

VectorXd equal_weights(Index p);

struct ForecastPeriod {
  Index index = 0;  // zero-based row of the forecast target
  MatrixXd cov;
  double var = 0.0;
  std::optional<double> lps;
  std::optional<double> lps_ew;
};

/// Forecast of the period after the chain's sample; scores need `y_next`.
ForecastPeriod forecast_one(const ChainDraws& chain, Index index, const VectorXd* y_next, const VectorXd& w,
                            Rng& rng);

struct BacktestConfig {
  Index first_target = 0;  // zero-based row of the first forecast target
  long periods = 1;
  McmcConfig mcmc;
  PriorConfig priors;
  VectorXd weights;        // empty means equal weights
  int threads = 1;
};

struct ModelBacktest {
  ModelVariant variant = ModelVariant::ODCFMSV;
  std::vector<ForecastPeriod> periods;

  std::vector<double> lps_series() const;
  std::vector<double> lps_ew_series() const;
};

/// Mixes a base seed with labels into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Refits on rows [0, target) for each target in first_target .. first_target + periods - 1.
ModelBacktest rolling_backtest(const FactorDataset& data, ModelVariant variant, const BacktestConfig& config);

}  // namespace odcf
