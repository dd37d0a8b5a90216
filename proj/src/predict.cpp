#include "odcfmsv/predict.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "odcfmsv/parallel.hpp"

namespace odcf {

namespace {

constexpr double kVarQuantile = 1.645;

double log_mean_exp(const std::vector<double>& values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc / static_cast<double>(values.size()));
}

double diag_normal_logpdf(const VectorXd& y, const VectorXd& mean, const VectorXd& var) {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  return -0.5 * (static_cast<double>(y.size()) * log2pi + var.array().log().sum() +
                 ((y - mean).array().square() / var.array()).sum());
}

VectorXd next_log_vol(const VectorXd& h, const SvParams& sv, Rng& rng) {
  VectorXd out(h.size());
  for (Index i = 0; i < h.size(); ++i) {
    const double lambda = sv.phi(i) * h(i) + (1.0 - sv.phi(i)) * sv.mu(i);
    out(i) = lambda + std::sqrt(sv.sigma_eta_sq(i)) * rng.normal();
  }
  return out;
}

}  // namespace

PredictiveDraw draw_predictive(const DrawRecord& draw, ModelVariant variant, Rng& rng) {
  const auto& params = draw.params;
  const auto& corr = params.corr;
  const Index q = corr.q();
  PredictiveDraw out;
  const MatrixXd factor = spd_power(draw.tail.P, -0.5 * corr.d) * cholesky_spd(corr.A.matrix()) / std::sqrt(corr.k);
  const MatrixXd P_next = symmetrize(sample_wishart_factor(corr.k, factor, rng).inverse());
  out.corr = standardize_corr(P_next).matrix();
  if (variant == ModelVariant::PG) {
    out.R = P_next;
  } else {
    out.v = next_log_vol(draw.tail.h, params.factor_sv, rng).array().exp().matrix();
    const VectorXd sd = out.v.array().sqrt().matrix();
    out.R = symmetrize(sd.asDiagonal() * out.corr * sd.asDiagonal());
  }
  out.f = cholesky_spd(out.R) * rng.normal_vector(q);
  out.B = params.meas.B;
  if (variant == ModelVariant::SVERR)
    out.omega = next_log_vol(draw.tail.he, params.error_sv, rng).array().exp().matrix();
  else
    out.omega = params.meas.omega;
  out.return_cov = symmetrize(out.B * out.R * out.B.transpose());
  out.return_cov.diagonal() += out.omega;
  return out;
}

std::vector<PredictiveDraw> draw_predictive(const ChainDraws& chain, Rng& rng) {
  std::vector<PredictiveDraw> out;
  out.reserve(chain.draws.size());
  for (const auto& d : chain.draws) out.push_back(draw_predictive(d, chain.variant, rng));
  return out;
}

MatrixXd predictive_return_cov(const std::vector<PredictiveDraw>& draws) {
  if (draws.empty()) throw DomainError("predictive_return_cov: no draws");
  MatrixXd acc = MatrixXd::Zero(draws.front().return_cov.rows(), draws.front().return_cov.cols());
  for (const auto& d : draws) acc += d.return_cov;
  return acc / static_cast<double>(draws.size());
}

double var_estimate(const std::vector<MatrixXd>& cov_draws, const VectorXd& w) {
  if (cov_draws.empty()) throw DomainError("var_estimate: no draws");
  if (!w.allFinite()) throw DomainError("var_estimate: weights must be finite");
  double acc = 0.0;
  for (const auto& s : cov_draws) acc += w.dot(s * w);
  return kVarQuantile * std::sqrt(acc / static_cast<double>(cov_draws.size()));
}

double var_estimate(const std::vector<PredictiveDraw>& draws, const VectorXd& w) {
  std::vector<MatrixXd> covs;
  covs.reserve(draws.size());
  for (const auto& d : draws) covs.push_back(d.return_cov);
  return var_estimate(covs, w);
}

double lps(const VectorXd& y, const std::vector<PredictiveDraw>& draws) {
  if (draws.empty()) throw DomainError("lps: no draws");
  std::vector<double> logs;
  logs.reserve(draws.size());
  for (const auto& d : draws) {
    if (d.B.rows() != y.size()) throw DimensionError("lps: observation length differs from B");
    logs.push_back(diag_normal_logpdf(y, d.B * d.f, d.omega));
  }
  return log_mean_exp(logs);
}

double lps_ew(const VectorXd& y, const VectorXd& w, const std::vector<PredictiveDraw>& draws) {
  if (draws.empty()) throw DomainError("lps_ew: no draws");
  if (w.size() != y.size()) throw DimensionError("lps_ew: weight length differs from observation");
  const double r = w.dot(y);
  std::vector<double> logs;
  logs.reserve(draws.size());
  for (const auto& d : draws) {
    const double mean = w.dot(d.B * d.f);
    const double var = w.dot(d.omega.cwiseProduct(w));
    logs.push_back(-0.5 * (std::log(2.0 * std::numbers::pi * var) + (r - mean) * (r - mean) / var));
  }
  return log_mean_exp(logs);
}

double cum_log_bayes_factor(const std::vector<double>& lps_model1, const std::vector<double>& lps_model0) {
  if (lps_model1.size() != lps_model0.size()) throw DimensionError("cum_log_bayes_factor: series lengths differ");
  double out = 0.0;
  for (std::size_t t = 0; t < lps_model1.size(); ++t) out += lps_model1[t] - lps_model0[t];
  return out;
}

std::string_view to_string(Evidence e) {
  switch (e) {
    case Evidence::FavorModel0: return "favor Model 0";
    case Evidence::BareMention: return "not worth more than a bare mention";
    case Evidence::Positive: return "positive";
    case Evidence::Strong: return "strong";
    case Evidence::VeryStrong: return "very strong";
  }
  return "unknown";
}

Evidence evidence_label(double log_bf) {
  if (std::isnan(log_bf)) throw DomainError("evidence_label: NaN log Bayes factor");
  if (log_bf < 0.0) return Evidence::FavorModel0;
  if (log_bf < 1.0) return Evidence::BareMention;
  if (log_bf < 3.0) return Evidence::Positive;
  if (log_bf < 5.0) return Evidence::Strong;
  return Evidence::VeryStrong;
}

VectorXd equal_weights(Index p) { return VectorXd::Constant(p, 1.0 / static_cast<double>(p)); }

ForecastPeriod forecast_one(const ChainDraws& chain, Index index, const VectorXd* y_next, const VectorXd& w,
                            Rng& rng) {
  const auto draws = draw_predictive(chain, rng);
  ForecastPeriod out;
  out.index = index;
  out.cov = predictive_return_cov(draws);
  out.var = var_estimate(draws, w);
  if (y_next) {
    out.lps = lps(*y_next, draws);
    out.lps_ew = lps_ew(*y_next, w, draws);
  }
  return out;
}

std::vector<double> ModelBacktest::lps_series() const {
  std::vector<double> out;
  for (const auto& p : periods) out.push_back(p.lps.value_or(std::numeric_limits<double>::quiet_NaN()));
  return out;
}

std::vector<double> ModelBacktest::lps_ew_series() const {
  std::vector<double> out;
  for (const auto& p : periods) out.push_back(p.lps_ew.value_or(std::numeric_limits<double>::quiet_NaN()));
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = base ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xbf58476d1ce4e5b9ULL);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ModelBacktest rolling_backtest(const FactorDataset& data, ModelVariant variant, const BacktestConfig& config) {
  if (config.periods < 1) throw DomainError("backtest: need at least one period");
  if (config.first_target < 2) throw DomainError("backtest: first forecast target must leave >= 2 rows to fit");
  if (config.first_target + config.periods > data.T())
    throw DataError("backtest: forecast window runs past the end of the data (" + std::to_string(data.T()) +
                    " rows)");
  const VectorXd w = config.weights.size() ? config.weights : equal_weights(data.p());
  if (w.size() != data.p()) throw DimensionError("backtest: weight vector length differs from p");
  ModelBacktest out;
  out.variant = variant;
  out.periods.resize(static_cast<std::size_t>(config.periods));
  parallel_for(config.periods, config.threads, [&](long n) {
    const Index target = config.first_target + n;
    McmcConfig mc = config.mcmc;
    mc.variant = variant;
    mc.track_log_joint = false;
    mc.seed = derive_seed(config.mcmc.seed, static_cast<std::uint64_t>(variant) + 1, static_cast<std::uint64_t>(n));
    const ChainDraws chain = run_chain(data.head(target), config.priors, mc);
    Rng rng(derive_seed(mc.seed, 0xf0ecu), 1);
    const VectorXd y = data.Y.row(target).transpose();
    out.periods[static_cast<std::size_t>(n)] = forecast_one(chain, target, &y, w, rng);
  });
  return out;
}

}  // namespace odcf
