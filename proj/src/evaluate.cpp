#include "odcfmsv/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "odcfmsv/error.hpp"
#include "odcfmsv/parallel.hpp"
#include "odcfmsv/predict.hpp"

namespace odcf {

double mae_series(const std::vector<double>& estimate, const std::vector<double>& truth) {
  if (estimate.size() != truth.size()) throw DimensionError("mae_series: length mismatch");
  if (estimate.empty()) throw DomainError("mae_series: empty series");
  double total = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) total += std::abs(estimate[t] - truth[t]);
  return total / static_cast<double>(truth.size());
}

double mae_series(const VectorXd& estimate, const VectorXd& truth) {
  return mae_series(std::vector<double>(estimate.data(), estimate.data() + estimate.size()),
                    std::vector<double>(truth.data(), truth.data() + truth.size()));
}

double frobenius_error(const MatrixXd& truth, const MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw DimensionError("frobenius_error: dimension mismatch");
  return (truth - estimate).norm();
}

double fn_mean(const std::vector<MatrixXd>& truth, const std::vector<MatrixXd>& estimate) {
  if (truth.size() != estimate.size()) throw DimensionError("fn_mean: length mismatch");
  if (truth.empty()) throw DomainError("fn_mean: no periods");
  double total = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) total += frobenius_error(truth[t], estimate[t]);
  return total / static_cast<double>(truth.size());
}

double kl_normal(const MatrixXd& sigma0, const MatrixXd& sigma_est) {
  if (sigma0.rows() != sigma_est.rows() || sigma0.cols() != sigma_est.cols() || sigma0.rows() != sigma0.cols())
    throw DimensionError("kl_normal: dimension mismatch");
  const double p = static_cast<double>(sigma0.rows());
  const MatrixXd l_est = cholesky_spd(sigma_est);
  const MatrixXd l0 = cholesky_spd(sigma0);
  // tr(Sigma_est^{-1} Sigma0) = |L_est^{-1} L0|_F^2
  const MatrixXd m = l_est.triangularView<Eigen::Lower>().solve(l0);
  const double logdet0 = 2.0 * l0.diagonal().array().log().sum();
  const double logdet_est = 2.0 * l_est.diagonal().array().log().sum();
  return -0.5 * p + 0.5 * m.squaredNorm() - 0.5 * logdet0 + 0.5 * logdet_est;
}

double mkl(const std::vector<MatrixXd>& sigma0_path, const std::vector<MatrixXd>& sigma_est_path) {
  if (sigma0_path.size() != sigma_est_path.size()) throw DimensionError("mkl: path length mismatch");
  if (sigma0_path.empty()) throw DomainError("mkl: empty path");
  double total = 0.0;
  for (std::size_t t = 0; t < sigma0_path.size(); ++t) total += kl_normal(sigma0_path[t], sigma_est_path[t]);
  return total / static_cast<double>(sigma0_path.size());
}

std::vector<double> element_series(const std::vector<MatrixXd>& path, Index i, Index j) {
  std::vector<double> out;
  out.reserve(path.size());
  for (const auto& m : path) {
    if (i >= m.rows() || j >= m.cols()) throw DimensionError("element_series: index out of range");
    out.push_back(m(i, j));
  }
  return out;
}

std::vector<double> var_path(const std::vector<MatrixXd>& cov_path, const VectorXd& w) {
  std::vector<double> out;
  out.reserve(cov_path.size());
  for (const auto& s : cov_path) {
    if (s.rows() != w.size()) throw DimensionError("var_path: weight length mismatch");
    out.push_back(kVarMultiplier * std::sqrt(w.dot(s * w)));
  }
  return out;
}

std::vector<MatrixXd> true_return_cov_path(const SimulatedData& sim) {
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(sim.data.T()));
  for (Index t = 0; t < sim.data.T(); ++t) out.push_back(return_covariance(sim.params, sim.latents, t, sim.variant));
  return out;
}

SmoothingAccuracy smoothing_accuracy(const SimulatedData& truth, const ChainDraws& chain) {
  if (chain.count() == 0) throw DomainError("smoothing_accuracy: chain has no stored draws");
  if (chain.corr_sum.size() != truth.latents.P.size()) throw DimensionError("smoothing_accuracy: length mismatch");
  if (truth.data.q() < 2) throw DomainError("smoothing_accuracy: need at least two factors");
  SmoothingAccuracy out;
  out.rho_true = element_series(correlation_path(truth.latents.P), 1, 0);
  out.rho_est = element_series(chain.corr_mean(), 1, 0);
  out.var_true = var_path(true_return_cov_path(truth), chain.portfolio_weights);
  const VectorXd sd = chain.portfolio_sd_mean();
  for (Index t = 0; t < sd.size(); ++t) out.var_est.push_back(kVarMultiplier * sd(t));
  out.mae_rho = mae_series(out.rho_est, out.rho_true);
  out.mae_var = mae_series(out.var_est, out.var_true);
  return out;
}

ModelVariant competing_variant(ModelVariant dgp) {
  switch (dgp) {
    case ModelVariant::ODCFMSV: return ModelVariant::PG;
    case ModelVariant::PG: return ModelVariant::ODCFMSV;
    case ModelVariant::SVERR: break;
  }
  throw DomainError("delta_mkl_experiment: the DGP must be odcfmsv or pg");
}

void finalize_delta_mkl(DeltaMklResult& result) {
  std::vector<double> ok;
  result.failures = 0;
  for (const auto& r : result.replications) {
    if (r.failure) ++result.failures;
    else ok.push_back(r.delta);
  }
  result.mean = 0.0;
  result.std_error = 0.0;
  if (ok.empty()) return;
  const double n = static_cast<double>(ok.size());
  for (double v : ok) result.mean += v;
  result.mean /= n;
  if (ok.size() > 1) {
    double ss = 0.0;
    for (double v : ok) ss += (v - result.mean) * (v - result.mean);
    result.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
}

DeltaMklResult delta_mkl_experiment(ModelVariant dgp, const DeltaMklConfig& config) {
  const ModelVariant wrong = competing_variant(dgp);
  if (config.replications < 1) throw DomainError("delta_mkl_experiment: need at least one replication");
  DeltaMklResult result;
  result.dgp = dgp;
  result.replications.resize(static_cast<std::size_t>(config.replications));
  const auto dgp_tag = static_cast<std::uint64_t>(dgp) + 1;
  parallel_for(config.replications, config.threads, [&](long r) {
    auto& rep = result.replications[static_cast<std::size_t>(r)];
    rep.index = r;
    try {
      Rng rng(derive_seed(config.seed, dgp_tag, static_cast<std::uint64_t>(r)), 0);
      const ModelParams truth = reference_simulation_params();
      const SimulatedData sim = dgp == ModelVariant::PG
                                    ? simulate_pg(truth.meas, truth.corr, config.T, rng)
                                    : simulate_odcfmsv(truth.meas, truth.factor_sv, truth.corr, config.T, rng);
      const auto sigma0 = true_return_cov_path(sim);
      auto fit = [&](ModelVariant v) {
        McmcConfig mc = config.mcmc;
        mc.variant = v;
        mc.seed = derive_seed(config.seed, dgp_tag * 16 + static_cast<std::uint64_t>(v) + 1,
                              static_cast<std::uint64_t>(r));
        const ChainDraws chain = run_chain(sim.data, config.priors, mc);
        return mkl(sigma0, chain.return_cov_mean());
      };
      rep.mkl_true = fit(dgp);
      rep.mkl_wrong = fit(wrong);
      rep.delta = rep.mkl_wrong - rep.mkl_true;
    } catch (const Error& e) {
      rep.failure = e.what();
    }
  });
  finalize_delta_mkl(result);
  return result;
}

MatrixXd rolling_corr(const MatrixXd& X, Index r) {
  if (r < 1) throw DomainError("rolling_corr: window half-width must be >= 1");
  const Index T = X.rows(), q = X.cols();
  if (2 * r + 1 > T) throw DomainError("rolling_corr: window longer than the series");
  if (q < 2) throw DomainError("rolling_corr: need at least two series");
  MatrixXd out(T, q * (q - 1) / 2);
  for (Index t = 0; t < T; ++t) {
    const Index lo = std::max<Index>(0, t - r), hi = std::min<Index>(T - 1, t + r);
    const MatrixXd w = X.middleRows(lo, hi - lo + 1);
    const MatrixXd centered = w.rowwise() - w.colwise().mean();
    const MatrixXd cross = centered.transpose() * centered;
    Index col = 0;
    for (Index i = 0; i < q; ++i)
      for (Index j = i + 1; j < q; ++j) {
        const double denom = std::sqrt(cross(i, i) * cross(j, j));
        if (!(denom > 0.0)) throw NumericalError("rolling_corr: constant series inside a window at t = " +
                                                 std::to_string(t));
        out(t, col++) = std::clamp(cross(i, j) / denom, -1.0, 1.0);
      }
  }
  return out;
}

MatrixXd realized_covariance(const MatrixXd& obs) {
  const Index n = obs.rows();
  if (n < 2) throw DomainError("realized_covariance: need at least two observations");
  const MatrixXd centered = obs.rowwise() - obs.colwise().mean();
  const MatrixXd sample = centered.transpose() * centered / static_cast<double>(n);
  return symmetrize(MatrixXd(sample * (static_cast<double>(n) / static_cast<double>(n - 1))));
}

void PerformanceReport::write(std::ostream& out) const {
  auto line = [&](const char* key, const std::optional<double>& v) {
    if (v) out << key << ": " << *v << '\n';
  };
  out << "[performance]\n";
  line("mae_rho", mae_rho);
  line("mae_var", mae_var);
  line("fn", fn);
  line("ratio_mae_var", ratio_mae_var);
  line("ratio_fn", ratio_fn);
  line("mkl", mkl);
  line("delta_mkl_mean", delta_mkl_mean);
  line("delta_mkl_se", delta_mkl_se);
}

}  // namespace odcf
