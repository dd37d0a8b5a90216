#include "odcfmsv/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace odcf {

void McmcConfig::validate() const {
  if (burn_in < 0) throw DomainError("McmcConfig: burn-in must be >= 0");
  if (kept < 1) throw DomainError("McmcConfig: need at least one kept sweep");
  if (thin < 1) throw DomainError("McmcConfig: thin must be >= 1");
  if (!(offset > 0.0)) throw DomainError("McmcConfig: offset must be positive");
}

BConditional b_conditional(const MatrixXd& Y, const MatrixXd& F) {
  const Index q = F.cols();
  if (Y.rows() != F.rows()) throw DimensionError("sample_B: shape mismatch");
  const MatrixXd precision = F.transpose() * F + MatrixXd::Identity(q, q);
  const Eigen::LLT<MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_B: F'F + I is not positive definite");
  const MatrixXd sigma_b = symmetrize(llt.solve(MatrixXd::Identity(q, q)));
  return {Y.transpose() * F * sigma_b, sigma_b};
}

MatrixXd sample_B(const MatrixXd& Y, const MatrixXd& F, const VectorXd& omega, Rng& rng) {
  if (omega.size() != Y.cols()) throw DimensionError("sample_B: shape mismatch");
  const BConditional cond = b_conditional(Y, F);
  const MatrixXd c = cholesky_spd(cond.sigma_b);
  const MatrixXd z = rng.normal_matrix(Y.cols(), F.cols());
  return cond.mean + omega.array().sqrt().matrix().asDiagonal() * z * c.transpose();
}

VectorXd sample_sigma_sq(const MatrixXd& Y, const MatrixXd& F, const MatrixXd& B, const PriorConfig& priors,
                         Rng& rng) {
  const MatrixXd resid = Y - F * B.transpose();
  const double shape = 0.5 * (priors.nu0 + static_cast<double>(Y.rows()));
  VectorXd out(Y.cols());
  for (Index j = 0; j < Y.cols(); ++j)
    out(j) = rng.inverse_gamma(shape, 0.5 * (priors.nu0 * priors.s0 + resid.col(j).squaredNorm()));
  return out;
}

VectorXd collapsed_residual_ss(const MatrixXd& Y, const MatrixXd& F) {
  const Index q = F.cols();
  const MatrixXd precision = F.transpose() * F + MatrixXd::Identity(q, q);
  const Eigen::LLT<MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("collapsed_residual_ss: F'F + I not positive definite");
  // y'(I + F F')^{-1} y = |y - F b|^2 + |b|^2 with b the ridge solution; avoids cancellation.
  const MatrixXd b = llt.solve(F.transpose() * Y);
  return (Y - F * b).colwise().squaredNorm().transpose() + b.colwise().squaredNorm().transpose();
}

InvGammaParams sigma_sq_conditional(const MatrixXd& Y, const MatrixXd& F, const PriorConfig& priors) {
  const VectorXd ss = collapsed_residual_ss(Y, F);
  return {0.5 * (priors.nu0 + static_cast<double>(Y.rows())),
          (0.5 * (priors.nu0 * priors.s0 + ss.array())).matrix()};
}

VectorXd sample_sigma_sq_collapsed(const MatrixXd& Y, const MatrixXd& F, const PriorConfig& priors, Rng& rng) {
  const InvGammaParams c = sigma_sq_conditional(Y, F, priors);
  VectorXd out(Y.cols());
  for (Index j = 0; j < Y.cols(); ++j) out(j) = rng.inverse_gamma(c.shape, c.scale(j));
  return out;
}

std::pair<VectorXd, MatrixXd> bj_conditional(const VectorXd& y, const MatrixXd& F, const VectorXd& lambda, double c0) {
  const Index q = F.cols();
  if (y.size() != F.rows() || lambda.size() != F.rows()) throw DimensionError("sample_bj_sverr: shape mismatch");
  const MatrixXd weighted = F.transpose() * lambda.cwiseInverse().asDiagonal();
  const MatrixXd precision = weighted * F + MatrixXd::Identity(q, q) / (c0 * c0);
  const Eigen::LLT<MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_bj_sverr: posterior precision not positive definite");
  const MatrixXd cov = symmetrize(llt.solve(MatrixXd::Identity(q, q)));
  return {cov * (weighted * y), cov};
}

VectorXd sample_bj_sverr(const VectorXd& y, const MatrixXd& F, const VectorXd& lambda, double c0, Rng& rng) {
  const auto [mean, cov] = bj_conditional(y, F, lambda, c0);
  return sample_mvn_factor(mean, cholesky_spd(cov), rng);
}

std::vector<MatrixXd> ChainDraws::corr_mean() const {
  std::vector<MatrixXd> out;
  const double n = static_cast<double>(std::max<long>(count(), 1));
  for (const auto& m : corr_sum) out.push_back(m / n);
  return out;
}

VectorXd ChainDraws::portfolio_sd_mean() const {
  return portfolio_sd_sum / static_cast<double>(std::max<long>(count(), 1));
}

std::vector<MatrixXd> ChainDraws::return_cov_mean() const {
  std::vector<MatrixXd> out;
  const double n = static_cast<double>(std::max<long>(count(), 1));
  for (const auto& m : return_cov_sum) out.push_back(m / n);
  return out;
}

namespace {

SvBlockState make_block(double mu, double phi, double s2, const VectorXd& h) {
  SvBlockState b;
  b.params = {mu, phi, s2};
  b.h = h;
  b.s = VectorXi::Zero(h.size());
  return b;
}

double sample_log_variance(const VectorXd& x) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(std::max<Index>(x.size() - 1, 1));
  return std::log(std::max(var, 1e-8));
}

}  // namespace

ChainState initial_state(const FactorDataset& data, const PriorConfig& priors, ModelVariant variant) {
  data.validate();
  priors.validate();
  const Index T = data.T(), p = data.p(), q = data.q();
  ChainState s;
  const MatrixXd precision = data.F.transpose() * data.F + MatrixXd::Identity(q, q);
  s.params.meas.B = (data.Y.transpose() * data.F) * precision.inverse();
  const MatrixXd resid = data.Y - data.F * s.params.meas.B.transpose();
  VectorXd resid_logvar(p);
  for (Index j = 0; j < p; ++j) resid_logvar(j) = sample_log_variance(resid.col(j));
  if (variant != ModelVariant::SVERR) s.params.meas.omega = resid_logvar.array().exp().matrix();

  constexpr double kPhi0 = 0.9, kSigma0 = 0.05;
  if (variant != ModelVariant::PG) {
    s.latents.H.resize(T, q);
    s.params.factor_sv = SvParams::constant(q, 0.0, kPhi0, kSigma0);
    for (Index i = 0; i < q; ++i) {
      const double lv = sample_log_variance(data.F.col(i));
      s.latents.H.col(i).setConstant(lv);
      s.params.factor_sv.mu(i) = lv;
      s.factor_blocks.push_back(make_block(lv, kPhi0, kSigma0, s.latents.H.col(i)));
    }
  }
  if (variant == ModelVariant::SVERR) {
    s.latents.He.resize(T, p);
    s.params.error_sv = SvParams::constant(p, 0.0, kPhi0, kSigma0);
    for (Index j = 0; j < p; ++j) {
      s.latents.He.col(j).setConstant(resid_logvar(j));
      s.params.error_sv.mu(j) = resid_logvar(j);
      s.error_blocks.push_back(make_block(resid_logvar(j), kPhi0, kSigma0, s.latents.He.col(j)));
    }
  }
  s.latents.P.assign(static_cast<std::size_t>(T), MatrixXd::Identity(q, q));
  s.params.corr.A = SpdMatrix<double>(MatrixXd(MatrixXd::Identity(q, q)));
  s.params.corr.d = 0.5;
  s.params.corr.k = static_cast<double>(q) + 10.0;
  return s;
}

ChainState state_from(const ModelParams& params, const LatentState& latents, ModelVariant variant, Index T) {
  ChainState s;
  s.params = params;
  s.latents = latents;
  if (static_cast<Index>(latents.P.size()) != T) throw DimensionError("state_from: P path length differs from T");
  if (variant != ModelVariant::PG) {
    const auto& f = params.factor_sv;
    for (Index i = 0; i < f.size(); ++i)
      s.factor_blocks.push_back(make_block(f.mu(i), f.phi(i), f.sigma_eta_sq(i), latents.H.col(i)));
  }
  if (variant == ModelVariant::SVERR) {
    const auto& e = params.error_sv;
    for (Index j = 0; j < e.size(); ++j)
      s.error_blocks.push_back(make_block(e.mu(j), e.phi(j), e.sigma_eta_sq(j), latents.He.col(j)));
  }
  return s;
}

GibbsSampler::GibbsSampler(FactorDataset data, PriorConfig priors, McmcConfig config)
    : GibbsSampler(data, priors, config, initial_state(data, priors, config.variant)) {}

GibbsSampler::GibbsSampler(FactorDataset data, PriorConfig priors, McmcConfig config, ChainState start)
    : data_(std::move(data)),
      priors_(priors),
      config_(config),
      state_(std::move(start)),
      rng_(config.seed, 0) {
  config_.validate();
  priors_.validate();
  draws_.variant = config_.variant;
  const Index T = data_.T();
  draws_.corr_sum.assign(static_cast<std::size_t>(T), MatrixXd::Zero(data_.q(), data_.q()));
  draws_.return_cov_sum.assign(static_cast<std::size_t>(T), MatrixXd::Zero(data_.p(), data_.p()));
  draws_.h_sum = MatrixXd::Zero(T, config_.variant == ModelVariant::PG ? 0 : data_.q());
  draws_.he_sum = MatrixXd::Zero(T, config_.variant == ModelVariant::SVERR ? data_.p() : 0);
  if (config_.portfolio_weights.size() == 0)
    config_.portfolio_weights = VectorXd::Constant(data_.p(), 1.0 / static_cast<double>(data_.p()));
  if (config_.portfolio_weights.size() != data_.p()) throw DimensionError("McmcConfig: portfolio weights length != p");
  draws_.portfolio_weights = config_.portfolio_weights;
  draws_.portfolio_sd_sum = VectorXd::Zero(T);
}

void GibbsSampler::set_data(FactorDataset data) {
  if (data.T() != data_.T() || data.p() != data_.p() || data.q() != data_.q())
    throw DimensionError("set_data: dataset shape differs");
  data_ = std::move(data);
}

void GibbsSampler::step_measurement() {
  auto& meas = state_.params.meas;
  if (config_.variant != ModelVariant::SVERR) {
    meas.omega = sample_sigma_sq_collapsed(data_.Y, data_.F, priors_, rng_);
    meas.B = sample_B(data_.Y, data_.F, meas.omega, rng_);
    return;
  }
  const Index p = data_.p();
  for (Index j = 0; j < p; ++j) {
    const VectorXd lambda = state_.latents.He.col(j).array().exp().matrix();
    meas.B.row(j) = sample_bj_sverr(data_.Y.col(j), data_.F, lambda, priors_.c0, rng_).transpose();
  }
  const MatrixXd resid = data_.Y - data_.F * meas.B.transpose();
  for (Index j = 0; j < p; ++j) {
    auto& block = state_.error_blocks[static_cast<std::size_t>(j)];
    update_sv_series(resid.col(j), config_.offset, MixtureTable::ksc(), priors_, adapting_, block, rng_);
    state_.latents.He.col(j) = block.h;
  }
}

void GibbsSampler::step_factor_sv(bool adapt) {
  for (std::size_t i = 0; i < state_.factor_blocks.size(); ++i) {
    auto& block = state_.factor_blocks[i];
    update_sv_series(data_.F.col(static_cast<Index>(i)), config_.offset, MixtureTable::ksc(), priors_, adapt, block,
                     rng_);
    state_.latents.H.col(static_cast<Index>(i)) = block.h;
  }
}

void GibbsSampler::step_correlation() {
  if (config_.variant == ModelVariant::PG) {
    sample_p_path(state_.latents.P, data_.F, state_.params.corr, FactorLikelihood::Covariance, rng_,
                  &draws_.diagnostics.pt);
  } else {
    const MatrixXd eps = standardized_factors(data_.F, state_.latents.H);
    sample_p_path(state_.latents.P, eps, state_.params.corr, FactorLikelihood::Correlation, rng_,
                  &draws_.diagnostics.pt);
  }
}

void GibbsSampler::step_A() {
  const Index q = data_.q();
  auto& corr = state_.params.corr;
  corr.A = sample_A(state_.latents.P, corr.d, corr.k, priors_.a_df(q), priors_.a_scale(q), rng_);
}

void GibbsSampler::step_d_noncentered(bool adapt) {
  const bool pg = config_.variant == ModelVariant::PG;
  const MatrixXd X = pg ? data_.F : standardized_factors(data_.F, state_.latents.H);
  const bool moved = sample_d_noncentered(state_.latents.P, X, state_.params.corr,
                                          pg ? FactorLikelihood::Covariance : FactorLikelihood::Correlation,
                                          state_.d_move, adapt, rng_);
  ++draws_.diagnostics.d_move_proposed;
  if (moved) ++draws_.diagnostics.d_move_accepted;
}

void GibbsSampler::step_d_k() {
  auto& corr = state_.params.corr;
  const TransitionCache cache(state_.latents.P, corr.A.matrix());
  auto& diag = draws_.diagnostics;
  ++diag.arms_calls;
  ArmsStats st;
  const double k_now = corr.k;
  corr.d = arms([&](double d) { return logpost_d(d, cache, k_now); }, arms_config_d(), corr.d, rng_, &st);
  diag.arms_d_evaluations += st.evaluations;
  diag.arms_d_moves += st.moved ? 1 : 0;
  const double d_now = corr.d;
  const double trace = cache.trace_sum(d_now);
  corr.k = arms([&](double k) { return logpost_k(k, cache, d_now, priors_.lambda0, trace); },
                arms_config_k(data_.q()), corr.k, rng_, &st);
  diag.arms_k_evaluations += st.evaluations;
  diag.arms_k_moves += st.moved ? 1 : 0;
}

void GibbsSampler::sync_params() {
  for (std::size_t i = 0; i < state_.factor_blocks.size(); ++i) {
    const auto& b = state_.factor_blocks[i].params;
    const Index ii = static_cast<Index>(i);
    state_.params.factor_sv.mu(ii) = b.mu;
    state_.params.factor_sv.phi(ii) = b.phi;
    state_.params.factor_sv.sigma_eta_sq(ii) = b.sigma_eta_sq;
  }
  for (std::size_t j = 0; j < state_.error_blocks.size(); ++j) {
    const auto& b = state_.error_blocks[j].params;
    const Index jj = static_cast<Index>(j);
    state_.params.error_sv.mu(jj) = b.mu;
    state_.params.error_sv.phi(jj) = b.phi;
    state_.params.error_sv.sigma_eta_sq(jj) = b.sigma_eta_sq;
  }
}

void GibbsSampler::sweep(bool adapt) {
  const auto guarded = [&](const char* block, auto&& fn) {
    try {
      fn();
    } catch (const NumericalError& e) {
      throw NumericalError("sweep " + std::to_string(sweeps_done_ + 1) + ", block " + block + ": " + e.what());
    }
  };
  adapting_ = adapt;
  guarded("measurement", [&] { step_measurement(); });
  if (config_.variant != ModelVariant::PG) guarded("factor-sv", [&] { step_factor_sv(adapt); });
  sync_params();
  guarded("P", [&] { step_correlation(); });
  guarded("A", [&] { step_A(); });
  if (config_.noncentered_d) guarded("d (innovations)", [&] { step_d_noncentered(adapt); });
  guarded("d,k", [&] { step_d_k(); });
  ++sweeps_done_;
}

void GibbsSampler::store_draw() {
  const auto& params = state_.params;
  const auto& lat = state_.latents;
  const Index T = data_.T();
  if (config_.variant != ModelVariant::PG) params.factor_sv.validate();
  if (config_.variant == ModelVariant::SVERR) params.error_sv.validate();
  params.corr.validate();
  DrawRecord rec;
  rec.params = params;
  rec.tail.P = lat.P.back();
  if (config_.variant != ModelVariant::PG) rec.tail.h = lat.H.row(T - 1).transpose();
  if (config_.variant == ModelVariant::SVERR) rec.tail.he = lat.He.row(T - 1).transpose();
  if (config_.track_log_joint) rec.log_joint = log_joint(data_, params, lat, priors_, config_.variant);
  for (Index t = 0; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    draws_.corr_sum[ts] += standardize_corr(lat.P[ts]).matrix();
    const MatrixXd cov = return_covariance(params, lat, t, config_.variant);
    draws_.return_cov_sum[ts] += cov;
    const VectorXd& w = config_.portfolio_weights;
    draws_.portfolio_sd_sum(t) += std::sqrt(w.dot(cov * w));
  }
  if (config_.variant != ModelVariant::PG) draws_.h_sum += lat.H;
  if (config_.variant == ModelVariant::SVERR) draws_.he_sum += lat.He;
  draws_.draws.push_back(std::move(rec));
}

void GibbsSampler::run(const std::function<bool(long)>& on_sweep) {
  const long total = total_sweeps();
  while (sweeps_done_ < total) {
    const bool in_burn_in = sweeps_done_ < config_.burn_in;
    sweep(config_.adapt && in_burn_in);
    const long kept_index = sweeps_done_ - config_.burn_in;  // 1-based once past burn-in
    if (kept_index >= 1 && kept_index % config_.thin == 0) store_draw();
    if (on_sweep && !on_sweep(sweeps_done_)) break;
  }
}

ChainDraws run_chain(const FactorDataset& data, const PriorConfig& priors, const McmcConfig& config) {
  GibbsSampler sampler(data, priors, config);
  sampler.run();
  return sampler.draws();
}

double percentile(std::vector<double> values, double prob) {
  if (values.empty()) throw DomainError("percentile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("percentile: probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PosteriorSummary summarize(const ChainDraws& draws) {
  if (draws.draws.empty()) throw DomainError("summarize: chain has no stored draws");
  PosteriorSummary out;
  const auto first = flatten_parameters(draws.draws.front().params, draws.variant);
  std::vector<std::vector<double>> columns(first.size());
  for (const auto& rec : draws.draws) {
    const auto flat = flatten_parameters(rec.params, draws.variant);
    for (std::size_t i = 0; i < flat.size(); ++i) columns[i].push_back(flat[i].value);
  }
  for (std::size_t i = 0; i < first.size(); ++i) {
    const auto& c = columns[i];
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
    out.params.push_back({first[i].group, first[i].name, mean, percentile(c, 0.025), percentile(c, 0.975)});
  }
  out.corr_mean = draws.corr_mean();
  out.return_cov_mean = draws.return_cov_mean();
  return out;
}

}  // namespace odcf
