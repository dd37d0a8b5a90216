#include "odcfmsv/model.hpp"

#include <cmath>
#include <numbers>

namespace odcf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double normal_logpdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

double inverse_gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double beta_logpdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return -std::numeric_limits<double>::infinity();
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) throw NumericalError(std::string("log_joint: non-finite value in term '") + term + "'");
}

double sv_path_logpdf(const Eigen::Ref<const VectorXd>& h, double mu, double phi, double s2) {
  double out = normal_logpdf(h(0), mu, s2 / (1.0 - phi * phi));
  for (Index t = 1; t < h.size(); ++t) out += normal_logpdf(h(t), mu + phi * (h(t - 1) - mu), s2);
  return out;
}

double sv_prior_logpdf(const SvParams& sv, const PriorConfig& priors) {
  double out = 0.0;
  for (Index i = 0; i < sv.size(); ++i)
    out += log_prior_mu(sv.mu(i), priors) + log_prior_phi(sv.phi(i), priors) +
           log_prior_sigma_eta_sq(sv.sigma_eta_sq(i), priors);
  return out;
}

SvParams sample_sv_prior(Index n, const PriorConfig& priors, Rng& rng) {
  SvParams sv;
  sv.mu.resize(n);
  sv.phi.resize(n);
  sv.sigma_eta_sq.resize(n);
  for (Index i = 0; i < n; ++i) {
    sv.mu(i) = rng.normal(priors.mu_mean, std::sqrt(priors.mu_var));
    sv.phi(i) = 2.0 * rng.beta(priors.phi_a, priors.phi_b) - 1.0;
    sv.sigma_eta_sq(i) = rng.inverse_gamma(priors.sigma_eta_shape, priors.sigma_eta_scale);
  }
  return sv;
}

MatrixXd simulate_factors_sv(const MatrixXd& H, const std::vector<MatrixXd>& P, Rng& rng) {
  const Index T = H.rows();
  const Index q = H.cols();
  MatrixXd F(T, q);
  for (Index t = 0; t < T; ++t) {
    const auto corr = standardize_corr(P[t]);
    const VectorXd eps = cholesky_spd(corr.matrix()) * rng.normal_vector(q);
    F.row(t) = ((0.5 * H.row(t).array()).exp() * eps.transpose().array()).matrix();
  }
  return F;
}

MatrixXd simulate_factors_pg(const std::vector<MatrixXd>& P, Rng& rng) {
  const Index T = static_cast<Index>(P.size());
  const Index q = P.front().rows();
  MatrixXd F(T, q);
  for (Index t = 0; t < T; ++t) F.row(t) = (cholesky_spd(P[t]) * rng.normal_vector(q)).transpose();
  return F;
}

MatrixXd simulate_returns(const MatrixXd& B, const MatrixXd& F, const MatrixXd& error_var, Rng& rng) {
  // error_var is T x p (per-period variances)
  MatrixXd Y = F * B.transpose();
  for (Index t = 0; t < Y.rows(); ++t)
    for (Index j = 0; j < Y.cols(); ++j) Y(t, j) += std::sqrt(error_var(t, j)) * rng.normal();
  return Y;
}

}  // namespace

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::ODCFMSV: return "odcfmsv";
    case ModelVariant::PG: return "pg";
    case ModelVariant::SVERR: return "sverr";
  }
  return "unknown";
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "odcfmsv" || name == "o" || name == "O-DCFMSV") return ModelVariant::ODCFMSV;
  if (name == "pg" || name == "PG") return ModelVariant::PG;
  if (name == "sverr" || name == "sv-err" || name == "SV-Err") return ModelVariant::SVERR;
  throw DomainError("unknown model variant '" + std::string(name) + "'");
}

void FactorDataset::validate() const {
  if (Y.rows() != F.rows()) throw DataError("returns and factors have different numbers of rows");
  if (T() < 2) throw DataError("need at least two observations");
  if (q() < 1 || q() > p()) throw DataError("need 1 <= q <= p");
  if (!Y.allFinite() || !F.allFinite()) throw DataError("data contain non-finite values");
}

FactorDataset FactorDataset::head(Index rows) const { return {Y.topRows(rows), F.topRows(rows)}; }

void SvParams::validate() const {
  if (phi.size() != mu.size() || sigma_eta_sq.size() != mu.size())
    throw DimensionError("SvParams: inconsistent lengths");
  for (Index i = 0; i < size(); ++i) {
    if (!(std::abs(phi(i)) < 1.0)) throw DomainError("SvParams: |phi| must be < 1");
    if (!(sigma_eta_sq(i) >= 0.0)) throw DomainError("SvParams: sigma_eta^2 must be >= 0");
  }
}

SvParams SvParams::constant(Index n, double mu, double phi, double sigma_eta_sq) {
  return {VectorXd::Constant(n, mu), VectorXd::Constant(n, phi), VectorXd::Constant(n, sigma_eta_sq)};
}

void CorrDynParams::validate() const {
  if (!(d > -1.0 && d < 1.0)) throw DomainError("CorrDynParams: d must lie in (-1, 1)");
  if (!(k > static_cast<double>(q()))) throw DomainError("CorrDynParams: k must exceed q");
}

MatrixXd CorrDynParams::scale(const MatrixXd& P) const {
  const MatrixXd m = spd_power(P, -0.5 * d);
  return symmetrize(m * A.matrix() * m / k);
}

void PriorConfig::validate() const {
  if (!(nu0 > 0 && s0 > 0 && mu_var >= 0 && sigma_eta_shape > 0 && sigma_eta_scale > 0 && phi_a > 0 &&
        phi_b > 0 && A_df >= 0 && A_scale >= 0 && lambda0 > 0 && c0 > 0))
    throw DomainError("PriorConfig: scale and rate hyperparameters must be positive");
}

double log_prior_phi(double phi, const PriorConfig& priors) {
  if (!(std::abs(phi) < 1.0)) return -std::numeric_limits<double>::infinity();
  return beta_logpdf(0.5 * (1.0 + phi), priors.phi_a, priors.phi_b) - std::numbers::ln2;
}

double log_prior_sigma_eta_sq(double s2, const PriorConfig& priors) {
  return inverse_gamma_logpdf(s2, priors.sigma_eta_shape, priors.sigma_eta_scale);
}

double log_prior_mu(double mu, const PriorConfig& priors) { return normal_logpdf(mu, priors.mu_mean, priors.mu_var); }

double log_prior_k(double k, Index q, const PriorConfig& priors) {
  if (!(k > static_cast<double>(q))) return -std::numeric_limits<double>::infinity();
  return std::log(priors.lambda0) - priors.lambda0 * (k - static_cast<double>(q));
}

std::vector<MatrixXd> correlation_path(const std::vector<MatrixXd>& P) {
  std::vector<MatrixXd> out;
  out.reserve(P.size());
  for (const auto& m : P) out.push_back(standardize_corr(m).matrix());
  return out;
}

MatrixXd standardized_factors(const MatrixXd& F, const MatrixXd& H) {
  return (F.array() * (-0.5 * H.array()).exp()).matrix();
}

std::vector<MatrixXd> simulate_wishart_process(const CorrDynParams& corr, Index T, Rng& rng) {
  corr.validate();
  const Index q = corr.q();
  std::vector<MatrixXd> P;
  P.reserve(static_cast<std::size_t>(T));
  MatrixXd prev = MatrixXd::Identity(q, q);
  const MatrixXd chol_a = cholesky_spd(corr.A.matrix());
  for (Index t = 0; t < T; ++t) {
    const MatrixXd factor = spd_power(prev, -0.5 * corr.d) * chol_a / std::sqrt(corr.k);
    const MatrixXd precision = sample_wishart_factor(corr.k, factor, rng);
    prev = symmetrize(precision.inverse());
    P.push_back(prev);
  }
  return P;
}

MatrixXd simulate_sv_paths(const SvParams& sv, Index T, Rng& rng) {
  sv.validate();
  MatrixXd H(T, sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    const double phi = sv.phi(i);
    const double mu = sv.mu(i);
    const double sd = std::sqrt(sv.sigma_eta_sq(i));
    H(0, i) = mu + sd / std::sqrt(1.0 - phi * phi) * rng.normal();
    for (Index t = 1; t < T; ++t) H(t, i) = mu + phi * (H(t - 1, i) - mu) + sd * rng.normal();
  }
  return H;
}

SimulatedData simulate_odcfmsv(const MeasurementParams& meas, const SvParams& sv, const CorrDynParams& corr,
                               Index T, Rng& rng) {
  if (T < 2) throw DomainError("simulate: T must be >= 2");
  SimulatedData out;
  out.variant = ModelVariant::ODCFMSV;
  out.params.meas = meas;
  out.params.factor_sv = sv;
  out.params.corr = corr;
  out.latents.H = simulate_sv_paths(sv, T, rng);
  out.latents.P = simulate_wishart_process(corr, T, rng);
  out.data = simulate_observations(out.params, out.latents, out.variant, rng);
  return out;
}

SimulatedData simulate_pg(const MeasurementParams& meas, const CorrDynParams& corr, Index T, Rng& rng) {
  if (T < 2) throw DomainError("simulate: T must be >= 2");
  SimulatedData out;
  out.variant = ModelVariant::PG;
  out.params.meas = meas;
  out.params.corr = corr;
  out.latents.P = simulate_wishart_process(corr, T, rng);
  out.data = simulate_observations(out.params, out.latents, out.variant, rng);
  return out;
}

SimulatedData simulate_sverr(const MatrixXd& B, const SvParams& error_sv, const SvParams& factor_sv,
                             const CorrDynParams& corr, Index T, Rng& rng) {
  if (T < 2) throw DomainError("simulate: T must be >= 2");
  SimulatedData out;
  out.variant = ModelVariant::SVERR;
  out.params.meas.B = B;
  out.params.factor_sv = factor_sv;
  out.params.error_sv = error_sv;
  out.params.corr = corr;
  out.latents.H = simulate_sv_paths(factor_sv, T, rng);
  out.latents.He = simulate_sv_paths(error_sv, T, rng);
  out.latents.P = simulate_wishart_process(corr, T, rng);
  out.data = simulate_observations(out.params, out.latents, out.variant, rng);
  return out;
}

FactorDataset simulate_observations(const ModelParams& params, const LatentState& latents, ModelVariant variant,
                                    Rng& rng) {
  const Index T = static_cast<Index>(latents.P.size());
  const Index p = params.meas.B.rows();
  FactorDataset out;
  out.F = variant == ModelVariant::PG ? simulate_factors_pg(latents.P, rng)
                                      : simulate_factors_sv(latents.H, latents.P, rng);
  MatrixXd error_var;
  if (variant == ModelVariant::SVERR)
    error_var = latents.He.array().exp().matrix();
  else
    error_var = params.meas.omega.transpose().replicate(T, 1);
  out.Y = simulate_returns(params.meas.B, out.F, error_var, rng);
  (void)p;
  return out;
}

ModelParams sample_prior(const PriorConfig& priors, Index p, Index q, ModelVariant variant, Rng& rng) {
  if (q < 1 || p < q) throw DomainError("sample_prior: need 1 <= q <= p");
  ModelParams out;
  auto& meas = out.meas;
  meas.B.resize(p, q);
  if (variant == ModelVariant::SVERR) {
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < q; ++i) meas.B(j, i) = priors.c0 * rng.normal();
    out.error_sv = sample_sv_prior(p, priors, rng);
  } else {
    meas.omega.resize(p);
    for (Index j = 0; j < p; ++j) meas.omega(j) = rng.inverse_gamma(priors.nu0 / 2.0, priors.nu0 * priors.s0 / 2.0);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < q; ++i) meas.B(j, i) = std::sqrt(meas.omega(j)) * rng.normal();
  }
  if (variant != ModelVariant::PG) out.factor_sv = sample_sv_prior(q, priors, rng);
  const MatrixXd a_inv = sample_wishart(priors.a_df(q), MatrixXd::Identity(q, q) * priors.a_scale(q), rng);
  out.corr.A = SpdMatrix<double>(symmetrize(a_inv.inverse()));
  out.corr.d = 2.0 * rng.uniform() - 1.0;
  out.corr.k = static_cast<double>(q) - std::log(rng.uniform()) / priors.lambda0;
  return out;
}

ModelParams reference_simulation_params() {
  ModelParams out;
  MatrixXd B(10, 2);
  B.col(0) << 1.00, 0.30, -0.05, 0.99, 0.99, -0.10, 0.00, 0.56, 0.00, 0.00;
  B.col(1) << 0.00, 1.00, 0.34, 0.00, 0.00, 0.95, 0.95, 0.00, 0.00, 0.30;
  out.meas.B = B;
  out.meas.omega.resize(10);
  out.meas.omega << 0.05, 0.1, 0.13, 0.24, 0.35, 0.35, 0.24, 0.13, 0.1, 0.05;
  out.factor_sv.mu = Eigen::Vector2d(-0.2, -0.5);
  out.factor_sv.phi = Eigen::Vector2d(0.95, 0.98);
  out.factor_sv.sigma_eta_sq = Eigen::Vector2d(0.1 * 0.1, 0.27 * 0.27);
  Eigen::Matrix2d a_inv;
  a_inv << 1.0, 0.05, 0.05, 1.0;
  out.corr.A = SpdMatrix<double>(symmetrize(MatrixXd(a_inv.inverse())));
  out.corr.k = 25.0;
  out.corr.d = 0.8;
  return out;
}

MatrixXd return_covariance(const ModelParams& params, const LatentState& latents, Index t, ModelVariant variant) {
  const MatrixXd& B = params.meas.B;
  MatrixXd factor_cov;
  if (variant == ModelVariant::PG) {
    factor_cov = latents.P[static_cast<std::size_t>(t)];
  } else {
    const VectorXd sd = (0.5 * latents.H.row(t).transpose().array()).exp();
    factor_cov = sd.asDiagonal() * standardize_corr(latents.P[static_cast<std::size_t>(t)]).matrix() * sd.asDiagonal();
  }
  MatrixXd out = B * factor_cov * B.transpose();
  if (variant == ModelVariant::SVERR)
    out.diagonal() += latents.He.row(t).transpose().array().exp().matrix();
  else
    out.diagonal() += params.meas.omega;
  return symmetrize(out);
}

double LogJointTerms::total() const {
  return measurement + factors + factor_sv + error_sv + corr_transition + prior_B + prior_omega + prior_sv +
         prior_A + prior_d + prior_k;
}

LogJointTerms log_joint_terms(const FactorDataset& data, const ModelParams& params, const LatentState& latents,
                              const PriorConfig& priors, ModelVariant variant) {
  const Index T = data.T();
  const Index p = data.p();
  const Index q = data.q();
  const MatrixXd& B = params.meas.B;
  if (B.rows() != p || B.cols() != q) throw DimensionError("log_joint: B has wrong shape");
  if (static_cast<Index>(latents.P.size()) != T) throw DimensionError("log_joint: P path length differs from T");
  const bool sv_factors = variant != ModelVariant::PG;
  const bool sv_errors = variant == ModelVariant::SVERR;
  if (sv_factors && (latents.H.rows() != T || latents.H.cols() != q))
    throw DimensionError("log_joint: H has wrong shape");
  if (sv_errors && (latents.He.rows() != T || latents.He.cols() != p))
    throw DimensionError("log_joint: error log-volatilities have wrong shape");
  if (!sv_errors && params.meas.omega.size() != p) throw DimensionError("log_joint: Omega has wrong length");

  LogJointTerms terms;
  const MatrixXd resid = data.Y - data.F * B.transpose();
  for (Index t = 0; t < T; ++t)
    for (Index j = 0; j < p; ++j) {
      const double var = sv_errors ? std::exp(latents.He(t, j)) : params.meas.omega(j);
      terms.measurement += normal_logpdf(resid(t, j), 0.0, var);
    }
  check_finite(terms.measurement, "measurement");

  for (Index t = 0; t < T; ++t) {
    const auto& Pt = latents.P[static_cast<std::size_t>(t)];
    if (sv_factors) {
      const VectorXd eps = (data.F.row(t).array() * (-0.5 * latents.H.row(t).array()).exp()).transpose();
      terms.factors += mvn_logpdf(eps, standardize_corr(Pt).matrix()) - 0.5 * latents.H.row(t).sum();
    } else {
      terms.factors += mvn_logpdf(data.F.row(t).transpose(), Pt);
    }
  }
  check_finite(terms.factors, "factors");

  if (sv_factors) {
    for (Index i = 0; i < q; ++i)
      terms.factor_sv += sv_path_logpdf(latents.H.col(i), params.factor_sv.mu(i), params.factor_sv.phi(i),
                                        params.factor_sv.sigma_eta_sq(i));
    terms.prior_sv += sv_prior_logpdf(params.factor_sv, priors);
  }
  check_finite(terms.factor_sv, "factor log-volatility");
  if (sv_errors) {
    for (Index j = 0; j < p; ++j)
      terms.error_sv += sv_path_logpdf(latents.He.col(j), params.error_sv.mu(j), params.error_sv.phi(j),
                                       params.error_sv.sigma_eta_sq(j));
    terms.prior_sv += sv_prior_logpdf(params.error_sv, priors);
  }
  check_finite(terms.error_sv, "error log-volatility");
  check_finite(terms.prior_sv, "SV priors");

  const auto& corr = params.corr;
  MatrixXd prev = MatrixXd::Identity(q, q);
  for (Index t = 0; t < T; ++t) {
    const auto& Pt = latents.P[static_cast<std::size_t>(t)];
    terms.corr_transition += wishart_logpdf(MatrixXd(symmetrize(Pt.inverse())), corr.k, corr.scale(prev));
    prev = Pt;
  }
  check_finite(terms.corr_transition, "P transition");

  if (sv_errors) {
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < q; ++i) terms.prior_B += normal_logpdf(B(j, i), 0.0, priors.c0 * priors.c0);
  } else {
    for (Index j = 0; j < p; ++j) {
      for (Index i = 0; i < q; ++i) terms.prior_B += normal_logpdf(B(j, i), 0.0, params.meas.omega(j));
      terms.prior_omega += inverse_gamma_logpdf(params.meas.omega(j), priors.nu0 / 2.0, priors.nu0 * priors.s0 / 2.0);
    }
  }
  check_finite(terms.prior_B, "B prior");
  check_finite(terms.prior_omega, "Omega prior");

  terms.prior_A = wishart_logpdf(MatrixXd(symmetrize(corr.A.matrix().inverse())), priors.a_df(q),
                                 MatrixXd(MatrixXd::Identity(q, q) * priors.a_scale(q)));
  terms.prior_d = std::abs(corr.d) < 1.0 ? -std::numbers::ln2 : -std::numeric_limits<double>::infinity();
  terms.prior_k = log_prior_k(corr.k, q, priors);
  check_finite(terms.prior_A, "A prior");
  check_finite(terms.prior_d, "d prior");
  check_finite(terms.prior_k, "k prior");
  return terms;
}

double log_joint(const FactorDataset& data, const ModelParams& params, const LatentState& latents,
                 const PriorConfig& priors, ModelVariant variant) {
  return log_joint_terms(data, params, latents, priors, variant).total();
}

std::vector<NamedValue> flatten_parameters(const ModelParams& params, ModelVariant variant) {
  std::vector<NamedValue> out;
  const auto idx = [](Index i) { return std::to_string(i + 1); };
  const MatrixXd& B = params.meas.B;
  for (Index i = 0; i < B.cols(); ++i)
    for (Index j = 0; j < B.rows(); ++j) out.push_back({"B", "B_" + idx(j) + "_" + idx(i), B(j, i)});
  if (variant != ModelVariant::SVERR) {
    for (Index j = 0; j < params.meas.omega.size(); ++j)
      out.push_back({"sigma2", "sigma2_" + idx(j), params.meas.omega(j)});
  } else {
    const auto& e = params.error_sv;
    for (Index j = 0; j < e.size(); ++j) out.push_back({"mu_e", "mu_e_" + idx(j), e.mu(j)});
    for (Index j = 0; j < e.size(); ++j) out.push_back({"phi_e", "phi_e_" + idx(j), e.phi(j)});
    for (Index j = 0; j < e.size(); ++j)
      out.push_back({"sigma_eta_e", "sigma_eta_e_" + idx(j), std::sqrt(e.sigma_eta_sq(j))});
  }
  if (variant != ModelVariant::PG) {
    const auto& f = params.factor_sv;
    for (Index i = 0; i < f.size(); ++i) out.push_back({"mu", "mu_" + idx(i), f.mu(i)});
    for (Index i = 0; i < f.size(); ++i) out.push_back({"phi", "phi_" + idx(i), f.phi(i)});
    for (Index i = 0; i < f.size(); ++i)
      out.push_back({"sigma_eta", "sigma_eta_" + idx(i), std::sqrt(f.sigma_eta_sq(i))});
  }
  const MatrixXd& A = params.corr.A.matrix();
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = i; j < A.cols(); ++j) out.push_back({"A", "a_" + idx(i) + "_" + idx(j), A(i, j)});
  out.push_back({"d", "d", params.corr.d});
  out.push_back({"k", "k", params.corr.k});
  return out;
}

}  // namespace odcf
