#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "odcfmsv/matrixdist.hpp"
#include "odcfmsv/rng.hpp"

namespace odcf {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ModelVariant { ODCFMSV, PG, SVERR };

std::string_view to_string(ModelVariant v);
ModelVariant parse_variant(std::string_view name);

/// Observed returns Y (T x p) and factors F (T x q), decimal-fraction units.
struct FactorDataset {
  MatrixXd Y;
  MatrixXd F;

  Index T() const { return Y.rows(); }
  Index p() const { return Y.cols(); }
  Index q() const { return F.cols(); }

  /// Throws DataError unless T >= 2, 1 <= q <= p and every entry is finite.
  void validate() const;
  /// First `rows` observations.
  FactorDataset head(Index rows) const;
};

struct MeasurementParams {
  MatrixXd B;      // p x q loadings
  VectorXd omega;  // idiosyncratic variances sigma_j^2
};

/// AR(1) log-volatility parameters, one entry per series.
struct SvParams {
  VectorXd mu;
  VectorXd phi;
  VectorXd sigma_eta_sq;

  Index size() const { return mu.size(); }
  void validate() const;
  static SvParams constant(Index n, double mu, double phi, double sigma_eta_sq);
};

struct CorrDynParams {
  SpdMatrix<double> A;
  double d = 0.5;
  double k = 12.0;

  Index q() const { return A.dim(); }
  void validate() const;
  /// S = (1/k) P^{-d/2} A P^{-d/2}.
  MatrixXd scale(const MatrixXd& P) const;
};

/// Hyperparameters. Defaults are the values used throughout the reference analyses.
struct PriorConfig {
  double nu0 = 10.0;          // sigma_j^2 ~ IG(nu0/2, nu0*s0/2)
  double s0 = 0.01;
  double mu_mean = 0.0;       // mu_i ~ N(mu_mean, mu_var)
  double mu_var = 10.0;
  double sigma_eta_shape = 5.0;  // sigma_eta^2 ~ IG(shape, scale)
  double sigma_eta_scale = 0.05;
  double phi_a = 20.0;        // (1 + phi)/2 ~ Beta(phi_a, phi_b)
  double phi_b = 1.5;
  double A_df = 0.0;          // A^{-1} ~ W_q(A_df, A_scale * I); 0 means q
  double A_scale = 0.0;       // 0 means 1/q
  double lambda0 = 0.02;      // k - q ~ Exp(lambda0)
  double c0 = 5.0;            // b_j ~ N(0, c0^2 I) in the SV-on-errors model

  void validate() const;
  double a_df(Index q) const { return A_df > 0.0 ? A_df : static_cast<double>(q); }
  double a_scale(Index q) const { return A_scale > 0.0 ? A_scale : 1.0 / static_cast<double>(q); }
};

/// All static parameters of any variant. Unused blocks stay empty.
struct ModelParams {
  MeasurementParams meas;  // omega unused for SVERR
  SvParams factor_sv;      // unused for PG
  SvParams error_sv;       // SVERR only
  CorrDynParams corr;
};

/// Latent paths. P[t] is P_{t+1} in one-based notation; P_0 = I is implicit.
struct LatentState {
  MatrixXd H;               // T x q factor log-volatilities
  std::vector<MatrixXd> P;  // T matrices q x q
  MatrixXd He;              // T x p error log-volatilities (SVERR)
};

struct SimulatedData {
  FactorDataset data;
  LatentState latents;
  ModelParams params;
  ModelVariant variant;
};

/// Correlation path Sigma_eps,t = standardize_corr(P_t).
std::vector<MatrixXd> correlation_path(const std::vector<MatrixXd>& P);

/// Standardized factors eps_t = V_t^{-1/2} f_t as a T x q matrix.
MatrixXd standardized_factors(const MatrixXd& F, const MatrixXd& H);

/// P_1..P_T from the inverse Wishart process started at P_0 = I.
std::vector<MatrixXd> simulate_wishart_process(const CorrDynParams& corr, Index T, Rng& rng);

/// h_1 from the stationary law, then the AR(1) recursion.
MatrixXd simulate_sv_paths(const SvParams& sv, Index T, Rng& rng);

SimulatedData simulate_odcfmsv(const MeasurementParams& meas, const SvParams& sv, const CorrDynParams& corr,
                               Index T, Rng& rng);
SimulatedData simulate_pg(const MeasurementParams& meas, const CorrDynParams& corr, Index T, Rng& rng);
SimulatedData simulate_sverr(const MatrixXd& B, const SvParams& error_sv, const SvParams& factor_sv,
                             const CorrDynParams& corr, Index T, Rng& rng);

/// Regenerates (F, Y) given parameters and latent paths; used by joint-distribution tests.
FactorDataset simulate_observations(const ModelParams& params, const LatentState& latents, ModelVariant variant,
                                    Rng& rng);

/// Draws every static parameter from its prior.
ModelParams sample_prior(const PriorConfig& priors, Index p, Index q, ModelVariant variant, Rng& rng);

/// Parameters of the p = 10, q = 2 simulation design.
ModelParams reference_simulation_params();

/// Model-implied return covariance at one time point.
MatrixXd return_covariance(const ModelParams& params, const LatentState& latents, Index t, ModelVariant variant);

/// Log density terms of the joint distribution. The P-transition term is the
/// Wishart density of the precision P_t^{-1}; the factor term is the density of
/// f_t given (h_t, P_t), which combines the degenerate f | (h, eps) factor with
/// eps_t ~ N(0, Sigma_eps,t).
struct LogJointTerms {
  double measurement = 0.0;     // y_t | B, f_t, Omega (or Lambda_t)
  double factors = 0.0;         // f_t | h_t, P_t
  double factor_sv = 0.0;       // H | SV parameters
  double error_sv = 0.0;        // error log-volatility paths (SVERR)
  double corr_transition = 0.0; // P_t | P_{t-1}, A, d, k
  double prior_B = 0.0;
  double prior_omega = 0.0;
  double prior_sv = 0.0;
  double prior_A = 0.0;
  double prior_d = 0.0;
  double prior_k = 0.0;

  double total() const;
};

LogJointTerms log_joint_terms(const FactorDataset& data, const ModelParams& params, const LatentState& latents,
                              const PriorConfig& priors, ModelVariant variant);
double log_joint(const FactorDataset& data, const ModelParams& params, const LatentState& latents,
                 const PriorConfig& priors, ModelVariant variant);

// Log prior densities shared by the samplers and log_joint.
double log_prior_phi(double phi, const PriorConfig& priors);
double log_prior_sigma_eta_sq(double s2, const PriorConfig& priors);
double log_prior_mu(double mu, const PriorConfig& priors);
double log_prior_k(double k, Index q, const PriorConfig& priors);

/// Named scalar used by summaries, truth files and joint-distribution tests.
struct NamedValue {
  std::string group;
  std::string name;
  double value;
};

/// Flattens the static parameters in the order used by summary tables.
/// SV volatilities are reported as sigma_eta (standard deviation).
std::vector<NamedValue> flatten_parameters(const ModelParams& params, ModelVariant variant);

}  // namespace odcf
