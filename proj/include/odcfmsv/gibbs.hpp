#pragma once

// Full MCMC sweeps for the three model variants, kept-draw storage, pathwise
// posterior means and posterior summaries.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "odcfmsv/arms.hpp"
#include "odcfmsv/model.hpp"
#include "odcfmsv/svsampler.hpp"
#include "odcfmsv/wishartsampler.hpp"

namespace odcf {

struct McmcConfig {
  long burn_in = 10000;
  long kept = 10000;
  long thin = 1;
  std::uint64_t seed = 1;
  ModelVariant variant = ModelVariant::ODCFMSV;
  double offset = kDefaultOffset;
  bool adapt = true;          // RW proposal adaptation, burn-in only
  bool track_log_joint = true;
  bool noncentered_d = true;  // extra d move with the Wishart innovations held fixed
  VectorXd portfolio_weights;  // weights of the smoothed portfolio sd path; empty means 1/p each

  void validate() const;
  long stored() const { return kept / thin; }
};

/// Conjugate measurement updates (exposed for testing).
/// Row j of B given Omega is N(mean.row(j), omega_j sigma_b) under the N(0, omega_j I) prior.
struct BConditional {
  MatrixXd mean;
  MatrixXd sigma_b;
};
BConditional b_conditional(const MatrixXd& Y, const MatrixXd& F);

MatrixXd sample_B(const MatrixXd& Y, const MatrixXd& F, const VectorXd& omega, Rng& rng);
/// sigma_j^2 ~ IG((nu0 + T)/2, (nu0 s0 + sum_t resid_tj^2)/2) given B.
VectorXd sample_sigma_sq(const MatrixXd& Y, const MatrixXd& F, const MatrixXd& B, const PriorConfig& priors,
                         Rng& rng);
/// sigma_j^2 with B integrated out under B_{j.} ~ N(0, sigma_j^2 I):
/// IG((nu0 + T)/2, (nu0 s0 + y_j^T (I + F F^T)^{-1} y_j)/2).
struct InvGammaParams {
  double shape;
  VectorXd scale;
};
InvGammaParams sigma_sq_conditional(const MatrixXd& Y, const MatrixXd& F, const PriorConfig& priors);

VectorXd sample_sigma_sq_collapsed(const MatrixXd& Y, const MatrixXd& F, const PriorConfig& priors, Rng& rng);
/// Quadratic forms y_j^T (I + F F^T)^{-1} y_j for every column of Y.
VectorXd collapsed_residual_ss(const MatrixXd& Y, const MatrixXd& F);
/// Loadings of one series under heteroskedastic errors with variances `lambda`.
VectorXd sample_bj_sverr(const VectorXd& y, const MatrixXd& F, const VectorXd& lambda, double c0, Rng& rng);
/// Mean and covariance of the b_j conditional.
std::pair<VectorXd, MatrixXd> bj_conditional(const VectorXd& y, const MatrixXd& F, const VectorXd& lambda, double c0);

/// Everything the sampler carries from sweep to sweep.
struct ChainState {
  ModelParams params;
  LatentState latents;
  std::vector<SvBlockState> factor_blocks;
  std::vector<SvBlockState> error_blocks;
  DMoveState d_move;
};

/// Latent values at the last time point, enough to forecast one step.
struct LatentTail {
  VectorXd h;   // factor log-volatilities (empty for PG)
  MatrixXd P;
  VectorXd he;  // error log-volatilities (SVERR)
};

struct DrawRecord {
  ModelParams params;
  LatentTail tail;
  double log_joint = 0.0;
};

struct SamplerDiagnostics {
  PtStats pt;
  long arms_d_evaluations = 0;
  long arms_k_evaluations = 0;
  long arms_d_moves = 0;
  long arms_k_moves = 0;
  long arms_calls = 0;
  long d_move_proposed = 0;
  long d_move_accepted = 0;
};

struct ChainDraws {
  ModelVariant variant = ModelVariant::ODCFMSV;
  std::vector<DrawRecord> draws;
  // Running sums over stored draws.
  std::vector<MatrixXd> corr_sum;        // standardized P_t
  std::vector<MatrixXd> return_cov_sum;  // model return covariance at t
  MatrixXd h_sum;
  MatrixXd he_sum;
  VectorXd portfolio_weights;
  VectorXd portfolio_sd_sum;  // sqrt(w' Sigma_t w) of the model return covariance
  SamplerDiagnostics diagnostics;

  long count() const { return static_cast<long>(draws.size()); }
  std::vector<MatrixXd> corr_mean() const;
  std::vector<MatrixXd> return_cov_mean() const;
  VectorXd portfolio_sd_mean() const;
};

/// Step 0 starting values.
ChainState initial_state(const FactorDataset& data, const PriorConfig& priors, ModelVariant variant);
/// Starting state assembled from known parameters and latents (used by joint-distribution tests).
ChainState state_from(const ModelParams& params, const LatentState& latents, ModelVariant variant, Index T);

class GibbsSampler {
 public:
  GibbsSampler(FactorDataset data, PriorConfig priors, McmcConfig config);
  GibbsSampler(FactorDataset data, PriorConfig priors, McmcConfig config, ChainState start);

  /// One complete sweep; `adapt` enables RW adaptation.
  void sweep(bool adapt);
  /// Runs sweeps until `total_sweeps()` have been done. `on_sweep` is invoked
  /// after every sweep with the sweep count; returning false stops early.
  void run(const std::function<bool(long)>& on_sweep = {});

  long sweeps_done() const { return sweeps_done_; }
  long total_sweeps() const { return config_.burn_in + config_.kept; }

  const ChainState& state() const { return state_; }
  ChainState& mutable_state() { return state_; }
  const ChainDraws& draws() const { return draws_; }
  ChainDraws& mutable_draws() { return draws_; }
  const FactorDataset& data() const { return data_; }
  void set_data(FactorDataset data);
  const McmcConfig& config() const { return config_; }
  const PriorConfig& priors() const { return priors_; }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }
  void set_sweeps_done(long n) { sweeps_done_ = n; }

  /// Records the current state as a kept draw.
  void store_draw();

 private:
  void step_measurement();
  void step_factor_sv(bool adapt);
  void step_correlation();
  void step_A();
  void step_d_noncentered(bool adapt);
  void step_d_k();
  void sync_params();

  FactorDataset data_;
  PriorConfig priors_;
  McmcConfig config_;
  ChainState state_;
  ChainDraws draws_;
  Rng rng_;
  long sweeps_done_ = 0;
  bool adapting_ = false;
};

ChainDraws run_chain(const FactorDataset& data, const PriorConfig& priors, const McmcConfig& config);

struct ParamSummary {
  std::string group;
  std::string name;
  double mean;
  double lower;
  double upper;
};

struct PosteriorSummary {
  std::vector<ParamSummary> params;
  std::vector<MatrixXd> corr_mean;
  std::vector<MatrixXd> return_cov_mean;
};

/// Linear interpolation between order statistics: position (n - 1) prob.
double percentile(std::vector<double> values, double prob);

PosteriorSummary summarize(const ChainDraws& draws);

}  // namespace odcf
