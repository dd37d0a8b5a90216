#include "geweke.hpp"

#include <cmath>

#include "odcfmsv/predict.hpp"

namespace odcf::testing {

double GewekeResult::max_abs_z() const {
  double m = 0.0;
  for (const auto& p : params) m = std::max(m, std::abs(p.z()));
  return m;
}

PriorConfig geweke_priors() {
  PriorConfig pr;
  pr.A_df = 10.0;
  pr.lambda0 = 0.02;
  return pr;
}

namespace {

struct PriorDraw {
  ModelParams params;
  LatentState latents;
  FactorDataset data;
};

PriorDraw draw_joint(const GewekeConfig& c, Rng& rng, long& redraws) {
  for (;;) {
    PriorDraw d;
    try {
      d.params = sample_prior(c.priors, c.p, c.q, c.variant, rng);
      d.latents.P = simulate_wishart_process(d.params.corr, c.T, rng);
      if (c.variant != ModelVariant::PG) d.latents.H = simulate_sv_paths(d.params.factor_sv, c.T, rng);
      if (c.variant == ModelVariant::SVERR) d.latents.He = simulate_sv_paths(d.params.error_sv, c.T, rng);
      d.data = simulate_observations(d.params, d.latents, c.variant, rng);
    } catch (const Error&) {
      ++redraws;
      continue;
    }
    if (d.data.F.cwiseAbs().maxCoeff() > c.max_abs_data || d.data.Y.cwiseAbs().maxCoeff() > c.max_abs_data) {
      ++redraws;
      continue;
    }
    return d;
  }
}

}  // namespace

GewekeResult run_geweke(const GewekeConfig& c) {
  GewekeResult out;
  std::vector<double> s0, s1, s2;
  long n = 0;
  for (long r = 0; r < c.replications; ++r) {
    Rng rng(derive_seed(c.seed, static_cast<std::uint64_t>(c.variant) + 1, static_cast<std::uint64_t>(r)), 0);
    const PriorDraw d = draw_joint(c, rng, out.redraws);
    const auto start = flatten_parameters(d.params, c.variant);
    if (out.params.empty()) {
      for (const auto& v : start) out.params.push_back({v.name});
      s0.assign(start.size(), 0.0);
      s1.assign(start.size(), 0.0);
      s2.assign(start.size(), 0.0);
    }
    McmcConfig mc;
    mc.variant = c.variant;
    mc.burn_in = 0;
    mc.kept = 1;
    mc.seed = derive_seed(c.seed, 0x6765ULL, static_cast<std::uint64_t>(r));
    mc.track_log_joint = false;
    mc.noncentered_d = c.noncentered_d;
    try {
      GibbsSampler g(d.data, c.priors, mc, state_from(d.params, d.latents, c.variant, c.T));
      for (int it = 0; it < c.sweeps; ++it) g.sweep(false);
      const auto end = flatten_parameters(g.state().params, c.variant);
      for (std::size_t j = 0; j < start.size(); ++j) {
        const double diff = end[j].value - start[j].value;
        s0[j] += start[j].value;
        s1[j] += diff;
        s2[j] += diff * diff;
      }
      ++n;
    } catch (const Error&) {
      ++out.failures;
    }
  }
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < out.params.size() && n > 1; ++j) {
    auto& p = out.params[j];
    p.start_mean = s0[j] / nn;
    p.diff_mean = s1[j] / nn;
    const double var = (s2[j] - nn * p.diff_mean * p.diff_mean) / (nn - 1.0);
    p.diff_se = std::sqrt(std::max(var, 0.0) / nn);
  }
  return out;
}

}  // namespace odcf::testing
