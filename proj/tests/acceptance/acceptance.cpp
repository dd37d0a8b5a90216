// Acceptance runner: `acceptance --criterion N [--workdir DIR]` prints one
// PASS/FAIL line for criterion N (detail lines are indented) and exits 0 on PASS.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "geweke.hpp"
#include "odcfmsv/arms.hpp"
#include "odcfmsv/evaluate.hpp"
#include "odcfmsv/io.hpp"
#include "odcfmsv/predict.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace odcf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

int run_cli_binary(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ODCFMSV_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

int report(int n, const Verdict& v, const std::string& summary) {
  for (const auto& d : v.details) std::cout << "  " << d << '\n';
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << summary << std::endl;
  return v.pass ? 0 : 1;
}

// ---------------------------------------------------------------- 1 and 2

struct SimulationFit {
  fs::path sim, fit;
  double seconds = -1.0;
};

constexpr const char* kFitArgs = "--burn-in 4000 --kept 6000 --seed 7";

SimulationFit simulation_fit(const fs::path& work, bool force) {
  SimulationFit out{work / "c1" / "sim", work / "c1" / "fit"};
  if (!force && fs::exists(out.fit / "fit_report.txt") && fs::exists(out.fit / "elapsed.txt")) {
    out.seconds = std::stod(read_text((out.fit / "elapsed.txt").string()));
    return out;
  }
  fs::remove_all(work / "c1");
  fs::create_directories(out.fit);
  const auto t0 = Clock::now();
  if (run_cli_binary("simulate --preset paper-3.1 --seed 7 --out " + out.sim.string(), work / "c1" / "simulate.log"))
    throw std::runtime_error("simulate failed; see " + (work / "c1" / "simulate.log").string());
  if (run_cli_binary("fit --returns " + (out.sim / "Y.csv").string() + " --factors " + (out.sim / "F.csv").string() +
                         " --truth " + (out.sim / "truth.json").string() + " " + kFitArgs + " --out " +
                         out.fit.string(),
                     work / "c1" / "fit.log"))
    throw std::runtime_error("fit failed; see " + (work / "c1" / "fit.log").string());
  out.seconds = seconds_since(t0);
  write_text((out.fit / "elapsed.txt").string(), std::to_string(out.seconds) + "\n");
  return out;
}

std::map<std::string, std::string> report_values(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_text(path.string()));
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(": ");
    if (pos != std::string::npos) out[line.substr(0, pos)] = line.substr(pos + 2);
  }
  return out;
}

int criterion1(const fs::path& work) {
  const SimulationFit f = simulation_fit(work, true);
  // summary.csv: parameter,name,true,mean,lower,upper
  std::istringstream in(read_text((f.fit / "summary.csv").string()));
  std::string line;
  std::getline(in, line);
  long covered = 0, total = 0;
  double d_mean = NAN, k_mean = NAN;
  std::vector<std::string> missed;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    const double truth = std::stod(cells[2]), mean = std::stod(cells[3]), lo = std::stod(cells[4]),
                 hi = std::stod(cells[5]);
    ++total;
    if (truth >= lo && truth <= hi) ++covered;
    else missed.push_back(cells[1] + " (true " + cells[2] + ", CI [" + cells[4] + ", " + cells[5] + "])");
    if (cells[1] == "d") d_mean = mean;
    if (cells[1] == "k") k_mean = mean;
  }
  Verdict v;
  v.check(total == 41, "parameter count " + std::to_string(total) + " == 41");
  v.check(covered >= 37, "covered " + std::to_string(covered) + "/41 >= 37");
  for (const auto& m : missed) v.details.push_back("     missed " + m);
  v.check(d_mean > 0.55 && d_mean < 0.90, "d posterior mean " + fmt(d_mean) + " in (0.55, 0.90)");
  v.check(k_mean > 10.0 && k_mean < 36.0, "k posterior mean " + fmt(k_mean) + " in (10, 36)");
  v.check(f.seconds < 1200.0, "simulate + fit took " + fmt(f.seconds) + " s < 1200 s");
  return report(1, v, "simulation study, L=4000 M=6000: " + std::to_string(covered) + "/41 covered, d=" +
                          fmt(d_mean) + ", k=" + fmt(k_mean));
}

int criterion2(const fs::path& work) {
  const SimulationFit f = simulation_fit(work, false);
  const auto vals = report_values(f.fit / "fit_report.txt");
  const double mae_rho = std::stod(vals.at("mae_rho")), mae_var = std::stod(vals.at("mae_var"));
  Verdict v;
  v.check(mae_rho <= 0.30, "MAE_rho " + fmt(mae_rho) + " <= 0.30");
  v.check(mae_var <= 0.16, "MAE_VaR " + fmt(mae_var) + " <= 0.16");
  return report(2, v, "smoothing accuracy: MAE_rho=" + fmt(mae_rho) + ", MAE_VaR=" + fmt(mae_var));
}

// ---------------------------------------------------------------- 3

int criterion3(const fs::path&) {
  DeltaMklConfig c;
  c.T = 300;
  c.replications = 10;
  c.mcmc.burn_in = 1000;
  c.mcmc.kept = 2000;
  c.mcmc.track_log_joint = false;
  c.seed = 2718;
  c.threads = threads();
  Verdict v;
  std::string summary;
  const auto t0 = Clock::now();
  for (ModelVariant dgp : {ModelVariant::ODCFMSV, ModelVariant::PG}) {
    const DeltaMklResult r = delta_mkl_experiment(dgp, c);
    for (const auto& rep : r.replications)
      v.details.push_back("     " + std::string(to_string(dgp)) + " rep " + std::to_string(rep.index + 1) + ": " +
                          (rep.failure ? "failed: " + *rep.failure : "delta " + fmt(rep.delta)));
    v.check(r.failures == 0, std::string(to_string(dgp)) + " DGP: " + std::to_string(r.failures) + " failed reps");
    v.check(r.mean > 0.0, std::string(to_string(dgp)) + " DGP: mean delta MKL " + fmt(r.mean) + " (se " +
                              fmt(r.std_error) + ") > 0");
    summary += std::string(to_string(dgp)) + " " + fmt(r.mean) + "; ";
  }
  const double secs = seconds_since(t0);
  v.check(secs < 3600.0, "runtime " + fmt(secs) + " s < 3600 s");
  return report(3, v, "delta MKL " + summary + "T=300, 10 reps, chains 1000+2000");
}

// ---------------------------------------------------------------- 4

int criterion4(const fs::path&) {
  Rng rng(derive_seed(4004, 1));
  const ModelParams p = reference_simulation_params();
  const SimulatedData sim = simulate_odcfmsv(p.meas, p.factor_sv, p.corr, 1000, rng);
  BacktestConfig bc;
  bc.periods = 6;
  bc.first_target = 1000 - 6;
  bc.mcmc.burn_in = 1000;
  bc.mcmc.kept = 2000;
  bc.mcmc.seed = 4004;
  bc.threads = threads();
  const auto t0 = Clock::now();
  const ModelBacktest m1 = rolling_backtest(sim.data, ModelVariant::ODCFMSV, bc);
  const ModelBacktest m0 = rolling_backtest(sim.data, ModelVariant::PG, bc);
  const auto l1 = m1.lps_series(), l0 = m0.lps_series();
  const double bf = cum_log_bayes_factor(l1, l0);
  const double reverse = cum_log_bayes_factor(l0, l1);
  double sum = 0.0;
  Verdict v;
  for (std::size_t t = 0; t < l1.size(); ++t) {
    sum += l1[t] - l0[t];
    v.details.push_back("     period " + std::to_string(t + 1) + ": lps odcfmsv " + fmt(l1[t], 8) + ", pg " +
                        fmt(l0[t], 8) + ", diff " + fmt(l1[t] - l0[t]));
  }
  v.check(bf > 0.0, "cumulative log BF (odcfmsv vs pg) " + fmt(bf) + " > 0 [" +
                        std::string(to_string(evidence_label(bf))) + "]");
  v.check(std::abs(sum - bf) <= 1e-12, "additivity |sum diffs - cumulative| = " + fmt(std::abs(sum - bf)) +
                                           " <= 1e-12");
  v.check(std::abs(bf + reverse) <= 1e-12, "antisymmetry |BF10 + BF01| = " + fmt(std::abs(bf + reverse)) +
                                               " <= 1e-12");
  v.details.push_back("     runtime " + fmt(seconds_since(t0)) + " s");
  return report(4, v, "6-period backtest on O-DGP data: cumulative log BF = " + fmt(bf));
}

// ---------------------------------------------------------------- 5

double inverse_gamma_logpdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

void geweke_checks(Verdict& v) {
  for (ModelVariant variant : {ModelVariant::ODCFMSV, ModelVariant::PG, ModelVariant::SVERR}) {
    testing::GewekeConfig g;
    g.variant = variant;
    g.replications = 2000;
    g.sweeps = 20;
    g.priors = testing::geweke_priors();
    g.seed = 31337;
    const auto t0 = Clock::now();
    const auto r = testing::run_geweke(g);
    std::string worst;
    double worst_z = 0.0;
    for (const auto& p : r.params)
      if (std::abs(p.z()) > std::abs(worst_z)) {
        worst_z = p.z();
        worst = p.name;
      }
    for (const auto& p : r.params)
      if (std::abs(p.z()) > 2.0) v.details.push_back("     " + std::string(to_string(variant)) + " " + p.name + " z = " + fmt(p.z(), 3));
    v.check(r.max_abs_z() <= 3.0 && r.failures == 0,
            "Geweke " + std::string(to_string(variant)) + ": " + std::to_string(r.params.size()) +
                " parameters, max |z| = " + fmt(std::abs(worst_z), 3) + " (" + worst + "), " +
                std::to_string(r.failures) + " failed reps, " + std::to_string(r.redraws) + " prior redraws, " +
                fmt(seconds_since(t0), 3) + " s");
  }
}

void smoother_checks(Verdict& v) {
  const auto& table = MixtureTable::ksc();
  Rng rng(55);
  const Index T = 25;
  const SvSeriesParams sv{-0.3, 0.93, 0.05};
  VectorXd fstar(T);
  VectorXi s(T);
  double h = sv.mu;
  for (Index t = 0; t < T; ++t) {
    s(t) = static_cast<int>(rng.uniform() * table.size());
    fstar(t) = h + table[s(t)].mean + std::sqrt(table[s(t)].variance) * rng.normal();
    h = sv.mu + sv.phi * (h - sv.mu) + std::sqrt(sv.sigma_eta_sq) * rng.normal();
  }
  const SmoothedPath ks = smooth_h(fstar, s, table, sv);
  const SmoothedPath dense = testing::dense_sv_posterior(fstar, s, table, sv);
  const double det = std::max((ks.mean - dense.mean).cwiseAbs().maxCoeff(), (ks.var - dense.var).cwiseAbs().maxCoeff());
  v.check(det < 1e-8, "Kalman smoother vs dense Gaussian posterior: max diff " + fmt(det, 3) + " < 1e-8");
  const int n = 20000;
  VectorXd sum = VectorXd::Zero(T);
  for (int i = 0; i < n; ++i) sum += ffbs_h(fstar, s, table, sv, rng);
  double worst = 0.0;
  for (Index t = 0; t < T; ++t) worst = std::max(worst, std::abs(sum(t) / n - ks.mean(t)) / std::sqrt(ks.var(t) / n));
  v.check(worst < 3.0, "FFBS mean vs smoother: max |diff| / SE = " + fmt(worst, 3) + " < 3");
}

void conjugate_checks(Verdict& v) {
  Rng rng(77);
  const ModelParams base = reference_simulation_params();
  PriorConfig pr;
  double worst_meas = 0.0, worst_bj = 0.0, worst_a = 0.0;
  {
    const SimulatedData s = simulate_pg(base.meas, base.corr, 30, rng);
    const InvGammaParams ig = sigma_sq_conditional(s.data.Y, s.data.F, pr);
    const BConditional bc = b_conditional(s.data.Y, s.data.F);
    auto cond = [&](const VectorXd& o, const MatrixXd& B) {
      double out = 0.0;
      for (Index j = 0; j < 10; ++j)
        out += inverse_gamma_logpdf(o(j), ig.shape, ig.scale(j)) +
               mvn_logpdf(VectorXd((B.row(j) - bc.mean.row(j)).transpose()), MatrixXd(o(j) * bc.sigma_b));
      return out;
    };
    auto joint = [&](const VectorXd& o, const MatrixXd& B) {
      ModelParams m = s.params;
      m.meas.omega = o;
      m.meas.B = B;
      return log_joint(s.data, m, s.latents, pr, ModelVariant::PG);
    };
    auto joint_a = [&](const MatrixXd& a_inv) {
      ModelParams m = s.params;
      m.corr.A = SpdMatrix<double>(MatrixXd(a_inv.inverse()));
      return log_joint(s.data, m, s.latents, pr, ModelVariant::PG);
    };
    const AConditional ac = a_conditional(s.latents.P, s.params.corr.d, s.params.corr.k, pr.a_df(2), pr.a_scale(2));
    for (int rep = 0; rep < 10; ++rep) {
      VectorXd o1 = (0.02 + 0.5 * rng.normal_vector(10).array().abs()).matrix();
      VectorXd o2 = (0.02 + 0.5 * rng.normal_vector(10).array().abs()).matrix();
      const MatrixXd B1 = s.params.meas.B + 0.1 * rng.normal_matrix(10, 2);
      const MatrixXd B2 = s.params.meas.B + 0.1 * rng.normal_matrix(10, 2);
      worst_meas = std::max(worst_meas, std::abs((cond(o1, B1) - cond(o2, B2)) - (joint(o1, B1) - joint(o2, B2))));
      const MatrixXd x1 = testing::random_spd(2, 0.2, 3.0, rng), x2 = testing::random_spd(2, 0.2, 3.0, rng);
      worst_a = std::max(worst_a, std::abs((wishart_logpdf(x1, ac.df, ac.scale) - wishart_logpdf(x2, ac.df, ac.scale)) -
                                           (joint_a(x1) - joint_a(x2))));
    }
  }
  {
    const SimulatedData s = simulate_sverr(base.meas.B, SvParams::constant(10, -2.0, 0.9, 0.05), base.factor_sv,
                                           base.corr, 30, rng);
    for (Index j = 0; j < 10; ++j) {
      const VectorXd lambda = s.latents.He.col(j).array().exp();
      const auto [mean, cov] = bj_conditional(s.data.Y.col(j), s.data.F, lambda, pr.c0);
      auto joint = [&](const VectorXd& b) {
        ModelParams m = s.params;
        m.meas.B.row(j) = b.transpose();
        return log_joint(s.data, m, s.latents, pr, ModelVariant::SVERR);
      };
      const VectorXd b1 = mean + 0.2 * rng.normal_vector(2), b2 = mean + 0.2 * rng.normal_vector(2);
      worst_bj = std::max(worst_bj, std::abs((mvn_logpdf(VectorXd(b1 - mean), cov) - mvn_logpdf(VectorXd(b2 - mean), cov)) -
                                             (joint(b1) - joint(b2))));
    }
  }
  v.check(worst_meas < 1e-8, "sigma^2 and B conditionals vs joint ratios: max error " + fmt(worst_meas, 3));
  v.check(worst_bj < 1e-8, "b_j conditional vs joint ratios: max error " + fmt(worst_bj, 3));
  v.check(worst_a < 1e-8, "A conditional vs joint ratios: max error " + fmt(worst_a, 3));
}

void arms_checks(Verdict& v) {
  Rng rng(88);
  const int n = 4000;
  auto chain = [&](const std::function<double(double)>& f, ArmsConfig cfg, double x) {
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(x = arms(f, cfg, x, rng));
    return xs;
  };
  ArmsConfig cn;
  cn.lo = -10.0;
  cn.hi = 10.0;
  const boost::math::normal_distribution<double> nd;
  const double dn = testing::ks_statistic(chain([](double x) { return -0.5 * x * x; }, cn, 0.3),
                                          [&](double x) { return boost::math::cdf(nd, x); });
  ArmsConfig cg;
  cg.lo = 0.0;
  cg.hi = 40.0;
  const boost::math::gamma_distribution<double> gd(3.0, 1.0);
  const double dg = testing::ks_statistic(chain([](double x) { return 2.0 * std::log(x) - x; }, cg, 2.0),
                                          [&](double x) { return boost::math::cdf(gd, x); });
  const double crit = testing::ks_critical_1pct(n);
  v.check(dn < crit, "ARMS N(0,1): KS D = " + fmt(dn, 3) + " < " + fmt(crit, 3));
  v.check(dg < crit, "ARMS Gamma(3,1): KS D = " + fmt(dg, 3) + " < " + fmt(crit, 3));
}

void matrix_checks(Verdict& v) {
  Rng rng(99);
  const MatrixXd S = (MatrixXd(2, 2) << 1.0, 0.3, 0.3, 0.5).finished();
  const double df = 7.0;
  const int n = 20000;
  MatrixXd sum = MatrixXd::Zero(2, 2), sumsq = MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const MatrixXd w = sample_wishart(df, S, rng);
    sum += w;
    sumsq += w.cwiseProduct(w);
  }
  double worst = 0.0;
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      const double m = sum(i, j) / n, var = sumsq(i, j) / n - m * m;
      worst = std::max(worst, std::abs(m - df * S(i, j)) / std::sqrt(var / n));
    }
  v.check(worst < 3.0, "Wishart sample mean vs df S: max |diff| / SE = " + fmt(worst, 3));

  double group = 0.0, diag = 0.0, kl_zero = 0.0, kl_min = INFINITY;
  for (int rep = 0; rep < 100; ++rep) {
    const MatrixXd p = testing::random_spd(3, 0.1, 10.0, rng);
    const double a = 2.0 * rng.uniform() - 1.0, b = 2.0 * rng.uniform() - 1.0;
    group = std::max(group, (spd_power(p, a) * spd_power(p, b) - spd_power(p, a + b)).cwiseAbs().maxCoeff());
    diag = std::max(diag, (standardize_corr(p).matrix().diagonal().array() - 1.0).abs().maxCoeff());
    const MatrixXd q = testing::random_spd(3, 0.1, 10.0, rng);
    kl_zero = std::max(kl_zero, std::abs(kl_normal(p, p)));
    kl_min = std::min(kl_min, kl_normal(p, q));
  }
  v.check(group < 1e-9, "spd_power group law: max error " + fmt(group, 3));
  v.check(diag == 0.0, "standardize_corr diagonal: max |c_ii - 1| = " + fmt(diag, 3));
  v.check(kl_zero < 1e-12 && kl_min >= 0.0,
          "kl_normal: max |KL(S,S)| = " + fmt(kl_zero, 3) + ", min KL over 100 pairs = " + fmt(kl_min, 3));
  const bool labels = evidence_label(14.940) == Evidence::VeryStrong && evidence_label(1.269) == Evidence::Positive &&
                      evidence_label(-27.864) == Evidence::FavorModel0;
  v.check(labels, "evidence_label: 14.940 -> " + std::string(to_string(evidence_label(14.940))) + ", 1.269 -> " +
                      std::string(to_string(evidence_label(1.269))) + ", -27.864 -> " +
                      std::string(to_string(evidence_label(-27.864))));
}

int criterion5(const fs::path&) {
  const auto t0 = Clock::now();
  Verdict v;
  geweke_checks(v);
  smoother_checks(v);
  conjugate_checks(v);
  arms_checks(v);
  matrix_checks(v);
  const double secs = seconds_since(t0);
  v.check(secs < 300.0, "suite runtime " + fmt(secs) + " s < 300 s");
  long failed = 0;
  for (const auto& d : v.details) failed += d.rfind("FAIL", 0) == 0;
  return report(5, v, "sampler-correctness suite, " + std::to_string(failed) + " failing checks");
}

// ---------------------------------------------------------------- 6

bool same_outputs(const fs::path& a, const fs::path& b, std::string& why) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "metadata.json" || e.path().extension() == ".log") continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || read_text(e.path().string()) != read_text((b / rel).string())) {
      why = rel.string();
      return false;
    }
    ++n;
  }
  why = std::to_string(n) + " files";
  return n > 0;
}

int criterion6(const fs::path& work) {
  const fs::path root = work / "c6";
  fs::remove_all(root);
  Verdict v;
  std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --preset paper-3.1 --T 150 --seed 21 --out {o}"},
      {"fit", "fit --returns {s}/Y.csv --factors {s}/F.csv --truth {s}/truth.json --burn-in 100 --kept 100 --seed 5 --out {o}"},
      {"predict", "predict --checkpoint {r}/fit/chain.ckpt.json --seed 5 --out {o}"},
      {"backtest", "backtest --returns {s}/Y.csv --factors {s}/F.csv --models odcfmsv,pg --periods 2 --burn-in 50 --kept 50 --seed 5 --threads 2 --out {o}"},
      {"compare", "compare --T 60 --reps 2 --burn-in 30 --kept 30 --seed 5 --threads 2 --out {o}"},
      {"evalcorr", "evalcorr --factors {s}/F.csv --window 10 --checkpoint {r}/fit/chain.ckpt.json --out {o}"}};
  auto expand = [](std::string t, const std::map<std::string, std::string>& m) {
    for (const auto& [k, val] : m)
      for (std::size_t pos; (pos = t.find(k)) != std::string::npos;) t.replace(pos, k.size(), val);
    return t;
  };
  for (const char* run : {"run1", "run2"}) {
    const fs::path r = root / run;
    fs::create_directories(r);
    for (const auto& [name, tmpl] : commands) {
      const std::string args =
          expand(tmpl, {{"{o}", (r / name).string()}, {"{s}", (r / "simulate").string()}, {"{r}", r.string()}});
      const int code = run_cli_binary(args, r / (name + ".log"));
      if (code != 0) v.check(false, std::string(run) + " " + name + " exited with " + std::to_string(code));
    }
  }
  for (const auto& [name, tmpl] : commands) {
    std::string why;
    const bool same = same_outputs(root / "run1" / name, root / "run2" / name, why);
    v.check(same, name + ": " + (same ? "byte-identical (" + why + ")" : "differs in " + why));
  }
  return report(6, v, "repeated commands with the same seed are byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  fs::path work = fs::temp_directory_path() / "odcfmsv_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) criterion = std::atoi(argv[++i]);
    else if (a == "--workdir" && i + 1 < argc) work = argv[++i];
  }
  if (criterion < 1 || criterion > 6) {
    std::cerr << "usage: acceptance --criterion N [--workdir DIR]   (N = 1..6)\n";
    return 2;
  }
  fs::create_directories(work);
  try {
    switch (criterion) {
      case 1: return criterion1(work);
      case 2: return criterion2(work);
      case 3: return criterion3(work);
      case 4: return criterion4(work);
      case 5: return criterion5(work);
      default: return criterion6(work);
    }
  } catch (const std::exception& e) {
    std::cout << "FAIL criterion " << criterion << ": " << e.what() << std::endl;
    return 1;
  }
}
