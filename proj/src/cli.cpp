#include "odcfmsv/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "odcfmsv/checkpoint.hpp"
#include "odcfmsv/error.hpp"
#include "odcfmsv/evaluate.hpp"
#include "odcfmsv/io.hpp"
#include "odcfmsv/predict.hpp"

namespace odcf {

namespace {

namespace fs = std::filesystem;

/// Raw command-line values; unset options fall back to the config file, then defaults.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  bool rescale_percent = false;
  std::optional<std::string> variant;
  std::optional<long> burn_in, kept, thin;
  std::optional<std::string> models;
  std::optional<long> periods;
  std::optional<std::string> weights;
  std::optional<std::string> returns, factors;
  std::optional<std::string> preset;
  std::optional<long> T;
  std::optional<std::string> checkpoint;
  bool resume = false;
  std::optional<long> checkpoint_every;
  std::optional<std::string> truth;
  std::optional<long> start;
  std::optional<long> reps;
  std::optional<long> window;
  bool progress = false;
};

/// Resolved settings of one invocation.
struct RunConfig {
  std::string command;
  std::string returns_path, factors_path;
  bool rescale_percent = false;
  ModelVariant variant = ModelVariant::ODCFMSV;
  PriorConfig priors;
  McmcConfig mcmc;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  std::vector<ModelVariant> models;
  long periods = 1;
  std::optional<long> start;
  std::string weights = "equal";
  std::string preset = "paper-3.1";
  std::optional<long> T;
  std::string checkpoint;
  bool resume = false;
  long checkpoint_every = 1000;
  std::string truth_path;
  long reps = 10;
  long window = 3;
  bool progress = false;
};

template <class T>
T pick(const std::optional<T>& flag, const Json& cfg, const char* key, T fallback) {
  if (flag) return *flag;
  if (cfg.contains(key)) return cfg.at(key).get<T>();
  return fallback;
}

Json section(const Json& cfg, const char* key) { return cfg.contains(key) ? cfg.at(key) : Json::object(); }

std::vector<ModelVariant> parse_models(const std::string& list) {
  std::vector<ModelVariant> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_variant(item));
  if (out.empty()) throw DomainError("--models: empty model list");
  return out;
}

RunConfig resolve(const std::string& command, const Flags& f) {
  Json cfg = Json::object();
  if (!f.config.empty()) {
    try {
      cfg = Json::parse(read_text(f.config));
    } catch (const Json::exception& e) {
      throw DomainError("config '" + f.config + "': " + e.what());
    }
    if (!cfg.is_object()) throw DomainError("config '" + f.config + "': top level must be an object");
  }
  RunConfig rc;
  rc.command = command;
  try {
    const Json data = section(cfg, "data");
    rc.returns_path = pick(f.returns, data, "returns", std::string());
    rc.factors_path = pick(f.factors, data, "factors", std::string());
    rc.rescale_percent = f.rescale_percent || data.value("rescale_percent", false);
    rc.variant = parse_variant(pick(f.variant, cfg, "variant", std::string("odcfmsv")));
    rc.priors = priors_from_json(section(cfg, "priors"));
    const Json mc = section(cfg, "mcmc");
    rc.mcmc.burn_in = pick(f.burn_in, mc, "burn_in", rc.mcmc.burn_in);
    rc.mcmc.kept = pick(f.kept, mc, "kept", rc.mcmc.kept);
    rc.mcmc.thin = pick(f.thin, mc, "thin", rc.mcmc.thin);
    rc.mcmc.adapt = mc.value("adapt", rc.mcmc.adapt);
    rc.mcmc.noncentered_d = mc.value("noncentered_d", rc.mcmc.noncentered_d);
    rc.mcmc.track_log_joint = mc.value("track_log_joint", rc.mcmc.track_log_joint);
    rc.mcmc.offset = mc.value("offset", rc.mcmc.offset);
    rc.seed = pick(f.seed, cfg, "seed", std::uint64_t{1});
    rc.threads = pick(f.threads, cfg, "threads", 1);
    rc.out_dir = pick(f.out, cfg, "out", std::string("."));
    const Json fc = section(cfg, "forecast");
    rc.models = parse_models(pick(f.models, fc, "models", std::string("odcfmsv,pg")));
    rc.periods = pick(f.periods, fc, "periods", 1L);
    if (f.start) rc.start = *f.start;
    else if (fc.contains("start")) rc.start = fc.at("start").get<long>();
    rc.weights = pick(f.weights, fc, "weights", std::string("equal"));
    const Json sim = section(cfg, "simulate");
    rc.preset = pick(f.preset, sim, "preset", std::string("paper-3.1"));
    if (f.T) rc.T = *f.T;
    else if (sim.contains("T")) rc.T = sim.at("T").get<long>();
    rc.checkpoint = pick(f.checkpoint, cfg, "checkpoint", std::string());
    rc.resume = f.resume || cfg.value("resume", false);
    rc.checkpoint_every = pick(f.checkpoint_every, cfg, "checkpoint_every", 1000L);
    rc.truth_path = pick(f.truth, cfg, "truth", std::string());
    const Json cmp = section(cfg, "compare");
    rc.reps = pick(f.reps, cmp, "replications", 10L);
    if (!rc.T && cmp.contains("T") && command == "compare") rc.T = cmp.at("T").get<long>();
    rc.window = pick(f.window, section(cfg, "evalcorr"), "window", 3L);
    rc.progress = f.progress;
  } catch (const Json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  if (rc.threads < 1) throw DomainError("--threads must be >= 1");
  if (rc.periods < 1) throw DomainError("--periods must be >= 1");
  if (rc.checkpoint_every < 1) throw DomainError("--checkpoint-every must be >= 1");
  rc.mcmc.seed = rc.seed;
  rc.mcmc.variant = rc.variant;
  rc.mcmc.validate();
  if (rc.checkpoint.empty()) rc.checkpoint = (fs::path(rc.out_dir) / "chain.ckpt.json").string();
  return rc;
}

std::string out_path(const RunConfig& rc, const std::string& name) { return (fs::path(rc.out_dir) / name).string(); }

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FactorDataset load_data(const RunConfig& rc) {
  if (rc.returns_path.empty() || rc.factors_path.empty())
    throw DomainError("data paths missing: pass --returns and --factors or set data.returns/data.factors");
  const CsvTable y = read_csv(rc.returns_path, rc.rescale_percent);
  const CsvTable f = read_csv(rc.factors_path, rc.rescale_percent);
  if (y.values.rows() != f.values.rows())
    throw DataError("returns have " + std::to_string(y.values.rows()) + " rows but factors have " +
                    std::to_string(f.values.rows()));
  FactorDataset data{y.values, f.values};
  data.validate();
  return data;
}

VectorXd load_weights(const RunConfig& rc, Index p) {
  if (rc.weights == "equal") return equal_weights(p);
  const CsvTable t = read_csv(rc.weights);
  VectorXd w;
  if (t.values.rows() == 1) w = t.values.row(0).transpose();
  else if (t.values.cols() == 1) w = t.values.col(0);
  else throw DataError(rc.weights + ": weights must be a single row or a single column");
  if (w.size() != p)
    throw DataError(rc.weights + ": " + std::to_string(w.size()) + " weights for " + std::to_string(p) + " series");
  return w;
}

struct Truth {
  ModelVariant variant;
  SimulatedData sim;
  std::map<std::string, double> named;
};

Truth load_truth(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
    Truth t;
    t.variant = parse_variant(j.at("variant").get<std::string>());
    t.sim.variant = t.variant;
    t.sim.params = params_from_json(j.at("params"));
    t.sim.latents = latents_from_json(j.at("latents"));
    for (const auto& v : j.at("named")) t.named[v.at("name").get<std::string>()] = v.at("value").get<double>();
    return t;
  } catch (const Json::exception& e) {
    throw DataError("truth file '" + path + "': " + e.what());
  }
}

void write_metadata(const RunConfig& rc, const std::string& started, const Json& extra) {
  Json meta = {{"command", rc.command}, {"started", started}, {"finished", utc_now()}, {"threads", rc.threads}};
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  write_text(out_path(rc, "metadata.json"), meta.dump(2) + "\n");
}

std::string kv(const std::string& key, double v) { return key + ": " + format_number(v) + "\n"; }

// simulate ------------------------------------------------------------------

SimulatedData simulate_preset(const std::string& preset, Index T, Rng& rng) {
  const ModelParams p = reference_simulation_params();
  if (preset == "paper-3.1") return simulate_odcfmsv(p.meas, p.factor_sv, p.corr, T, rng);
  if (preset == "pg-3.2") return simulate_pg(p.meas, p.corr, T, rng);
  if (preset == "sverr-demo") {
    SvParams err;
    err.mu = p.meas.omega.array().log().matrix();
    err.phi = VectorXd::Constant(p.meas.omega.size(), 0.95);
    err.sigma_eta_sq = VectorXd::Constant(p.meas.omega.size(), 0.04);
    return simulate_sverr(p.meas.B, err, p.factor_sv, p.corr, T, rng);
  }
  throw DomainError("unknown preset '" + preset + "' (paper-3.1, pg-3.2, sverr-demo)");
}

int cmd_simulate(const RunConfig& rc, std::ostream& out) {
  const Index T = rc.T.value_or(1000);
  Rng rng(rc.seed, 0);
  const SimulatedData sim = simulate_preset(rc.preset, T, rng);
  write_csv(out_path(rc, "Y.csv"), numbered_names("y", sim.data.p()), sim.data.Y);
  write_csv(out_path(rc, "F.csv"), numbered_names("f", sim.data.q()), sim.data.F);
  Json named = Json::array();
  for (const auto& v : flatten_parameters(sim.params, sim.variant))
    named.push_back({{"parameter", v.group}, {"name", v.name}, {"value", v.value}});
  const Json truth = {{"variant", std::string(to_string(sim.variant))},
                      {"preset", rc.preset},
                      {"T", T},
                      {"seed", rc.seed},
                      {"params", to_json(sim.params)},
                      {"named", named},
                      {"latents", to_json(sim.latents)}};
  write_text(out_path(rc, "truth.json"), truth.dump() + "\n");
  // plot-ready true paths
  const auto corr = correlation_path(sim.latents.P);
  const auto var0 = var_path(true_return_cov_path(sim), equal_weights(sim.data.p()));
  std::vector<std::string> cols{"t"};
  const Index q = sim.data.q();
  for (Index i = 0; i < q; ++i)
    for (Index j = i + 1; j < q; ++j) cols.push_back("rho_" + std::to_string(j + 1) + "_" + std::to_string(i + 1));
  cols.push_back("var0");
  MatrixXd m(T, static_cast<Index>(cols.size()));
  for (Index t = 0; t < T; ++t) {
    Index c = 0;
    m(t, c++) = static_cast<double>(t + 1);
    for (Index i = 0; i < q; ++i)
      for (Index j = i + 1; j < q; ++j) m(t, c++) = corr[static_cast<std::size_t>(t)](j, i);
    m(t, c) = var0[static_cast<std::size_t>(t)];
  }
  write_csv(out_path(rc, "truth_paths.csv"), cols, m);
  out << "simulated " << to_string(sim.variant) << " data: T=" << T << " p=" << sim.data.p() << " q=" << q << '\n';
  return kExitOk;
}

// fit -----------------------------------------------------------------------

int cmd_fit(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const FactorDataset data = load_data(rc);
  McmcConfig mc = rc.mcmc;
  mc.portfolio_weights = load_weights(rc, data.p());
  GibbsSampler sampler(data, rc.priors, mc);
  if (rc.resume && fs::exists(rc.checkpoint)) {
    restore(sampler, load_checkpoint(rc.checkpoint));
    err << "resumed from " << rc.checkpoint << " at sweep " << sampler.sweeps_done() << '\n';
  }
  sampler.run([&](long sweep) {
    if (sweep % rc.checkpoint_every == 0 && sweep < sampler.total_sweeps())
      save_checkpoint(rc.checkpoint, capture(sampler));
    if (rc.progress && sweep % 1000 == 0) err << "sweep " << sweep << "/" << sampler.total_sweeps() << '\n';
    return true;
  });
  save_checkpoint(rc.checkpoint, capture(sampler));

  const ChainDraws& chain = sampler.draws();
  const PosteriorSummary summary = summarize(chain);
  std::optional<Truth> truth;
  if (!rc.truth_path.empty()) truth = load_truth(rc.truth_path);

  std::ostringstream csv;
  csv << "parameter,name" << (truth ? ",true" : "") << ",mean,lower,upper\n";
  long covered = 0, with_truth = 0;
  for (const auto& s : summary.params) {
    csv << s.group << ',' << s.name;
    if (truth) {
      const auto it = truth->named.find(s.name);
      if (it != truth->named.end()) {
        csv << ',' << format_number(it->second);
        ++with_truth;
        if (it->second >= s.lower && it->second <= s.upper) ++covered;
      } else {
        csv << ',';
      }
    }
    csv << ',' << format_number(s.mean) << ',' << format_number(s.lower) << ',' << format_number(s.upper) << '\n';
  }
  write_text(out_path(rc, "summary.csv"), csv.str());

  // smoothed paths
  const Index T = data.T(), q = data.q();
  std::vector<std::string> cols{"t"};
  for (Index i = 0; i < q; ++i)
    for (Index j = i + 1; j < q; ++j) cols.push_back("rho_" + std::to_string(j + 1) + "_" + std::to_string(i + 1));
  const bool has_h = chain.h_sum.cols() > 0;
  if (has_h)
    for (Index i = 0; i < q; ++i) cols.push_back("h_" + std::to_string(i + 1));
  cols.push_back("var_est");
  const auto corr = chain.corr_mean();
  const VectorXd sd = chain.portfolio_sd_mean();
  const MatrixXd h_mean = chain.h_sum / static_cast<double>(std::max<long>(chain.count(), 1));
  MatrixXd m(T, static_cast<Index>(cols.size()));
  for (Index t = 0; t < T; ++t) {
    Index c = 0;
    m(t, c++) = static_cast<double>(t + 1);
    for (Index i = 0; i < q; ++i)
      for (Index j = i + 1; j < q; ++j) m(t, c++) = corr[static_cast<std::size_t>(t)](j, i);
    if (has_h)
      for (Index i = 0; i < q; ++i) m(t, c++) = h_mean(t, i);
    m(t, c) = kVarMultiplier * sd(t);
  }
  write_csv(out_path(rc, "smoothed.csv"), cols, m);

  const auto& dg = chain.diagnostics;
  std::ostringstream rep;
  rep << "[fit]\n"
      << "variant: " << to_string(mc.variant) << "\n"
      << "sweeps: " << sampler.sweeps_done() << "\n"
      << "stored_draws: " << chain.count() << "\n"
      << "config_hash: " << hex64(chain_config_hash(data, rc.priors, sampler.config())) << "\n";
  if (dg.pt.proposed) rep << kv("pt_acceptance", static_cast<double>(dg.pt.accepted) / dg.pt.proposed);
  rep << "pt_failed: " << dg.pt.failed << "\n";
  if (dg.d_move_proposed) rep << kv("d_move_acceptance", static_cast<double>(dg.d_move_accepted) / dg.d_move_proposed);
  if (dg.arms_calls) {
    rep << kv("arms_d_evaluations_per_call", static_cast<double>(dg.arms_d_evaluations) / dg.arms_calls);
    rep << kv("arms_k_evaluations_per_call", static_cast<double>(dg.arms_k_evaluations) / dg.arms_calls);
  }
  if (truth) {
    rep << "covered: " << covered << "\n" << "parameters_with_truth: " << with_truth << "\n";
    if (truth->sim.latents.P.size() == static_cast<std::size_t>(T) && q >= 2) {
      truth->sim.data = data;
      const SmoothingAccuracy acc = smoothing_accuracy(truth->sim, chain);
      PerformanceReport perf;
      perf.mae_rho = acc.mae_rho;
      perf.mae_var = acc.mae_var;
      std::ostringstream p;
      perf.write(p);
      rep << p.str();
      MatrixXd s(T, 5);
      for (Index t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        s.row(t) << static_cast<double>(t + 1), acc.rho_true[ts], acc.rho_est[ts], acc.var_true[ts], acc.var_est[ts];
      }
      write_csv(out_path(rc, "smoothing.csv"), {"t", "rho_true", "rho_est", "var_true", "var_est"}, s);
    }
  }
  write_text(out_path(rc, "fit_report.txt"), rep.str());
  out << rep.str();
  return kExitOk;
}

// predict -------------------------------------------------------------------

void write_forecast_record(std::ostream& o, const std::string& model, long period, const ForecastPeriod& f,
                           const std::string& cov_file) {
  o << "[forecast]\n"
    << "model: " << model << "\n"
    << "period: " << period << "\n"
    << "index: " << f.index + 1 << "\n"
    << "cov_file: " << cov_file << "\n"
    << kv("var", f.var);
  if (f.lps) o << kv("lps", *f.lps);
  if (f.lps_ew) o << kv("lps_ew", *f.lps_ew);
}

std::vector<std::string> cov_columns(Index p) {
  std::vector<std::string> cols{"index"};
  for (Index i = 0; i < p; ++i)
    for (Index j = i; j < p; ++j) cols.push_back("s_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  return cols;
}

VectorXd cov_row(Index index, const MatrixXd& s) {
  const Index p = s.rows();
  VectorXd r(1 + p * (p + 1) / 2);
  Index c = 0;
  r(c++) = static_cast<double>(index + 1);
  for (Index i = 0; i < p; ++i)
    for (Index j = i; j < p; ++j) r(c++) = s(i, j);
  return r;
}

int cmd_predict(const RunConfig& rc, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(rc.checkpoint);
  if (ckpt.draws.count() == 0) throw DataError("checkpoint has no stored draws; finish the fit first");
  const Index T = ckpt.T, p = ckpt.p;
  std::optional<VectorXd> y_next;
  if (!rc.returns_path.empty()) {
    const CsvTable y = read_csv(rc.returns_path, rc.rescale_percent);
    if (y.values.cols() != p) throw DataError(rc.returns_path + ": column count differs from the fitted data");
    if (y.values.rows() > T) y_next = y.values.row(T).transpose();
  }
  const VectorXd w = load_weights(rc, p);
  Rng rng(derive_seed(rc.seed, 0x70726564ULL), 2);
  const ForecastPeriod f = forecast_one(ckpt.draws, T, y_next ? &*y_next : nullptr, w, rng);
  MatrixXd covm = cov_row(T, f.cov).transpose();
  write_csv(out_path(rc, "forecast_cov.csv"), cov_columns(p), covm);
  std::ostringstream rep;
  write_forecast_record(rep, std::string(to_string(ckpt.config.variant)), 1, f, "forecast_cov.csv");
  write_text(out_path(rc, "forecast.txt"), rep.str());
  out << rep.str();
  return kExitOk;
}

// backtest ------------------------------------------------------------------

int cmd_backtest(const RunConfig& rc, std::ostream& out) {
  const FactorDataset data = load_data(rc);
  const Index p = data.p();
  BacktestConfig bc;
  bc.periods = rc.periods;
  bc.first_target = rc.start ? static_cast<Index>(*rc.start - 1) : data.T() - rc.periods;
  bc.mcmc = rc.mcmc;
  bc.priors = rc.priors;
  bc.weights = load_weights(rc, p);
  bc.threads = rc.threads;
  std::vector<ModelBacktest> results;
  for (ModelVariant v : rc.models) results.push_back(rolling_backtest(data, v, bc));

  std::vector<std::string> cols{"period", "index"};
  for (const auto& r : results) {
    const std::string n(to_string(r.variant));
    cols.insert(cols.end(), {"var_" + n, "lps_" + n, "lps_ew_" + n});
  }
  const bool pair = results.size() == 2;
  if (pair) cols.insert(cols.end(), {"lps_diff", "cum_log_bf", "lps_ew_diff", "cum_log_bf_ew"});
  MatrixXd table(rc.periods, static_cast<Index>(cols.size()));
  double cum = 0.0, cum_ew = 0.0;
  for (long n = 0; n < rc.periods; ++n) {
    const auto ns = static_cast<std::size_t>(n);
    Index c = 0;
    table(n, c++) = static_cast<double>(n + 1);
    table(n, c++) = static_cast<double>(results.front().periods[ns].index + 1);
    for (const auto& r : results) {
      table(n, c++) = r.periods[ns].var;
      table(n, c++) = *r.periods[ns].lps;
      table(n, c++) = *r.periods[ns].lps_ew;
    }
    if (pair) {
      const double d = *results[0].periods[ns].lps - *results[1].periods[ns].lps;
      const double d_ew = *results[0].periods[ns].lps_ew - *results[1].periods[ns].lps_ew;
      cum += d;
      cum_ew += d_ew;
      table(n, c++) = d;
      table(n, c++) = cum;
      table(n, c++) = d_ew;
      table(n, c++) = cum_ew;
    }
  }
  write_csv(out_path(rc, "backtest.csv"), cols, table);

  std::ostringstream rep;
  for (const auto& r : results) {
    const std::string n(to_string(r.variant));
    const std::string cov_file = "backtest_cov_" + n + ".csv";
    MatrixXd covs(rc.periods, 1 + p * (p + 1) / 2);
    for (long k = 0; k < rc.periods; ++k) {
      const auto& f = r.periods[static_cast<std::size_t>(k)];
      covs.row(k) = cov_row(f.index, f.cov).transpose();
      write_forecast_record(rep, n, k + 1, f, cov_file);
    }
    write_csv(out_path(rc, cov_file), cov_columns(p), covs);
  }
  if (pair) {
    const double bf = cum_log_bayes_factor(results[0].lps_series(), results[1].lps_series());
    const double bf_ew = cum_log_bayes_factor(results[0].lps_ew_series(), results[1].lps_ew_series());
    rep << "[aggregate]\n"
        << "model1: " << to_string(results[0].variant) << "\n"
        << "model0: " << to_string(results[1].variant) << "\n"
        << kv("cum_log_bf", bf) << "evidence: " << to_string(evidence_label(bf)) << "\n"
        << kv("cum_log_bf_ew", bf_ew) << "evidence_ew: " << to_string(evidence_label(bf_ew)) << "\n";
  }
  if (!rc.truth_path.empty()) {
    const Truth truth = load_truth(rc.truth_path);
    std::vector<MatrixXd> sigma0;
    for (const auto& f : results.front().periods) {
      if (static_cast<std::size_t>(f.index) >= truth.sim.latents.P.size())
        throw DataError("truth file is shorter than the forecast window");
      sigma0.push_back(return_covariance(truth.sim.params, truth.sim.latents, f.index, truth.variant));
    }
    const auto var0 = var_path(sigma0, bc.weights);
    std::vector<double> mae, fn;
    for (const auto& r : results) {
      std::vector<double> var_est;
      std::vector<MatrixXd> cov_est;
      for (const auto& f : r.periods) {
        var_est.push_back(f.var);
        cov_est.push_back(f.cov);
      }
      PerformanceReport perf;
      perf.mae_var = mae_series(var_est, var0);
      perf.fn = fn_mean(sigma0, cov_est);
      mae.push_back(*perf.mae_var);
      fn.push_back(*perf.fn);
      rep << "model: " << to_string(r.variant) << "\n";
      perf.write(rep);
    }
    if (pair) {
      PerformanceReport ratio;
      ratio.ratio_mae_var = mae[1] / mae[0];
      ratio.ratio_fn = fn[1] / fn[0];
      ratio.write(rep);
    }
  }
  write_text(out_path(rc, "backtest.txt"), rep.str());
  out << rep.str();
  return kExitOk;
}

// compare -------------------------------------------------------------------

int cmd_compare(const RunConfig& rc, std::ostream& out) {
  DeltaMklConfig dc;
  dc.T = rc.T.value_or(300);
  dc.replications = rc.reps;
  dc.mcmc = rc.mcmc;
  dc.mcmc.track_log_joint = false;
  dc.priors = rc.priors;
  dc.seed = rc.seed;
  dc.threads = rc.threads;
  std::ostringstream csv, rep;
  csv << "dgp,replication,mkl_true,mkl_wrong,delta,status\n";
  for (ModelVariant dgp : rc.models) {
    const DeltaMklResult r = delta_mkl_experiment(dgp, dc);
    for (const auto& x : r.replications) {
      csv << to_string(dgp) << ',' << x.index + 1 << ',';
      if (x.failure) {
        std::string msg = *x.failure;
        for (char& ch : msg)
          if (ch == ',' || ch == '\n') ch = ';';
        csv << ",,," << "failed: " << msg << '\n';
      } else {
        csv << format_number(x.mkl_true) << ',' << format_number(x.mkl_wrong) << ',' << format_number(x.delta)
            << ",ok\n";
      }
    }
    rep << "[delta_mkl]\n"
        << "dgp: " << to_string(dgp) << "\n"
        << "wrong_model: " << to_string(competing_variant(dgp)) << "\n"
        << "replications: " << r.replications.size() << "\n"
        << "failures: " << r.failures << "\n";
    PerformanceReport perf;
    perf.delta_mkl_mean = r.mean;
    perf.delta_mkl_se = r.std_error;
    perf.write(rep);
  }
  write_text(out_path(rc, "compare.csv"), csv.str());
  write_text(out_path(rc, "compare.txt"), rep.str());
  out << rep.str();
  return kExitOk;
}

// evalcorr ------------------------------------------------------------------

int cmd_evalcorr(const RunConfig& rc, std::ostream& out) {
  if (rc.factors_path.empty()) throw DomainError("evalcorr needs --factors");
  const CsvTable f = read_csv(rc.factors_path, rc.rescale_percent);
  const MatrixXd rc_corr = rolling_corr(f.values, rc.window);
  const Index T = f.values.rows(), q = f.values.cols();
  std::vector<std::string> cols{"t"};
  for (Index i = 0; i < q; ++i)
    for (Index j = i + 1; j < q; ++j) cols.push_back("rolling_" + f.columns[i] + "_" + f.columns[j]);
  std::optional<Checkpoint> ckpt;
  if (!rc.checkpoint.empty() && fs::exists(rc.checkpoint)) {
    ckpt = load_checkpoint(rc.checkpoint);
    if (ckpt->T != T || ckpt->q != q) throw DataError("checkpoint shape differs from the factor file");
    for (Index i = 0; i < q; ++i)
      for (Index j = i + 1; j < q; ++j) cols.push_back("fitted_" + f.columns[i] + "_" + f.columns[j]);
  }
  MatrixXd m(T, static_cast<Index>(cols.size()));
  m.col(0) = VectorXd::LinSpaced(T, 1.0, static_cast<double>(T));
  m.middleCols(1, rc_corr.cols()) = rc_corr;
  std::ostringstream rep;
  rep << "[evalcorr]\n" << "window: " << rc.window << "\n" << "rows: " << T << "\n";
  if (ckpt) {
    const auto fitted = ckpt->draws.corr_mean();
    Index c = 1 + rc_corr.cols();
    Index pair = 0;
    for (Index i = 0; i < q; ++i)
      for (Index j = i + 1; j < q; ++j, ++pair, ++c) {
        VectorXd series(T);
        for (Index t = 0; t < T; ++t) series(t) = fitted[static_cast<std::size_t>(t)](i, j);
        m.col(c) = series;
        rep << kv("mae_rho_" + f.columns[i] + "_" + f.columns[j], mae_series(series, VectorXd(rc_corr.col(pair))));
      }
  }
  write_csv(out_path(rc, "rolling_corr.csv"), cols, m);
  write_text(out_path(rc, "evalcorr.txt"), rep.str());
  out << rep.str();
  return kExitOk;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--threads", f.threads, "worker threads");
  sub->add_option("--out", f.out, "output directory");
}

void add_data(CLI::App* sub, Flags& f) {
  sub->add_option("--returns", f.returns, "CSV of returns (header + T rows)");
  sub->add_option("--factors", f.factors, "CSV of factors (header + T rows)");
  sub->add_flag("--rescale-percent", f.rescale_percent, "multiply inputs by 0.01");
}

void add_mcmc(CLI::App* sub, Flags& f) {
  sub->add_option("--burn-in", f.burn_in, "burn-in sweeps");
  sub->add_option("--kept", f.kept, "kept sweeps");
  sub->add_option("--thin", f.thin, "store every n-th kept sweep");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Observed-factor dynamic-correlation multivariate stochastic volatility"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "simulate a dataset from a preset design");
  add_common(sim, f);
  sim->add_option("--preset", f.preset, "paper-3.1 | pg-3.2 | sverr-demo");
  sim->add_option("--T", f.T, "number of periods");

  auto* fit = app.add_subcommand("fit", "run the MCMC sampler");
  add_common(fit, f);
  add_data(fit, f);
  add_mcmc(fit, f);
  fit->add_option("--variant", f.variant, "odcfmsv | pg | sverr");
  fit->add_option("--weights", f.weights, "portfolio weights CSV or 'equal'");
  fit->add_option("--checkpoint", f.checkpoint, "checkpoint path (default <out>/chain.ckpt.json)");
  fit->add_flag("--resume", f.resume, "continue from an existing checkpoint");
  fit->add_option("--checkpoint-every", f.checkpoint_every, "sweeps between checkpoints");
  fit->add_option("--truth", f.truth, "truth.json from simulate, adds true values and accuracy");
  fit->add_flag("--progress", f.progress, "report progress on stderr");

  auto* pred = app.add_subcommand("predict", "one-step-ahead forecast from a fitted checkpoint");
  add_common(pred, f);
  pred->add_option("--checkpoint", f.checkpoint, "checkpoint path (default <out>/chain.ckpt.json)");
  pred->add_option("--returns", f.returns, "returns CSV; row T+1, if present, is scored");
  pred->add_flag("--rescale-percent", f.rescale_percent, "multiply inputs by 0.01");
  pred->add_option("--weights", f.weights, "portfolio weights CSV or 'equal'");

  auto* bt = app.add_subcommand("backtest", "rolling one-step-ahead forecasts with refits");
  add_common(bt, f);
  add_data(bt, f);
  add_mcmc(bt, f);
  bt->add_option("--models", f.models, "comma-separated models; first is model 1, second model 0");
  bt->add_option("--periods", f.periods, "number of forecast periods");
  bt->add_option("--start", f.start, "one-based row of the first forecast target (default T - periods + 1)");
  bt->add_option("--weights", f.weights, "portfolio weights CSV or 'equal'");
  bt->add_option("--truth", f.truth, "truth.json for VaR and Frobenius accuracy");

  auto* cmp = app.add_subcommand("compare", "wrong-minus-true mean KL experiment");
  add_common(cmp, f);
  add_mcmc(cmp, f);
  cmp->add_option("--models", f.models, "data-generating models (odcfmsv,pg)");
  cmp->add_option("--reps", f.reps, "replications per DGP");
  cmp->add_option("--T", f.T, "periods per replication");

  auto* ec = app.add_subcommand("evalcorr", "rolling-window correlations of the factors");
  add_common(ec, f);
  ec->add_option("--factors", f.factors, "factor CSV");
  ec->add_flag("--rescale-percent", f.rescale_percent, "multiply inputs by 0.01");
  ec->add_option("--window", f.window, "half-width r of the window [t - r, t + r]");
  ec->add_option("--checkpoint", f.checkpoint, "fitted checkpoint to compare against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  try {
    const std::string started = utc_now();
    RunConfig rc = resolve(command, f);
    if (command == "evalcorr" && !f.checkpoint) rc.checkpoint.clear();
    fs::create_directories(rc.out_dir);
    int code = kExitOk;
    Json extra = {{"seed", rc.seed}};
    if (command == "simulate") code = cmd_simulate(rc, out);
    else if (command == "fit") code = cmd_fit(rc, out, err);
    else if (command == "predict") code = cmd_predict(rc, out);
    else if (command == "backtest") code = cmd_backtest(rc, out);
    else if (command == "compare") code = cmd_compare(rc, out);
    else if (command == "evalcorr") code = cmd_evalcorr(rc, out);
    write_metadata(rc, started, extra);
    return code;
  } catch (const DataError& e) {
    err << "odcfmsv " << command << ": data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "odcfmsv " << command << ": numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "odcfmsv " << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "odcfmsv " << command << ": " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "odcfmsv " << command << ": " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace odcf
