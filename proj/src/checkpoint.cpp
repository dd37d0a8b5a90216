#include "odcfmsv/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "odcfmsv/error.hpp"

namespace odcf {

namespace {

constexpr int kFormatVersion = 1;

std::uint64_t hash_matrix(const MatrixXd& m, std::uint64_t seed) {
  const std::string shape = std::to_string(m.rows()) + "x" + std::to_string(m.cols());
  seed = fnv1a(shape, seed);
  return fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()), sizeof(double) * static_cast<std::size_t>(m.size())),
               seed);
}

Json sv_params_to_json(const SvParams& s) {
  return {{"mu", vector_to_json(s.mu)}, {"phi", vector_to_json(s.phi)}, {"sigma_eta_sq", vector_to_json(s.sigma_eta_sq)}};
}

SvParams sv_params_from_json(const Json& j) {
  return {vector_from_json(j.at("mu")), vector_from_json(j.at("phi")), vector_from_json(j.at("sigma_eta_sq"))};
}

Json adapter_to_json(const RwAdapter& a) {
  return {{"proposal_cov", matrix_to_json(a.proposal_cov)},
          {"running_mean", vector_to_json(a.running_mean)},
          {"running_m2", matrix_to_json(a.running_m2)},
          {"count", a.count},
          {"proposed", a.proposed},
          {"accepted", a.accepted}};
}

RwAdapter adapter_from_json(const Json& j) {
  RwAdapter a;
  a.proposal_cov = matrix_from_json(j.at("proposal_cov"));
  a.running_mean = vector_from_json(j.at("running_mean"));
  a.running_m2 = matrix_from_json(j.at("running_m2"));
  a.count = j.at("count").get<long>();
  a.proposed = j.at("proposed").get<long>();
  a.accepted = j.at("accepted").get<long>();
  return a;
}

Json block_to_json(const SvBlockState& b) {
  std::vector<int> s(b.s.data(), b.s.data() + b.s.size());
  return {{"mu", b.params.mu},      {"phi", b.params.phi}, {"sigma_eta_sq", b.params.sigma_eta_sq},
          {"h", vector_to_json(b.h)}, {"s", s},              {"adapter", adapter_to_json(b.adapter)}};
}

SvBlockState block_from_json(const Json& j) {
  SvBlockState b;
  b.params = {j.at("mu").get<double>(), j.at("phi").get<double>(), j.at("sigma_eta_sq").get<double>()};
  b.h = vector_from_json(j.at("h"));
  const auto s = j.at("s").get<std::vector<int>>();
  b.s = Eigen::Map<const VectorXi>(s.data(), static_cast<Index>(s.size()));
  b.adapter = adapter_from_json(j.at("adapter"));
  return b;
}

Json matrices_to_json(const std::vector<MatrixXd>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<MatrixXd> matrices_from_json(const Json& j) {
  std::vector<MatrixXd> out;
  out.reserve(j.size());
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t chain_config_hash(const FactorDataset& data, const PriorConfig& priors, const McmcConfig& config) {
  McmcConfig c = config;
  c.kept = 0;
  std::uint64_t h = fnv1a(to_json(priors).dump());
  h = fnv1a(to_json(c).dump(), h);
  h = hash_matrix(data.Y, h);
  return hash_matrix(data.F, h);
}

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

MatrixXd matrix_from_json(const Json& j) {
  const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (static_cast<Index>(data.size()) != r) throw DataError("matrix record: row count mismatch");
  MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i) {
    const Json& row = data[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != c) throw DataError("matrix record: column count mismatch");
    for (Index k = 0; k < c; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json vector_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from_json(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

Json to_json(const PriorConfig& p) {
  return {{"nu0", p.nu0},         {"s0", p.s0},
          {"mu_mean", p.mu_mean}, {"mu_var", p.mu_var},
          {"sigma_eta_shape", p.sigma_eta_shape}, {"sigma_eta_scale", p.sigma_eta_scale},
          {"phi_a", p.phi_a},     {"phi_b", p.phi_b},
          {"A_df", p.A_df},       {"A_scale", p.A_scale},
          {"lambda0", p.lambda0}, {"c0", p.c0}};
}

PriorConfig priors_from_json(const Json& j) {
  PriorConfig p;
  auto get = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  get("nu0", p.nu0);
  get("s0", p.s0);
  get("mu_mean", p.mu_mean);
  get("mu_var", p.mu_var);
  get("sigma_eta_shape", p.sigma_eta_shape);
  get("sigma_eta_scale", p.sigma_eta_scale);
  get("phi_a", p.phi_a);
  get("phi_b", p.phi_b);
  get("A_df", p.A_df);
  get("A_scale", p.A_scale);
  get("lambda0", p.lambda0);
  get("c0", p.c0);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!to_json(PriorConfig{}).contains(it.key())) throw DomainError("unknown prior setting '" + it.key() + "'");
  p.validate();
  return p;
}

Json to_json(const McmcConfig& c) {
  return {{"burn_in", c.burn_in},
          {"kept", c.kept},
          {"thin", c.thin},
          {"seed", c.seed},
          {"variant", std::string(to_string(c.variant))},
          {"offset", c.offset},
          {"adapt", c.adapt},
          {"track_log_joint", c.track_log_joint},
          {"noncentered_d", c.noncentered_d},
          {"portfolio_weights", vector_to_json(c.portfolio_weights)}};
}

McmcConfig mcmc_from_json(const Json& j) {
  McmcConfig c;
  c.burn_in = j.at("burn_in").get<long>();
  c.kept = j.at("kept").get<long>();
  c.thin = j.at("thin").get<long>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.offset = j.at("offset").get<double>();
  c.adapt = j.at("adapt").get<bool>();
  c.track_log_joint = j.at("track_log_joint").get<bool>();
  c.noncentered_d = j.at("noncentered_d").get<bool>();
  c.portfolio_weights = vector_from_json(j.at("portfolio_weights"));
  c.validate();
  return c;
}

Json to_json(const ModelParams& p) {
  return {{"B", matrix_to_json(p.meas.B)},
          {"omega", vector_to_json(p.meas.omega)},
          {"factor_sv", sv_params_to_json(p.factor_sv)},
          {"error_sv", sv_params_to_json(p.error_sv)},
          {"A", matrix_to_json(p.corr.A.matrix())},
          {"d", p.corr.d},
          {"k", p.corr.k}};
}

ModelParams params_from_json(const Json& j) {
  ModelParams p;
  p.meas.B = matrix_from_json(j.at("B"));
  p.meas.omega = vector_from_json(j.at("omega"));
  p.factor_sv = sv_params_from_json(j.at("factor_sv"));
  p.error_sv = sv_params_from_json(j.at("error_sv"));
  p.corr.A = SpdMatrix<double>(matrix_from_json(j.at("A")));
  p.corr.d = j.at("d").get<double>();
  p.corr.k = j.at("k").get<double>();
  return p;
}

Json to_json(const LatentState& l) {
  return {{"H", matrix_to_json(l.H)}, {"P", matrices_to_json(l.P)}, {"He", matrix_to_json(l.He)}};
}

LatentState latents_from_json(const Json& j) {
  return {matrix_from_json(j.at("H")), matrices_from_json(j.at("P")), matrix_from_json(j.at("He"))};
}

Json to_json(const ChainState& s) {
  Json factor = Json::array(), error = Json::array();
  for (const auto& b : s.factor_blocks) factor.push_back(block_to_json(b));
  for (const auto& b : s.error_blocks) error.push_back(block_to_json(b));
  return {{"params", to_json(s.params)},
          {"latents", to_json(s.latents)},
          {"factor_blocks", std::move(factor)},
          {"error_blocks", std::move(error)},
          {"d_move",
           {{"log_step", s.d_move.log_step}, {"proposed", s.d_move.proposed}, {"accepted", s.d_move.accepted}}}};
}

ChainState chain_state_from_json(const Json& j) {
  ChainState s;
  s.params = params_from_json(j.at("params"));
  s.latents = latents_from_json(j.at("latents"));
  for (const auto& b : j.at("factor_blocks")) s.factor_blocks.push_back(block_from_json(b));
  for (const auto& b : j.at("error_blocks")) s.error_blocks.push_back(block_from_json(b));
  const Json& dm = j.at("d_move");
  s.d_move.log_step = dm.at("log_step").get<double>();
  s.d_move.proposed = dm.at("proposed").get<long>();
  s.d_move.accepted = dm.at("accepted").get<long>();
  return s;
}

Json to_json(const ChainDraws& d) {
  Json draws = Json::array();
  for (const auto& r : d.draws)
    draws.push_back({{"params", to_json(r.params)},
                     {"h", vector_to_json(r.tail.h)},
                     {"P", matrix_to_json(r.tail.P)},
                     {"he", vector_to_json(r.tail.he)},
                     {"log_joint", r.log_joint}});
  const auto& g = d.diagnostics;
  return {{"variant", std::string(to_string(d.variant))},
          {"draws", std::move(draws)},
          {"corr_sum", matrices_to_json(d.corr_sum)},
          {"return_cov_sum", matrices_to_json(d.return_cov_sum)},
          {"h_sum", matrix_to_json(d.h_sum)},
          {"he_sum", matrix_to_json(d.he_sum)},
          {"portfolio_weights", vector_to_json(d.portfolio_weights)},
          {"portfolio_sd_sum", vector_to_json(d.portfolio_sd_sum)},
          {"diagnostics",
           {{"pt_proposed", g.pt.proposed},
            {"pt_accepted", g.pt.accepted},
            {"pt_failed", g.pt.failed},
            {"arms_d_evaluations", g.arms_d_evaluations},
            {"arms_k_evaluations", g.arms_k_evaluations},
            {"arms_d_moves", g.arms_d_moves},
            {"arms_k_moves", g.arms_k_moves},
            {"arms_calls", g.arms_calls},
            {"d_move_proposed", g.d_move_proposed},
            {"d_move_accepted", g.d_move_accepted}}}};
}

ChainDraws chain_draws_from_json(const Json& j) {
  ChainDraws d;
  d.variant = parse_variant(j.at("variant").get<std::string>());
  for (const auto& r : j.at("draws")) {
    DrawRecord rec;
    rec.params = params_from_json(r.at("params"));
    rec.tail.h = vector_from_json(r.at("h"));
    rec.tail.P = matrix_from_json(r.at("P"));
    rec.tail.he = vector_from_json(r.at("he"));
    rec.log_joint = r.at("log_joint").get<double>();
    d.draws.push_back(std::move(rec));
  }
  d.corr_sum = matrices_from_json(j.at("corr_sum"));
  d.return_cov_sum = matrices_from_json(j.at("return_cov_sum"));
  d.h_sum = matrix_from_json(j.at("h_sum"));
  d.he_sum = matrix_from_json(j.at("he_sum"));
  d.portfolio_weights = vector_from_json(j.at("portfolio_weights"));
  d.portfolio_sd_sum = vector_from_json(j.at("portfolio_sd_sum"));
  const Json& g = j.at("diagnostics");
  d.diagnostics.pt.proposed = g.at("pt_proposed").get<long>();
  d.diagnostics.pt.accepted = g.at("pt_accepted").get<long>();
  d.diagnostics.pt.failed = g.at("pt_failed").get<long>();
  d.diagnostics.arms_d_evaluations = g.at("arms_d_evaluations").get<long>();
  d.diagnostics.arms_k_evaluations = g.at("arms_k_evaluations").get<long>();
  d.diagnostics.arms_d_moves = g.at("arms_d_moves").get<long>();
  d.diagnostics.arms_k_moves = g.at("arms_k_moves").get<long>();
  d.diagnostics.arms_calls = g.at("arms_calls").get<long>();
  d.diagnostics.d_move_proposed = g.at("d_move_proposed").get<long>();
  d.diagnostics.d_move_accepted = g.at("d_move_accepted").get<long>();
  return d;
}

Checkpoint capture(const GibbsSampler& sampler) {
  Checkpoint c;
  c.config_hash = chain_config_hash(sampler.data(), sampler.priors(), sampler.config());
  c.sweeps_done = sampler.sweeps_done();
  c.rng_state = sampler.rng().state();
  c.config = sampler.config();
  c.priors = sampler.priors();
  c.T = sampler.data().T();
  c.p = sampler.data().p();
  c.q = sampler.data().q();
  c.state = sampler.state();
  c.draws = sampler.draws();
  return c;
}

void restore(GibbsSampler& sampler, const Checkpoint& ckpt) {
  const std::uint64_t h = chain_config_hash(sampler.data(), sampler.priors(), sampler.config());
  if (h != ckpt.config_hash)
    throw DataError("checkpoint configuration hash " + hex64(ckpt.config_hash) + " does not match the run (" +
                    hex64(h) + ")");
  if (ckpt.sweeps_done > sampler.total_sweeps())
    throw DataError("checkpoint has more sweeps than the run requests");
  sampler.mutable_state() = ckpt.state;
  sampler.mutable_draws() = ckpt.draws;
  sampler.rng().set_state(ckpt.rng_state);
  sampler.set_sweeps_done(ckpt.sweeps_done);
}

Json to_json(const Checkpoint& c) {
  return {{"format", "odcfmsv-checkpoint"},
          {"version", kFormatVersion},
          {"config_hash", hex64(c.config_hash)},
          {"sweeps_done", c.sweeps_done},
          {"rng_state", c.rng_state},
          {"mcmc", to_json(c.config)},
          {"priors", to_json(c.priors)},
          {"shape", {{"T", c.T}, {"p", c.p}, {"q", c.q}}},
          {"state", to_json(c.state)},
          {"draws", to_json(c.draws)}};
}

Checkpoint checkpoint_from_json(const Json& j) {
  if (j.value("format", std::string()) != "odcfmsv-checkpoint") throw DataError("not a chain checkpoint");
  if (j.at("version").get<int>() != kFormatVersion) throw DataError("unsupported checkpoint version");
  Checkpoint c;
  c.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  c.sweeps_done = j.at("sweeps_done").get<long>();
  c.rng_state = j.at("rng_state").get<std::string>();
  c.config = mcmc_from_json(j.at("mcmc"));
  c.priors = priors_from_json(j.at("priors"));
  c.T = j.at("shape").at("T").get<Index>();
  c.p = j.at("shape").at("p").get<Index>();
  c.q = j.at("shape").at("q").get<Index>();
  c.state = chain_state_from_json(j.at("state"));
  c.draws = chain_draws_from_json(j.at("draws"));
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + tmp + "'");
    out << to_json(c).dump() << '\n';
    if (!out) throw DataError("failed writing checkpoint '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  try {
    return checkpoint_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw DataError("malformed checkpoint '" + path + "': " + e.what());
  } catch (const DomainError& e) {
    throw DataError("invalid checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace odcf
