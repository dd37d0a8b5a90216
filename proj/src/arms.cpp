#include "odcfmsv/arms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "odcfmsv/error.hpp"

namespace odcf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Abscissae outside the target's support are given this drop below the best
// value so the hull stays finite.
constexpr double kFloorDrop = 1e4;

// log of the integral of exp(ya + s (x - a)) over [a, a + w].
double log_piece_mass(double ya, double s, double w) {
  const double sw = s * w;
  if (std::abs(sw) < 1e-10) return ya + std::log(w);
  if (sw > 0.0) return ya + sw + std::log(-std::expm1(-sw) / s);
  return ya + std::log(std::expm1(sw) / s);
}

// Inverse CDF of the truncated exponential piece.
double invert_piece(double a, double b, double s, double u) {
  const double w = b - a;
  const double sw = s * w;
  if (std::abs(sw) < 1e-10) return a + u * w;
  if (s > 0.0) return b + std::log(u + (1.0 - u) * std::exp(-sw)) / s;
  return a + std::log1p(u * std::expm1(sw)) / s;
}

}  // namespace

void ArmsConfig::validate() const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("ArmsConfig: need finite lo < hi");
  if (initial_points < 2) throw DomainError("ArmsConfig: need at least two initial abscissae");
  if (max_points < initial_points) throw DomainError("ArmsConfig: max_points below initial_points");
  if (max_rejections < 1) throw DomainError("ArmsConfig: max_rejections must be positive");
}

ArmsEnvelope::ArmsEnvelope(double lo, double hi, std::vector<double> x, std::vector<double> y)
    : lo_(lo), hi_(hi), x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size() || x_.size() < 2) throw DomainError("ArmsEnvelope: need two or more abscissae");
  rebuild();
}

ArmsEnvelope::Line ArmsEnvelope::chord(std::size_t i) const {
  return {x_[i], y_[i], (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i])};
}

// Interval 0 is [lo, x_0], interval i in 1..n-1 is [x_{i-1}, x_i], interval n is [x_{n-1}, hi].
double ArmsEnvelope::hull_in(std::size_t interval, double z) const {
  const std::size_t n = x_.size();
  if (interval == 0) return chord(0).at(z);
  if (interval == n) return chord(n - 2).at(z);
  const std::size_t i = interval - 1;
  const double c = chord(i).at(z);
  const bool has_left = i >= 1;
  const bool has_right = i + 2 <= n - 1;
  if (has_left && has_right) return std::max(c, std::min(chord(i - 1).at(z), chord(i + 1).at(z)));
  if (has_left) return std::max(c, chord(i - 1).at(z));
  if (has_right) return std::max(c, chord(i + 1).at(z));
  return c;
}

double ArmsEnvelope::log_hull(double z) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), z);
  return hull_in(static_cast<std::size_t>(it - x_.begin()), z);
}

void ArmsEnvelope::rebuild() {
  double top = kNegInf;
  for (double v : y_)
    if (std::isfinite(v)) top = std::max(top, v);
  if (!std::isfinite(top)) throw NumericalError("arms: log density is not finite at any abscissa");
  for (double& v : y_)
    if (!std::isfinite(v)) v = top - kFloorDrop;

  const std::size_t n = x_.size();
  pieces_.clear();
  for (std::size_t interval = 0; interval <= n; ++interval) {
    const double a = interval == 0 ? lo_ : x_[interval - 1];
    const double b = interval == n ? hi_ : x_[interval];
    if (!(b > a)) continue;
    // Candidate kinks: pairwise crossings of the neighbouring chords inside (a, b).
    std::vector<double> cuts{a, b};
    std::vector<Line> lines;
    if (interval > 0 && interval < n) {
      const std::size_t i = interval - 1;
      lines.push_back(chord(i));
      if (i >= 1) lines.push_back(chord(i - 1));
      if (i + 2 <= n - 1) lines.push_back(chord(i + 1));
    }
    for (std::size_t u = 0; u < lines.size(); ++u)
      for (std::size_t v = u + 1; v < lines.size(); ++v) {
        const double ds = lines[u].slope - lines[v].slope;
        if (ds == 0.0) continue;
        const double z = (lines[v].at(0.0) - lines[u].at(0.0)) / ds;
        if (z > a && z < b) cuts.push_back(z);
      }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double pa = cuts[c], pb = cuts[c + 1];
      if (!(pb > pa)) continue;
      const double ya = hull_in(interval, pa);
      const double yb = hull_in(interval, pb);
      const double slope = (yb - ya) / (pb - pa);
      pieces_.push_back({pa, pb, ya, slope, log_piece_mass(ya, slope, pb - pa)});
    }
  }
  double max_mass = kNegInf;
  for (const auto& p : pieces_) max_mass = std::max(max_mass, p.log_mass);
  cum_.resize(pieces_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    total += std::exp(pieces_[i].log_mass - max_mass);
    cum_[i] = total;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("arms: envelope has no finite mass");
  for (double& c : cum_) c /= total;
}

double ArmsEnvelope::sample(Rng& rng) const {
  const double u = rng.uniform();
  std::size_t i = static_cast<std::size_t>(std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  i = std::min(i, pieces_.size() - 1);
  const Piece& p = pieces_[i];
  const double z = invert_piece(p.a, p.b, p.slope, rng.uniform());
  return std::clamp(z, p.a, p.b);
}

bool ArmsEnvelope::insert(double z, double fz) {
  const auto it = std::lower_bound(x_.begin(), x_.end(), z);
  if (it != x_.end() && *it == z) return false;
  const auto pos = it - x_.begin();
  x_.insert(it, z);
  y_.insert(y_.begin() + pos, fz);
  rebuild();
  return true;
}

double arms(const std::function<double(double)>& log_density, const ArmsConfig& config, double current, Rng& rng,
            ArmsStats* stats) {
  config.validate();
  if (!(current > config.lo && current < config.hi))
    throw DomainError("arms: current value " + std::to_string(current) + " outside the support");
  ArmsStats local;
  ArmsStats& st = stats ? *stats : local;
  st.moved = false;

  const auto eval = [&](double z) {
    ++st.evaluations;
    const double v = log_density(z);
    return std::isnan(v) ? kNegInf : v;
  };

  // The envelope must not depend on the current state, so the abscissae are fixed.
  const int n0 = config.initial_points;
  std::vector<double> xs(static_cast<std::size_t>(n0)), ys(static_cast<std::size_t>(n0));
  for (int i = 0; i < n0; ++i) {
    xs[static_cast<std::size_t>(i)] = config.lo + (config.hi - config.lo) * (i + 1) / (n0 + 1);
    ys[static_cast<std::size_t>(i)] = eval(xs[static_cast<std::size_t>(i)]);
  }
  ArmsEnvelope env(config.lo, config.hi, std::move(xs), std::move(ys));

  double proposal = current, f_prop = kNegInf;
  int rejections = 0;
  for (;;) {
    proposal = env.sample(rng);
    if (!(proposal > config.lo && proposal < config.hi)) continue;
    f_prop = eval(proposal);
    const double h = env.log_hull(proposal);
    if (std::log(rng.uniform()) <= f_prop - h) break;
    ++st.rejections;
    if (++rejections >= config.max_rejections)
      throw NumericalError("arms: " + std::to_string(rejections) + " rejections with " +
                           std::to_string(env.size()) + " envelope points on (" + std::to_string(config.lo) +
                           ", " + std::to_string(config.hi) + ")");
    if (static_cast<int>(env.size()) < config.max_points) env.insert(proposal, f_prop);
  }

  // Metropolis correction against the final envelope.
  const double f_cur = eval(current);
  if (!std::isfinite(f_cur)) {
    st.moved = true;
    return proposal;
  }
  const double h_cur = env.log_hull(current);
  const double h_prop = env.log_hull(proposal);
  const double log_ratio = f_prop + std::min(f_cur, h_cur) - f_cur - std::min(f_prop, h_prop);
  if (std::log(rng.uniform()) <= log_ratio) {
    st.moved = true;
    return proposal;
  }
  return current;
}

}  // namespace odcf
