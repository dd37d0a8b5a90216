#pragma once

// Adaptive rejection Metropolis sampling for univariate targets on a bounded
// interval. The envelope is the piecewise-linear secant hull of Gilks, Best
// and Tan (1995); a final Metropolis step corrects for non-log-concavity.

#include <functional>
#include <vector>

#include "odcfmsv/rng.hpp"

namespace odcf {

struct ArmsConfig {
  double lo = 0.0;
  double hi = 1.0;
  int initial_points = 5;
  int max_points = 50;
  int max_rejections = 1000;

  void validate() const;
};

struct ArmsStats {
  long evaluations = 0;
  long rejections = 0;
  bool moved = false;
};

/// Piecewise exp-linear envelope built from abscissae and log-density values.
class ArmsEnvelope {
 public:
  ArmsEnvelope(double lo, double hi, std::vector<double> x, std::vector<double> y);

  /// Log envelope value at z.
  double log_hull(double z) const;
  /// Draw from the normalized envelope.
  double sample(Rng& rng) const;
  /// Adds an abscissa; returns false when z duplicates an existing one.
  bool insert(double z, double fz);
  std::size_t size() const { return x_.size(); }

 private:
  struct Line {
    double x0, y0, slope;
    double at(double z) const { return y0 + slope * (z - x0); }
  };
  struct Piece {
    double a, b, ya, slope, log_mass;
  };

  Line chord(std::size_t i) const;
  double hull_in(std::size_t interval, double z) const;
  void rebuild();

  double lo_, hi_;
  std::vector<double> x_, y_;
  std::vector<Piece> pieces_;
  std::vector<double> cum_;  // normalized cumulative masses
};

/// One ARMS transition from `current`. Throws NumericalError after
/// `max_rejections` consecutive envelope rejections.
double arms(const std::function<double(double)>& log_density, const ArmsConfig& config, double current, Rng& rng,
            ArmsStats* stats = nullptr);

}  // namespace odcf
