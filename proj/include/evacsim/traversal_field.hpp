#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "evacsim/errors.hpp"
#include "evacsim/nav_graph.hpp"
#include "evacsim/rng.hpp"

namespace evacsim {

struct SegmentTimes {
  double t_worst = 0.0;    // length / v_worst
  double t_nominal = 0.0;  // length / v_nominal
  double t_typical = 0.0;  // current value, in [t_nominal, t_worst]
};

/// Immutable copy of all typical times at one epoch, indexed by edge id.
struct FieldSnapshot {
  std::int64_t epoch = 0;
  std::vector<double> t_typical;
};

/// Per-segment typical traversal time as a piecewise-constant stochastic
/// process bounded by [t_nominal, t_worst], advanced by resample() once per
/// change interval. The field owns a dedicated RNG stream so decision draws
/// elsewhere never perturb the realization.
///
/// Epoch-to-epoch dependence is configurable through `correlation`: each
/// edge keeps a latent uniform u that is redrawn through a Gaussian copula
/// with autocorrelation `correlation`, preserving the uniform marginal on
/// [t_nominal, t_worst] exactly. correlation = 0 short-circuits to a fresh
/// independent uniform per edge per epoch.
class TraversalTimeField {
 public:
  TraversalTimeField(const NavGraph& g, double v_worst, double v_nominal,
                     std::uint64_t stream_seed, double correlation = 0.0,
                     bool static_values = false)
      : rng_(stream_seed), correlation_(correlation), static_(static_values) {
    if (!(v_worst > 0.0) || !(v_nominal > 0.0)) throw ConfigError("speeds must be positive");
    if (v_worst > v_nominal) throw ConfigError("v_worst must not exceed v_nominal");
    if (!(correlation >= 0.0) || correlation >= 1.0)
      throw ConfigError("field correlation must lie in [0, 1)");
    segments_.resize(g.edge_count());
    latent_.resize(g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e) {
      SegmentTimes& s = segments_[e];
      s.t_worst = g.edge(e).length / v_worst;
      s.t_nominal = g.edge(e).length / v_nominal;
      double u = rng_.uniform01();
      latent_[e] = u;
      s.t_typical = s.t_nominal + u * (s.t_worst - s.t_nominal);
    }
  }

  std::int64_t epoch() const { return epoch_; }
  int edge_count() const { return static_cast<int>(segments_.size()); }
  const SegmentTimes& segment(int edge) const { return segments_.at(edge); }
  double t_typical(int edge) const { return segments_.at(edge).t_typical; }
  bool is_static() const { return static_; }

  /// Advances the epoch; redraws every edge unless the field is static.
  void resample() {
    ++epoch_;
    if (static_) return;
    for (std::size_t e = 0; e < segments_.size(); ++e) {
      double draw = rng_.uniform01();
      double u;
      if (correlation_ == 0.0) {
        u = draw;
      } else {
        double z_prev = normal_quantile(clamp_unit(latent_[e]));
        double z_new = normal_quantile(clamp_unit(draw));
        double z = correlation_ * z_prev +
                   std::sqrt(1.0 - correlation_ * correlation_) * z_new;
        u = clamp_unit(normal_cdf(z));
      }
      latent_[e] = u;
      SegmentTimes& s = segments_[e];
      s.t_typical = s.t_nominal + u * (s.t_worst - s.t_nominal);
    }
  }

  FieldSnapshot freeze_snapshot() const {
    FieldSnapshot snap;
    snap.epoch = epoch_;
    snap.t_typical.reserve(segments_.size());
    for (const SegmentTimes& s : segments_) snap.t_typical.push_back(s.t_typical);
    return snap;
  }

 private:
  static double clamp_unit(double u) {
    constexpr double eps = 1e-12;
    if (u < eps) return eps;
    if (u > 1.0 - eps) return 1.0 - eps;
    return u;
  }

  Rng rng_;
  double correlation_;
  bool static_;
  std::int64_t epoch_ = 0;
  std::vector<SegmentTimes> segments_;
  std::vector<double> latent_;
};

}  // namespace evacsim
