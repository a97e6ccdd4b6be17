#ifndef CARNOT_METRIC_HPP
#define CARNOT_METRIC_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/bch.hpp"
#include "carnot/rng.hpp"

namespace carnot {

enum class LayerNorm { euclidean, max };

// Homogeneous quasi-distance ||x|| = sum_i |x_i|^{1/i}, d(g,h) = ||(-g)*h||.
// Group operations stay exact rational throughout; floating point enters only
// in the final norm evaluation.
class HomogeneousMetric {
 public:
  explicit HomogeneousMetric(const BchEngine& engine, LayerNorm layer_norm = LayerNorm::euclidean)
      : engine_(&engine), layer_norm_(layer_norm) {}

  const CarnotAlgebra& algebra() const { return engine_->algebra(); }
  const BchEngine& engine() const { return *engine_; }

  // Exactly zero iff x = 0; each per-layer norm is even, so ||-x|| == ||x||
  // bit for bit.
  double norm(const Vec& x) const {
    const CarnotAlgebra& a = algebra();
    a.check_dim(x);
    double total = 0.0;
    for (std::size_t l = 1; l <= a.step(); ++l) {
      double ln;
      if (layer_norm_ == LayerNorm::euclidean) {
        Rat sumsq(0);
        for (std::size_t i = a.layer_begin(l); i < a.layer_end(l); ++i) sumsq += x[i] * x[i];
        ln = std::sqrt(to_double(sumsq));
      } else {
        Rat best(0);
        for (std::size_t i = a.layer_begin(l); i < a.layer_end(l); ++i) {
          Rat v = abs(x[i]);
          if (v > best) best = v;
        }
        ln = to_double(best);
      }
      total += (l == 1) ? ln : std::pow(ln, 1.0 / static_cast<double>(l));
    }
    return total;
  }

  double distance(const Vec& x, const Vec& y) const { return norm(engine_->product(group_inverse(x), y)); }

  // The exact counterpart of distance(x,y) == 0.
  bool coincide(const Vec& x, const Vec& y) const {
    return vec_is_zero(engine_->product(group_inverse(x), y));
  }

  // |d(l_t x, l_t y) - t d(x,y)| <= tol * t * d(x,y), for rational t > 0.
  bool verify_homogeneity(const Rat& t, const Vec& x, const Vec& y, double tol = 1e-9) const {
    if (sgn(t) <= 0) throw DomainError("homogeneity check needs t > 0");
    const CarnotAlgebra& a = algebra();
    double base = distance(x, y);
    double scaled = distance(a.dilate(t, x), a.dilate(t, y));
    double target = to_double(t) * base;
    return std::fabs(scaled - target) <= tol * (target == 0.0 ? 1.0 : std::fabs(target));
  }

  // Points xi with ||xi|| <= radius by layer-wise rejection sampling on a
  // dyadic grid, then x = center * xi. Deterministic per (seed, index).
  std::vector<Vec> ball_sample(const Vec& center, const Rat& radius, std::size_t count,
                               std::uint64_t seed) const {
    const CarnotAlgebra& a = algebra();
    a.check_dim(center);
    if (sgn(radius) <= 0) throw DomainError("ball radius must be positive");
    std::vector<Vec> out(count, a.zero());
    bool centered = vec_is_zero(center);
    parallel_for(count, [&](std::size_t k) {
      SplitMix64 rng = substream(seed, 0x5a0a11ce, k);
      Vec xi = sample_in_ball(radius, rng);
      out[k] = centered ? xi : engine_->product(center, xi);
    });
    return out;
  }

  // max over sampled triples of d(x,z) / (d(x,y) + d(y,z)). An empirical
  // lower bound for the quasi-triangle constant; 1 for a true metric.
  double quasi_triangle_estimate(std::size_t n_samples, const Rat& radius, std::uint64_t seed) const {
    if (n_samples < 1) throw DomainError("need at least one sample");
    std::vector<double> ratios(n_samples, 0.0);
    parallel_for(n_samples, [&](std::size_t k) {
      SplitMix64 rng = substream(seed, 0x7219a7e5, k);
      Vec x = sample_in_ball(radius, rng);
      Vec y = sample_in_ball(radius, rng);
      Vec z = sample_in_ball(radius, rng);
      double den = distance(x, y) + distance(y, z);
      if (den > 0.0) ratios[k] = distance(x, z) / den;
    });
    double best = 0.0;
    for (double r : ratios) best = std::max(best, r);
    return best;
  }

  // One point with homogeneous norm <= radius. A radial factor and random
  // layer budgets summing to the radius are drawn first, then each layer is
  // sampled uniformly in the box its budget allows; coordinates snap to a
  // dyadic grid toward zero, which preserves the bound. Plain rejection in
  // the ball is hopeless at high step (the acceptance rate decays like a
  // high power of the step), so the budgets do the work and the final norm
  // check only guards against float rounding.
  Vec sample_in_ball(const Rat& radius, SplitMix64& rng) const {
    const CarnotAlgebra& a = algebra();
    const double rad = to_double(radius);
    constexpr double grid = 1048576.0;  // 2^20
    while (true) {
      std::vector<double> g(a.step());
      double total = 0.0;
      for (double& gl : g) {
        gl = rng.next_double() + 1e-3;
        total += gl;
      }
      double rho = rng.next_double();
      Vec v = a.zero();
      for (std::size_t l = 1; l <= a.step(); ++l) {
        double budget = rho * rad * g[l - 1] / total;
        std::size_t dl = a.layer_dims()[l - 1];
        double box = std::pow(budget, static_cast<double>(l)) / std::sqrt(static_cast<double>(dl));
        for (std::size_t i = a.layer_begin(l); i < a.layer_end(l); ++i) {
          double c = box * rng.next_symmetric();
          v[i] = frac(static_cast<long>(c * grid), static_cast<long>(grid));
        }
      }
      if (norm(v) <= rad) return v;
    }
  }

 private:
  const BchEngine* engine_;
  LayerNorm layer_norm_;
};

}  // namespace carnot

#endif
