#pragma once

#include <bptem/grid.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

// Integrate-and-fire time encoding machine.
namespace bptem {

struct TemParams {
  double kappa = 1.0;
  double delta = 1.0 / 120.0;
  double b = 3.0;
  double c = 2.0;

  void check() const {
    if (!(kappa > 0.0 && std::isfinite(kappa))) throw ParameterError("TemParams: kappa must be > 0");
    if (!(delta > 0.0 && std::isfinite(delta))) throw ParameterError("TemParams: delta must be > 0");
    if (!(c >= 0.0 && std::isfinite(c))) throw ParameterError("TemParams: c must be >= 0");
    if (!(b > c && std::isfinite(b))) throw ParameterError("TemParams: bias b must exceed c");
  }
  double threshold() const { return 2.0 * kappa * delta; }
};

struct RateBounds {
  double min_rate;
  double max_rate;
};

struct IntervalBounds {
  double min_interval;
  double max_interval;
};

inline RateBounds firing_rate_bounds(const TemParams& p) {
  p.check();
  return {(p.b - p.c) / p.threshold(), (p.b + p.c) / p.threshold()};
}

inline IntervalBounds interval_bounds(const TemParams& p) {
  p.check();
  return {p.threshold() / (p.b + p.c), p.threshold() / (p.b - p.c)};
}

struct ValidationReport {
  bool accepted = false;
  double delta_max = 0.0;  // largest threshold meeting the rate condition (0 if b <= c)
  std::string failed;      // empty when accepted
};

// Unique-recovery condition: b > c and 2 B_BP <= (b - c)/(2 kappa delta).
inline ValidationReport validate_params(const TemParams& p, const BandSpec& band) {
  ValidationReport r;
  if (!(p.kappa > 0.0) || !(p.delta > 0.0) || !(p.c >= 0.0)) {
    r.failed = "kappa > 0, delta > 0, c >= 0";
    return r;
  }
  if (!(p.b > p.c)) {
    r.failed = "b > c";
    return r;
  }
  r.delta_max = (p.b - p.c) / (4.0 * p.kappa * band.b_bp);
  const double rate = (p.b - p.c) / p.threshold();
  if (2.0 * band.b_bp <= rate * (1.0 + 1e-12)) {
    r.accepted = true;
  } else {
    r.failed = "2*B_BP <= (b-c)/(2*kappa*delta)";
  }
  return r;
}

inline std::string describe(const ValidationReport& r) {
  if (r.accepted) return "accepted";
  std::string s = "rejected: " + r.failed + " fails";
  if (r.delta_max > 0.0) s += "; delta_max = " + std::to_string(r.delta_max);
  return s;
}

class FiringSequence {
public:
  FiringSequence(std::vector<double> times, TemParams params, double t_start, double t_end)
      : times_(std::move(times)), params_(params), t_start_(t_start), t_end_(t_end) {
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (!std::isfinite(times_[k])) throw ParameterError("FiringSequence: non-finite time");
      if (k > 0 && !(times_[k] > times_[k - 1]))
        throw ParameterError("FiringSequence: times must be strictly increasing");
    }
  }

  std::span<const double> times() const { return times_; }
  const TemParams& params() const { return params_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  std::size_t size() const { return times_.size(); }
  std::size_t intervals() const { return times_.empty() ? 0 : times_.size() - 1; }

private:
  std::vector<double> times_;
  TemParams params_;
  double t_start_;
  double t_end_;
};

struct MeasurementSequence {
  std::vector<double> y;
  std::size_t size() const { return y.size(); }
};

// Fire whenever (1/kappa) * integral of (s + b) since the last firing reaches 2 delta.
// The integrand is linear between grid points, and each crossing is found exactly
// from the quadratic in-step integral.
inline FiringSequence encode(const Signal& s, const TemParams& p) {
  p.check();
  const auto& g = s.grid();
  for (double v : s.values())
    if (std::abs(v) > p.c)
      throw AmplitudeError("encode: |s| = " + std::to_string(std::abs(v)) + " exceeds c = " +
                           std::to_string(p.c));

  const double target = 2.0 * p.delta;
  const double dt = g.dt;
  std::vector<double> times;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.n; ++i) {
    const double f0 = (s[i] + p.b) / p.kappa;
    const double f1 = (s[i + 1] + p.b) / p.kappa;
    const double slope = (f1 - f0) / dt;
    double u = 0.0;
    for (;;) {
      const double a = f0 + slope * u;
      const double len = dt - u;
      const double step = a * len + 0.5 * slope * len * len;
      const double r = target - acc;
      if (step < r) {
        acc += step;
        break;
      }
      const double disc = std::max(0.0, a * a + 2.0 * slope * r);
      u += std::min(len, 2.0 * r / (a + std::sqrt(disc)));
      times.push_back(g.time(i) + u);
      acc = 0.0;
    }
  }
  return FiringSequence(std::move(times), p, g.t_start, g.t_last());
}

// y_k = 2 kappa delta - b (t_{k+1} - t_k).
inline MeasurementSequence measurements(const FiringSequence& f) {
  if (f.size() < 2) throw InsufficientDataError("measurements: need at least 2 firings");
  const auto& p = f.params();
  auto t = f.times();
  MeasurementSequence m;
  m.y.resize(t.size() - 1);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) m.y[k] = p.threshold() - p.b * (t[k + 1] - t[k]);
  return m;
}

// Width of the timing quantization cell for an n_bits quantizer:
// (max - min interval) / 2^n_bits, with max - min = 2 kappa delta * 2c / (b^2 - c^2).
inline double quantization_step(const TemParams& p, int n_bits) {
  p.check();
  return std::ldexp(p.threshold() * (2.0 * p.c / ((p.b - p.c) * (p.b + p.c))), -n_bits);
}

// t_k + n_k with n_k uniform on [-step/2, step/2]. A pair that collides is
// pushed apart by one ulp; `collisions` (optional) receives the count.
inline FiringSequence quantize_times(const FiringSequence& f, int n_bits, std::uint64_t seed,
                                     std::size_t* collisions = nullptr) {
  if (n_bits < 1) throw ParameterError("quantize_times: n_bits must be >= 1");
  const double step = quantization_step(f.params(), n_bits);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5 * step, 0.5 * step);
  std::vector<double> t(f.times().begin(), f.times().end());
  for (auto& v : t) v += unif(rng);
  std::size_t fixes = 0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1])) {
      t[k] = std::nextafter(t[k - 1], std::numeric_limits<double>::infinity());
      ++fixes;
    }
    if (!std::isfinite(t[k]) || !(t[k] > t[k - 1]))
      throw DegenerateQuantizationError("quantize_times: could not restore increasing times");
  }
  if (collisions) *collisions = fixes;
  return FiringSequence(std::move(t), f.params(), f.t_start(), f.t_end());
}

} // namespace bptem
