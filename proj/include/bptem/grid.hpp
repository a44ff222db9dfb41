#pragma once

#include <bptem/errors.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bptem {

// Uniform sampling grid t_i = t_start + i*dt, i = 0..n-1.
// Spectral operations treat it as one period of length n*dt.
struct TimeGrid {
  double t_start = 0.0;
  double dt = 1.0;
  std::size_t n = 2;

  TimeGrid() = default;
  TimeGrid(double t0, double step, std::size_t count) : t_start(t0), dt(step), n(count) {
    if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t_start))
      throw ParameterError("TimeGrid: dt must be positive and finite");
    if (n < 2) throw ParameterError("TimeGrid: need at least 2 samples");
  }

  double time(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
  double t_last() const { return time(n - 1); }
  double period() const { return static_cast<double>(n) * dt; }
  double sample_rate() const { return 1.0 / dt; }
  double nyquist() const { return 0.5 / dt; }

  // Signed frequency of DFT bin k.
  double bin_frequency(std::size_t k) const {
    auto kk = static_cast<long long>(k);
    auto nn = static_cast<long long>(n);
    if (2 * kk > nn) kk -= nn;
    return static_cast<double>(kk) / period();
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

// Smallest m >= n whose only prime factors are 2, 3, 5, 7.
inline std::size_t next_smooth_length(std::size_t n) {
  if (n < 2) return 2;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// Grid covering [t_start, t_end) with sample rate at least min_rate.
inline TimeGrid make_grid(double t_start, double t_end, double min_rate) {
  if (!(t_end > t_start)) throw ParameterError("make_grid: empty window");
  if (!(min_rate > 0.0) || !std::isfinite(min_rate))
    throw ParameterError("make_grid: sample rate must be positive");
  double span = t_end - t_start;
  auto n = next_smooth_length(static_cast<std::size_t>(std::ceil(span * min_rate)));
  return TimeGrid(t_start, span / static_cast<double>(n), n);
}

// Center frequency and two-sided bandwidth of a bandpass signal. The lower
// edge may touch 0 Hz (f0 = b_bp/2), which the frequency sweep starts from.
struct BandSpec {
  double f0 = 0.0;
  double b_bp = 0.0;

  BandSpec() = default;
  BandSpec(double center, double bandwidth) : f0(center), b_bp(bandwidth) {
    if (!(b_bp > 0.0) || !(f0 >= 0.5 * b_bp) || !std::isfinite(f0) || !std::isfinite(b_bp))
      throw ParameterError("BandSpec: need f0 >= b_bp/2 > 0");
  }
  double lower() const { return f0 - 0.5 * b_bp; }
  double upper() const { return f0 + 0.5 * b_bp; }
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* who) {
  if (!(a == b)) throw ShapeError(std::string(who) + ": grid mismatch");
}

namespace detail {
inline void require_finite(std::span<const double> v, std::size_t n, const char* who) {
  if (v.size() != n)
    throw ShapeError(std::string(who) + ": expected " + std::to_string(n) + " values, got " +
                     std::to_string(v.size()));
  for (double x : v)
    if (!std::isfinite(x)) throw ParameterError(std::string(who) + ": non-finite value");
}
} // namespace detail

class Signal {
public:
  Signal(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    detail::require_finite(values_, grid_.n, "Signal");
  }
  static Signal zeros(const TimeGrid& g) { return Signal(g, std::vector<double>(g.n, 0.0)); }

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

private:
  TimeGrid grid_;
  std::vector<double> values_;
};

// In-phase and quadrature components on a shared grid.
class IQPair {
public:
  IQPair(TimeGrid grid, std::vector<double> xi, std::vector<double> xq)
      : grid_(grid), xi_(std::move(xi)), xq_(std::move(xq)) {
    detail::require_finite(xi_, grid_.n, "IQPair.xi");
    detail::require_finite(xq_, grid_.n, "IQPair.xq");
  }
  static IQPair zeros(const TimeGrid& g) {
    return IQPair(g, std::vector<double>(g.n, 0.0), std::vector<double>(g.n, 0.0));
  }

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> xi() const { return xi_; }
  std::span<const double> xq() const { return xq_; }
  Signal in_phase() const { return Signal(grid_, xi_); }
  Signal quadrature() const { return Signal(grid_, xq_); }

private:
  TimeGrid grid_;
  std::vector<double> xi_;
  std::vector<double> xq_;
};

} // namespace bptem
