#pragma once

#include <bptem/filters.hpp>
#include <bptem/intervals.hpp>
#include <bptem/tem.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

// Lowpass POCS decoder for a plain (bandlimited) TEM.
namespace bptem {

struct IterConfig {
  int max_iter = 500;
  double rel_tol = 1e-9;
  bool record_trajectory = false;

  void check() const {
    if (max_iter < 1) throw ParameterError("IterConfig: max_iter must be >= 1");
    if (!(rel_tol > 0.0)) throw ParameterError("IterConfig: rel_tol must be > 0");
  }
};

// Value y_k/(t_{k+1} - t_k) on [t_k, t_{k+1}), zero outside.
class PiecewiseConstant {
public:
  PiecewiseConstant(std::vector<double> breakpoints, std::vector<double> values)
      : bp_(std::move(breakpoints)), v_(std::move(values)) {
    if (bp_.empty() ? !v_.empty() : v_.size() != bp_.size() - 1)
      throw ShapeError("PiecewiseConstant: need one value per interval");
  }
  std::span<const double> breakpoints() const { return bp_; }
  std::span<const double> values() const { return v_; }

  double operator()(double t) const {
    if (bp_.size() < 2 || t < bp_.front() || t >= bp_.back()) return 0.0;
    auto it = std::upper_bound(bp_.begin(), bp_.end(), t);
    return v_[static_cast<std::size_t>(it - bp_.begin()) - 1];
  }

  Signal sample(const TimeGrid& g) const {
    std::vector<double> x(g.n);
    for (std::size_t i = 0; i < g.n; ++i) x[i] = (*this)(g.time(i));
    return Signal(g, std::move(x));
  }

private:
  std::vector<double> bp_;
  std::vector<double> v_;
};

inline PiecewiseConstant pcw_approx(const FiringSequence& f, const MeasurementSequence& y) {
  if (y.size() != f.intervals()) throw ShapeError("pcw_approx: measurement count does not match intervals");
  auto t = f.times();
  std::vector<double> v(y.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = y.y[k] / (t[k + 1] - t[k]);
  return PiecewiseConstant({t.begin(), t.end()}, std::move(v));
}

// Orthogonal projection of a grid signal onto {u : <pi_k, u> = y_k for all k}.
inline std::vector<double> project_data(std::span<const double> u, const IntervalBasis& basis,
                                        std::span<const double> y) {
  auto r = basis.integrate(u);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = y[k] - r[k];
  std::vector<double> out(u.begin(), u.end());
  basis.accumulate(basis.solve_gram(r), out);
  return out;
}

inline Signal project_data_bl(const Signal& u, const FiringSequence& f, const MeasurementSequence& y) {
  if (y.size() != f.intervals()) throw ShapeError("project_data_bl: measurement count does not match intervals");
  IntervalBasis basis(u.grid(), f.times());
  return Signal(u.grid(), project_data(u.values(), basis, y.y));
}

struct PocsResult {
  Signal signal;
  int iterations = 0;
  bool converged = false;
  bool sufficient_condition_met = true;  // 2*cutoff <= (b-c)/(2 kappa delta)
  std::vector<double> residual_history;  // distance to the data set, per iterate
};

namespace detail {
inline double data_distance(std::span<const double> u, const IntervalBasis& basis, std::span<const double> y) {
  auto r = basis.integrate(u);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = y[k] - r[k];
  auto beta = basis.solve_gram(r);
  double s = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * beta[k];
  return std::sqrt(std::max(0.0, s));
}

inline double rel_change(std::span<const double> a, std::span<const double> b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    n += a[i] * a[i];
  }
  if (n == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(d / n);
}

inline void require_finite_iterate(std::span<const double> x, const char* who) {
  for (double v : x)
    if (!std::isfinite(v)) throw DivergenceError(std::string(who) + ": non-finite iterate");
}
} // namespace detail

// x_{l+1} = LP(R_A(x_l)), x_0 = LP(R_A(0)). `cutoff` is the one-sided lowpass
// edge in Hz, so the signal bandwidth is 2*cutoff.
inline PocsResult pocs_bandlimited(const FiringSequence& f, const MeasurementSequence& y, const TimeGrid& g,
                                   double cutoff, const IterConfig& cfg = {}) {
  cfg.check();
  if (y.size() != f.intervals()) throw ShapeError("pocs_bandlimited: measurement count does not match intervals");
  const auto rates = firing_rate_bounds(f.params());
  IntervalBasis basis(g, f.times());

  std::vector<double> x = lowpass(project_data(std::vector<double>(g.n, 0.0), basis, y.y), g, cutoff);
  PocsResult res{Signal::zeros(g)};
  res.sufficient_condition_met = 2.0 * cutoff <= rates.min_rate * (1.0 + 1e-12);
  if (cfg.record_trajectory) res.residual_history.push_back(detail::data_distance(x, basis, y.y));
  for (int it = 1; it <= cfg.max_iter; ++it) {
    auto next = lowpass(project_data(x, basis, y.y), g, cutoff);
    detail::require_finite_iterate(next, "pocs_bandlimited");
    const double change = detail::rel_change(next, x);
    x = std::move(next);
    res.iterations = it;
    if (cfg.record_trajectory) res.residual_history.push_back(detail::data_distance(x, basis, y.y));
    if (change < cfg.rel_tol) {
      res.converged = true;
      break;
    }
  }
  res.signal = Signal(g, std::move(x));
  return res;
}

} // namespace bptem
