#pragma once

#include <bptem/filters.hpp>
#include <bptem/intervals.hpp>
#include <bptem/tem.hpp>
#include <bptem/test_signal.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bptem {

// Pair w = [u_i, u_q] of lowpass branches on a grid.
struct VectorState {
  TimeGrid grid;
  std::vector<double> u_i;
  std::vector<double> u_q;

  explicit VectorState(const TimeGrid& g) : grid(g), u_i(g.n, 0.0), u_q(g.n, 0.0) {}
  VectorState(const TimeGrid& g, std::vector<double> i, std::vector<double> q)
      : grid(g), u_i(std::move(i)), u_q(std::move(q)) {
    detail::require_finite(u_i, g.n, "VectorState.u_i");
    detail::require_finite(u_q, g.n, "VectorState.u_q");
  }
  IQPair to_iq() const { return IQPair(grid, u_i, u_q); }
};

// <a, b> = dt * sum (a_i b_i + a_q b_q)
inline double inner(const VectorState& a, const VectorState& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.u_i.size(); ++i) s += a.u_i[i] * b.u_i[i] + a.u_q[i] * b.u_q[i];
  return a.grid.dt * s;
}
inline double norm(const VectorState& a) { return std::sqrt(inner(a, a)); }

inline VectorState operator-(const VectorState& a, const VectorState& b) {
  VectorState r(a.grid);
  for (std::size_t i = 0; i < a.u_i.size(); ++i) {
    r.u_i[i] = a.u_i[i] - b.u_i[i];
    r.u_q[i] = a.u_q[i] - b.u_q[i];
  }
  return r;
}

// cos and sin of 2 pi f0 t on the grid.
struct Carrier {
  std::vector<double> cos_t;
  std::vector<double> sin_t;

  Carrier(const TimeGrid& g, double f0) : cos_t(g.n), sin_t(g.n) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const double th = carrier_phase(f0, g.time(i));
      cos_t[i] = std::cos(th);
      sin_t[i] = std::sin(th);
    }
  }
};

// u_i cos - u_q sin
inline std::vector<double> recompose(const VectorState& w, const Carrier& car) {
  std::vector<double> x(w.u_i.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = w.u_i[i] * car.cos_t[i] - w.u_q[i] * car.sin_t[i];
  return x;
}

// Scale applied to the I/Q residual. `unit` gives the orthogonal projection;
// `doubled` is the alternative reading with an explicit factor 2.
enum class GainConvention { unit, doubled };

inline double gain_factor(GainConvention g) { return g == GainConvention::doubled ? 2.0 : 1.0; }
inline const char* to_string(GainConvention g) { return g == GainConvention::doubled ? "doubled" : "unit"; }

// The data set: states whose recomposed signal integrates to y_k on every
// interval. Holds everything R_A needs.
class IqDataSet {
public:
  IqDataSet(IntervalBasis basis, std::vector<double> y, double f0, GainConvention gain = GainConvention::unit)
      : basis_(std::move(basis)), y_(std::move(y)), f0_(f0), carrier_(basis_.grid(), f0), gain_(gain) {
    if (y_.size() != basis_.size()) throw ShapeError("IqDataSet: measurement count does not match intervals");
  }
  IqDataSet(const TimeGrid& g, const FiringSequence& f, const MeasurementSequence& m, double f0,
            GainConvention gain = GainConvention::unit)
      : IqDataSet(IntervalBasis(g, f.times()), m.y, f0, gain) {}

  const IntervalBasis& basis() const { return basis_; }
  const TimeGrid& grid() const { return basis_.grid(); }
  std::span<const double> y() const { return y_; }
  double f0() const { return f0_; }
  const Carrier& carrier() const { return carrier_; }
  GainConvention gain() const { return gain_; }
  IqDataSet with_gain(GainConvention g) const {
    IqDataSet d = *this;
    d.gain_ = g;
    return d;
  }

  // y - Q[D^T w]
  std::vector<double> residual(const VectorState& w) const {
    auto q = basis_.integrate(recompose(w, carrier_));
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = y_[k] - q[k];
    return q;
  }

  // sqrt(r^T Gamma^{-1} r): distance from w to the data set.
  double distance(const VectorState& w) const {
    auto r = residual(w);
    auto beta = basis_.solve_gram(r);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * beta[k];
    return std::sqrt(std::max(0.0, s));
  }

  // The correction pair g * (s cos, -s sin) with s = sum_k beta_k pi_k, Gamma beta = r.
  VectorState correction(const VectorState& w) const {
    return correction_from_residual(residual(w), w.grid);
  }

  VectorState correction_from_residual(std::span<const double> r, const TimeGrid& g) const {
    auto s = basis_.synthesize(basis_.solve_gram(r));
    const double gf = gain_factor(gain_);
    VectorState c(g);
    for (std::size_t i = 0; i < s.size(); ++i) {
      c.u_i[i] = gf * s[i] * carrier_.cos_t[i];
      c.u_q[i] = -gf * s[i] * carrier_.sin_t[i];
    }
    return c;
  }

  // R_A(w) = w + correction(w)
  VectorState project(const VectorState& w) const {
    auto c = correction(w);
    for (std::size_t i = 0; i < c.u_i.size(); ++i) {
      c.u_i[i] += w.u_i[i];
      c.u_q[i] += w.u_q[i];
    }
    return c;
  }

private:
  IntervalBasis basis_;
  std::vector<double> y_;
  double f0_;
  Carrier carrier_;
  GainConvention gain_;
};

// Residual pair for x_hat = u_i cos - u_q sin against the measurements.
inline VectorState residual_iq(const VectorState& x_hat, const FiringSequence& f, const MeasurementSequence& y,
                               double f0, GainConvention gain = GainConvention::unit) {
  return IqDataSet(x_hat.grid, f, y, f0, gain).correction(x_hat);
}

// R_B: ideal low-pass of both branches.
inline VectorState project_band(const VectorState& w, double cutoff) {
  return VectorState(w.grid, lowpass(w.u_i, w.grid, cutoff), lowpass(w.u_q, w.grid, cutoff));
}

enum class ProbeKind { RA_vector, RB_vector };

struct ProbeContext {
  const IqDataSet* data = nullptr;  // for RA_vector
  double cutoff = 0.0;              // for RB_vector
};

inline VectorState operator_probe(ProbeKind kind, const VectorState& w, const ProbeContext& ctx) {
  if (kind == ProbeKind::RA_vector) {
    if (!ctx.data) throw ParameterError("operator_probe: RA_vector needs a data set");
    return ctx.data->project(w);
  }
  return project_band(w, ctx.cutoff);
}

struct GainSelection {
  GainConvention convention = GainConvention::unit;
  double idempotency_unit = 0.0;     // ||R(R(w)) - R(w)|| / ||R(w)||
  double idempotency_doubled = 0.0;
};

inline VectorState random_state(const TimeGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  VectorState w(g);
  for (auto& v : w.u_i) v = nd(rng);
  for (auto& v : w.u_q) v = nd(rng);
  return w;
}

// Pick the gain convention whose R_A is idempotent on a random state.
inline GainSelection select_gain_convention(const IqDataSet& data, std::uint64_t seed = 12345) {
  const auto w = random_state(data.grid(), seed);
  auto idem = [&](GainConvention gc) {
    auto d = data.with_gain(gc);
    auto a = d.project(w);
    auto b = d.project(a);
    const double na = norm(a);
    return na > 0.0 ? norm(b - a) / na : 0.0;
  };
  GainSelection s;
  s.idempotency_unit = idem(GainConvention::unit);
  s.idempotency_doubled = idem(GainConvention::doubled);
  if (s.idempotency_unit <= 1e-8 || s.idempotency_unit <= s.idempotency_doubled)
    s.convention = GainConvention::unit;
  else
    s.convention = GainConvention::doubled;
  return s;
}

} // namespace bptem
