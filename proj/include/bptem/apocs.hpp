#pragma once

#include <bptem/operators.hpp>
#include <bptem/pocs.hpp>

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

// Alternating POCS: joint I/Q extraction from one TEM channel.
namespace bptem {

struct ApocsDiagnostics {
  int iterations = 0;
  bool converged = false;
  GainConvention convention = GainConvention::unit;
  double idempotency_unit = 0.0;
  double idempotency_doubled = 0.0;
  // Distance of iterate l (l >= 1) to the data set; filled when record_trajectory is set.
  std::vector<double> residual_history;
  bool monotone = true;
  double final_residual = 0.0;
  double wall_seconds = 0.0;
};

struct ApocsResult {
  IQPair iq;
  Signal signal;
  ApocsDiagnostics diag;
};

// Runs x_0 = R_A(0), x_l = LP(R_A(x_{l-1})) on both branches with lowpass edge
// `cutoff`, using the data set's gain convention as given.
inline ApocsResult apocs(const IqDataSet& data, double cutoff, const IterConfig& cfg) {
  cfg.check();
  const auto t0 = std::chrono::steady_clock::now();
  const auto& g = data.grid();
  const auto& basis = data.basis();
  const auto& car = data.carrier();
  const double gf = gain_factor(data.gain());

  ApocsDiagnostics diag;
  diag.convention = data.gain();

  VectorState w = data.project(VectorState(g));
  std::vector<double> xr = recompose(w, car);

  const double slack = 1e-9;
  double prev_d = -1.0;
  double first_d = 0.0;
  int growing = 0;
  auto track = [&](double d) {
    if (cfg.record_trajectory) diag.residual_history.push_back(d);
    if (prev_d < 0.0) {
      first_d = d;
    } else {
      const bool up = d > prev_d * (1.0 + slack) + slack * first_d;
      if (up) diag.monotone = false;
      growing = up ? growing + 1 : 0;
      if (growing >= 10)
        throw OperatorConventionError(
            "apocs: residual grew for 10 consecutive iterations; try the other gain convention");
    }
    prev_d = d;
  };

  for (int it = 1; it <= cfg.max_iter; ++it) {
    auto r = data.residual(w);
    auto beta = basis.solve_gram(r);
    if (it > 1) {
      double s = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * beta[k];
      track(std::sqrt(std::max(0.0, s)));
    }
    auto corr = basis.synthesize(beta);
    for (std::size_t i = 0; i < g.n; ++i) {
      w.u_i[i] += gf * corr[i] * car.cos_t[i];
      w.u_q[i] -= gf * corr[i] * car.sin_t[i];
    }
    w.u_i = lowpass(w.u_i, g, cutoff);
    w.u_q = lowpass(w.u_q, g, cutoff);
    detail::require_finite_iterate(w.u_i, "apocs");
    detail::require_finite_iterate(w.u_q, "apocs");

    auto next = recompose(w, car);
    const double change = detail::rel_change(next, xr);
    xr = std::move(next);
    diag.iterations = it;
    if (change < cfg.rel_tol) {
      diag.converged = true;
      break;
    }
  }
  diag.final_residual = data.distance(w);
  track(diag.final_residual);
  diag.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {w.to_iq(), Signal(g, std::move(xr)), std::move(diag)};
}

// Full decoder: builds the data set on grid g, picks the gain convention by the
// idempotency check unless one is forced, and runs with lowpass edge B_BP/2.
inline ApocsResult apocs(const FiringSequence& f, const MeasurementSequence& y, const BandSpec& band,
                         const TimeGrid& g, const IterConfig& cfg = {},
                         std::optional<GainConvention> gain = std::nullopt) {
  if (!(band.upper() < g.nyquist())) throw ParameterError("apocs: band exceeds the grid Nyquist");
  IqDataSet data(g, f, y, band.f0);
  GainSelection sel;
  if (gain) {
    sel.convention = *gain;
  } else {
    sel = select_gain_convention(data);
  }
  auto res = apocs(data.with_gain(sel.convention), 0.5 * band.b_bp, cfg);
  res.diag.idempotency_unit = sel.idempotency_unit;
  res.diag.idempotency_doubled = sel.idempotency_doubled;
  return res;
}

} // namespace bptem
