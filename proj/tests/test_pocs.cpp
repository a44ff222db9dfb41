#include <bptem/filters.hpp>
#include <bptem/metrics.hpp>
#include <bptem/pocs.hpp>
#include <bptem/test_signal.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace bptem;

TEST(PiecewiseConstant, EvaluatesAndSamples) {
  PiecewiseConstant pc({0.0, 1.0, 3.0}, {2.0, -1.0});
  EXPECT_EQ(pc(0.5), 2.0);
  EXPECT_EQ(pc(1.0), -1.0);
  EXPECT_EQ(pc(2.9), -1.0);
  EXPECT_EQ(pc(-1.0), 0.0);
  EXPECT_EQ(pc(3.5), 0.0);
  auto s = pc.sample(TimeGrid(0.0, 0.5, 6));
  EXPECT_EQ(s[0], 2.0);
  EXPECT_EQ(s[3], -1.0);
}

TEST(PiecewiseConstant, AverageOverEachInterval) {
  auto g = make_grid(0.0, 1.0, 2000.0);
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < g.n; ++i) x[i] = 0.5 * std::sin(6.0 * g.time(i));
  TemParams p{1.0, 0.01, 3.0, 2.0};
  auto f = encode(Signal(g, x), p);
  auto y = measurements(f);
  auto pc = pcw_approx(f, y);
  auto t = f.times();
  for (std::size_t k = 0; k + 1 < t.size(); k += 7) {
    const double mid = 0.5 * (t[k] + t[k + 1]);
    EXPECT_NEAR(pc(mid), y.y[k] / (t[k + 1] - t[k]), 1e-15);
    EXPECT_NEAR(pc(mid), 0.5 * std::sin(6.0 * mid), 1e-3);
  }
}

TEST(ProjectData, ConsistentAndIdempotent) {
  auto g = make_grid(0.0, 1.0, 2000.0);
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < g.n; ++i) x[i] = std::cos(9.0 * g.time(i));
  TemParams p{1.0, 0.01, 3.0, 2.0};
  auto f = encode(Signal(g, x), p);
  auto y = measurements(f);
  IntervalBasis basis(g, f.times());
  auto u = project_data(std::vector<double>(g.n, 0.3), basis, y.y);
  auto q = basis.integrate(u);
  for (std::size_t k = 0; k < q.size(); ++k) EXPECT_NEAR(q[k], y.y[k], 1e-12);
  auto u2 = project_data(u, basis, y.y);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(u2[i], u[i], 1e-10);
  auto s = project_data_bl(Signal(g, std::vector<double>(g.n, 0.3)), f, y);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_EQ(s[i], u[i]);
}

TEST(PocsBandlimited, RecoversLowpassSignal) {
  auto g = make_grid(-2.0, 2.0, 1000.0);
  std::vector<double> raw(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double t = g.time(i);
    raw[i] = std::cos(2 * 3.14159 * 3.0 * t) + 0.5 * std::sin(2 * 3.14159 * 7.25 * t);
  }
  Signal x(g, lowpass(raw, g, 10.0));
  TemParams p{1.0, 0.02, 3.0, 2.0};  // min rate 25 Hz >= 2 * 10 Hz
  auto f = encode(x, p);
  auto y = measurements(f);
  IterConfig cfg;
  cfg.record_trajectory = true;
  auto r = pocs_bandlimited(f, y, g, 10.0, cfg);
  EXPECT_TRUE(r.sufficient_condition_met);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(sndr_db(x, r.signal).sndr_db, 60.0);
  for (std::size_t k = 1; k < r.residual_history.size(); ++k)
    EXPECT_LE(r.residual_history[k], r.residual_history[k - 1] * (1 + 1e-9) + 1e-15);
}

TEST(PocsBandlimited, FlagsRateConditionAndChecksShapes) {
  auto g = make_grid(0.0, 1.0, 1000.0);
  TemParams p{1.0, 0.1, 3.0, 2.0};  // min rate 5 Hz
  auto f = encode(Signal::zeros(g), p);
  auto y = measurements(f);
  IterConfig cfg;
  cfg.max_iter = 3;
  auto r = pocs_bandlimited(f, y, g, 10.0, cfg);
  EXPECT_FALSE(r.sufficient_condition_met);
  MeasurementSequence bad{{1.0}};
  EXPECT_THROW(pocs_bandlimited(f, bad, g, 10.0, cfg), ShapeError);
  IterConfig neg;
  neg.max_iter = 0;
  EXPECT_THROW(neg.check(), ParameterError);
}
