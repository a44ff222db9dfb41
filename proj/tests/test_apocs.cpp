#include <bptem/apocs.hpp>
#include <bptem/metrics.hpp>
#include <bptem/test_signal.hpp>

#include <gtest/gtest.h>

using namespace bptem;

namespace {
struct Run {
  TimeGrid g;
  Signal x;
  IQPair iq;
  FiringSequence f;
  MeasurementSequence y;
};

Run encode_test(double f0, double delta, double t0, double t1) {
  TemParams p{1.0, delta, 3.0, 2.0};
  auto g = make_grid(t0, t1, std::max(8.0 * 2.0 * (f0 + 15.0), 4.0 * firing_rate_bounds(p).max_rate));
  auto [x, iq] = gen_test_signal(f0, 10.0, 2.5, g);
  auto f = encode(x, p);
  auto y = measurements(f);
  return {g, x, iq, f, y};
}
} // namespace

TEST(Apocs, RecoversTestSignalWithMonotoneResidual) {
  auto r = encode_test(50.0, 1.0 / 120.0, -2.0, 2.0);
  IterConfig cfg;
  cfg.record_trajectory = true;
  auto res = apocs(r.f, r.y, BandSpec(50.0, 30.0), r.g, cfg);
  EXPECT_TRUE(res.diag.converged);
  EXPECT_TRUE(res.diag.monotone);
  EXPECT_EQ(res.diag.convention, GainConvention::unit);
  EXPECT_EQ(static_cast<int>(res.diag.residual_history.size()), res.diag.iterations);
  for (std::size_t k = 1; k < res.diag.residual_history.size(); ++k)
    EXPECT_LE(res.diag.residual_history[k], res.diag.residual_history[k - 1] * (1 + 1e-9) + 1e-15);
  EXPECT_GT(sndr_db(r.x, res.signal).sndr_db, 40.0);
  EXPECT_GT(sndr_db(r.iq.in_phase(), res.iq.in_phase()).sndr_db, 40.0);
  EXPECT_GT(sndr_db(r.iq.quadrature(), res.iq.quadrature()).sndr_db, 40.0);
  // recomposed signal matches the I/Q output
  auto m = modulate(res.iq, 50.0);
  for (std::size_t i = 0; i < r.g.n; i += 13) EXPECT_NEAR(m[i], res.signal[i], 1e-12);
}

TEST(Apocs, HigherCarrier) {
  auto r = encode_test(150.0, 1.0 / 120.0, -2.0, 2.0);
  auto res = apocs(r.f, r.y, BandSpec(150.0, 30.0), r.g);
  EXPECT_TRUE(res.diag.monotone);
  EXPECT_GT(sndr_db(r.x, res.signal).sndr_db, 40.0);
}

TEST(Apocs, ZeroMeasurementsGiveZero) {
  auto g = make_grid(-1.0, 1.0, 1600.0);
  TemParams p{1.0, 1.0 / 120.0, 3.0, 2.0};
  auto f = encode(Signal::zeros(g), p);
  auto y = measurements(f);
  auto res = apocs(f, y, BandSpec(50.0, 30.0), g);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(res.signal[i], 0.0, 1e-9);
}

TEST(Apocs, ForcedConventionAndIterationCap) {
  auto r = encode_test(50.0, 1.0 / 120.0, -1.0, 1.0);
  IterConfig cfg;
  cfg.max_iter = 3;
  auto res = apocs(r.f, r.y, BandSpec(50.0, 30.0), r.g, cfg, GainConvention::unit);
  EXPECT_EQ(res.diag.iterations, 3);
  EXPECT_FALSE(res.diag.converged);
}

TEST(Apocs, RejectsBandAboveNyquist) {
  auto r = encode_test(50.0, 1.0 / 120.0, -1.0, 1.0);
  EXPECT_THROW(apocs(r.f, r.y, BandSpec(2000.0, 30.0), r.g), ParameterError);
}
