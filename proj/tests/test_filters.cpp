#include <bptem/filters.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace bptem;

namespace {
const double pi = std::numbers::pi;

std::vector<double> tone(const TimeGrid& g, double f, double ph = 0.0) {
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < g.n; ++i) x[i] = std::cos(2 * pi * f * g.time(i) + ph);
  return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
} // namespace

TEST(Lowpass, KeepsInBandRemovesOutOfBand) {
  TimeGrid g(-1.0, 1.0 / 200.0, 400);  // bins every 0.5 Hz
  auto lo = tone(g, 10.0, 0.3), hi = tone(g, 40.0, 1.1);
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < g.n; ++i) x[i] = lo[i] + hi[i];
  EXPECT_LT(max_abs_diff(lowpass(x, g, 20.0), lo), 1e-12);
  EXPECT_LT(max_abs_diff(lowpass(x, g, 40.0), x), 1e-12);  // edge on a bin is kept
}

TEST(Lowpass, IsIdempotent) {
  TimeGrid g(0.0, 0.01, 300);
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < g.n; ++i) x[i] = std::sin(0.37 * static_cast<double>(i * i));
  auto a = lowpass(x, g, 12.3);
  EXPECT_LT(max_abs_diff(lowpass(a, g, 12.3), a), 1e-12);
}

TEST(Lowpass, RejectsEdgeAtOrAboveNyquist) {
  TimeGrid g(0.0, 0.01, 100);
  std::vector<double> x(g.n, 1.0);
  EXPECT_THROW(lowpass(x, g, 50.0), ParameterError);
  EXPECT_THROW(lowpass(x, g, -1.0), ParameterError);
  EXPECT_THROW(lowpass(std::vector<double>(5, 0.0), g, 10.0), ShapeError);
}

TEST(Bandpass, SelectsBand) {
  TimeGrid g(-2.0, 1.0 / 1000.0, 4000);  // 0.25 Hz bins
  auto a = tone(g, 50.0), b = tone(g, 120.0, 0.4), c = tone(g, 300.0);
  std::vector<double> x(g.n);
  for (std::size_t i = 0; i < g.n; ++i) x[i] = a[i] + b[i] + c[i];
  EXPECT_LT(max_abs_diff(bandpass(x, g, 100.0, 150.0), b), 1e-11);
  EXPECT_LT(max_abs_diff(bandpass(x, g, 120.0, 300.0), [&] {
              std::vector<double> s(g.n);
              for (std::size_t i = 0; i < g.n; ++i) s[i] = b[i] + c[i];
              return s;
            }()),
            1e-11);
  EXPECT_THROW(bandpass(x, g, 150.0, 100.0), ParameterError);
  EXPECT_THROW(bandpass(x, g, 100.0, 600.0), ParameterError);

  Signal s(g, x);
  auto f = bandpass_filter(s, BandSpec(120.0, 20.0));
  EXPECT_LT(max_abs_diff({f.values().begin(), f.values().end()}, b), 1e-11);
}

TEST(LowpassComplex, KeepsBothSidesUpToCutoff) {
  TimeGrid g(0.0, 0.01, 200);  // 0.5 Hz bins
  std::vector<std::complex<double>> z(g.n), keep(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double t = g.time(i);
    keep[i] = std::polar(1.0, 2 * pi * 5.0 * t) + std::polar(0.5, -2 * pi * 8.0 * t);
    z[i] = keep[i] + std::polar(1.0, 2 * pi * 20.0 * t) + std::polar(1.0, -2 * pi * 30.0 * t);
  }
  lowpass_complex(z, g, 8.0);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_LT(std::abs(z[i] - keep[i]), 1e-12);
}
