#include <bptem/fft.hpp>
#include <bptem/grid.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace bptem;

TEST(TimeGrid, TimesAndFrequencies) {
  TimeGrid g(-1.0, 0.25, 8);
  EXPECT_DOUBLE_EQ(g.time(0), -1.0);
  EXPECT_DOUBLE_EQ(g.t_last(), 0.75);
  EXPECT_DOUBLE_EQ(g.period(), 2.0);
  EXPECT_DOUBLE_EQ(g.nyquist(), 2.0);
  EXPECT_DOUBLE_EQ(g.bin_frequency(1), 0.5);
  EXPECT_DOUBLE_EQ(g.bin_frequency(4), 2.0);
  EXPECT_DOUBLE_EQ(g.bin_frequency(7), -0.5);
}

TEST(TimeGrid, RejectsBadArguments) {
  EXPECT_THROW(TimeGrid(0.0, 0.0, 10), ParameterError);
  EXPECT_THROW(TimeGrid(0.0, -1.0, 10), ParameterError);
  EXPECT_THROW(TimeGrid(0.0, 0.1, 1), ParameterError);
  EXPECT_THROW(TimeGrid(NAN, 0.1, 4), ParameterError);
}

TEST(TimeGrid, SmoothLengths) {
  EXPECT_EQ(next_smooth_length(1), 2u);
  EXPECT_EQ(next_smooth_length(11), 12u);
  EXPECT_EQ(next_smooth_length(97), 98u);
  EXPECT_EQ(next_smooth_length(9600), 9600u);
  for (std::size_t n = 2; n < 3000; n += 37) {
    auto m = next_smooth_length(n);
    EXPECT_GE(m, n);
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (m % p == 0) m /= p;
    EXPECT_EQ(m, 1u);
  }
}

TEST(TimeGrid, MakeGridCoversWindowAtRate) {
  auto g = make_grid(-4.0, 4.0, 1200.0);
  EXPECT_EQ(g.n, 9600u);
  EXPECT_DOUBLE_EQ(g.t_start, -4.0);
  EXPECT_NEAR(g.period(), 8.0, 1e-12);
  auto h = make_grid(0.0, 1.0, 1001.0);
  EXPECT_GE(h.sample_rate(), 1001.0);
  EXPECT_THROW(make_grid(1.0, 1.0, 10.0), ParameterError);
  EXPECT_THROW(make_grid(0.0, 1.0, 0.0), ParameterError);
}

TEST(BandSpec, EdgesAndValidation) {
  BandSpec b(600.0, 30.0);
  EXPECT_DOUBLE_EQ(b.lower(), 585.0);
  EXPECT_DOUBLE_EQ(b.upper(), 615.0);
  EXPECT_NO_THROW(BandSpec(15.0, 30.0));
  EXPECT_THROW(BandSpec(10.0, 30.0), ParameterError);
  EXPECT_THROW(BandSpec(50.0, 0.0), ParameterError);
}

TEST(Signal, ValidatesLengthAndFiniteness) {
  TimeGrid g(0.0, 0.1, 4);
  EXPECT_THROW(Signal(g, {1.0, 2.0}), ShapeError);
  EXPECT_THROW(Signal(g, {1.0, 2.0, INFINITY, 0.0}), ParameterError);
  EXPECT_THROW(IQPair(g, {0, 0, 0, 0}, {0, 0, 0}), ShapeError);
  auto z = Signal::zeros(g);
  EXPECT_EQ(z.size(), 4u);
  EXPECT_EQ(z[3], 0.0);
  EXPECT_THROW(require_same_grid(g, TimeGrid(0.0, 0.1, 5), "t"), ShapeError);
}

// Oracle: direct O(n^2) DFT.
static std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> X(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      X[k] += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n));
  return X;
}

TEST(Fft, MatchesNaiveDft) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (std::size_t n : {6u, 15u, 64u, 105u}) {
    std::vector<std::complex<double>> x(n);
    std::vector<double> xr(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = {nd(rng), nd(rng)};
      xr[i] = x[i].real();
    }
    auto ref = naive_dft(x);
    std::vector<std::complex<double>> X(n);
    fft::forward(x, X);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(X[k] - ref[k]), 1e-10 * static_cast<double>(n));

    std::vector<std::complex<double>> back(n);
    fft::inverse(X, back);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(back[i] - x[i]), 1e-12 * static_cast<double>(n));

    std::vector<std::complex<double>> xc(n);
    for (std::size_t i = 0; i < n; ++i) xc[i] = xr[i];
    auto refr = naive_dft(xc);
    std::vector<std::complex<double>> H(n / 2 + 1);
    fft::r2c(xr, H);
    for (std::size_t k = 0; k < H.size(); ++k) EXPECT_LT(std::abs(H[k] - refr[k]), 1e-10 * static_cast<double>(n));
    std::vector<double> r(n);
    fft::c2r(H, r);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r[i], xr[i], 1e-12 * static_cast<double>(n));
  }
}

TEST(Fft, InPlaceInverse) {
  std::vector<std::complex<double>> x{{1, 0}, {2, 1}, {0, -1}, {3, 0}};
  auto y = x;
  fft::forward(y, y);
  fft::inverse(y, y);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(y[i] - x[i]), 1e-14);
}
