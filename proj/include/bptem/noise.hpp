#pragma once

#include <bptem/filters.hpp>
#include <bptem/grid.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace bptem {

struct NoiseKind {
  enum Type { white, bandpass } type = white;
  BandSpec band{};

  static NoiseKind white_noise() { return {}; }
  static NoiseKind bandpass_noise(BandSpec b) { return {bandpass, b}; }
};

inline constexpr double no_noise = std::numeric_limits<double>::infinity();

inline double energy(std::span<const double> v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

// s + w with ||s||^2/||w||^2 = 10^(snr_db/10) exactly (up to rounding).
inline Signal add_noise(const Signal& s, double snr_db, NoiseKind kind, std::uint64_t seed) {
  if (snr_db == no_noise) return s;
  if (!std::isfinite(snr_db)) throw ParameterError("add_noise: SNR must be finite or +inf");
  const auto& g = s.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(g.n);
  for (auto& v : w) v = normal(rng);
  if (kind.type == NoiseKind::bandpass) w = bandpass(w, g, kind.band.lower(), kind.band.upper());

  const double es = energy(s.values());
  const double ew = energy(w);
  const double scale = ew > 0.0 ? std::sqrt(es / ew * std::pow(10.0, -snr_db / 10.0)) : 0.0;
  std::vector<double> out(g.n);
  for (std::size_t i = 0; i < g.n; ++i) out[i] = s[i] + scale * w[i];
  return Signal(g, std::move(out));
}

} // namespace bptem
