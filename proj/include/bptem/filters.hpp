#pragma once

#include <bptem/fft.hpp>
#include <bptem/grid.hpp>

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

// Ideal (brick-wall) filters as masks on the DFT of the whole window.
namespace bptem {

namespace detail {

// Bin index of frequency f, snapped so an edge that sits on a bin is kept.
inline long long bin_floor(double f, const TimeGrid& g) {
  return static_cast<long long>(std::floor(f * g.period() + 1e-9));
}
inline long long bin_ceil(double f, const TimeGrid& g) {
  return static_cast<long long>(std::ceil(f * g.period() - 1e-9));
}

inline void check_below_nyquist(double f, const TimeGrid& g, const char* who) {
  if (!(f < g.nyquist()))
    throw ParameterError(std::string(who) + ": edge " + std::to_string(f) +
                         " Hz is not below the grid Nyquist " + std::to_string(g.nyquist()) + " Hz");
}

// Keep real-spectrum bins lo..hi (inclusive), zero the rest.
inline std::vector<double> band_mask_real(std::span<const double> x, const TimeGrid& g, long long lo,
                                          long long hi) {
  if (x.size() != g.n) throw ShapeError("filter: length does not match grid");
  std::vector<std::complex<double>> spec(g.n / 2 + 1);
  fft::r2c(x, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    auto kk = static_cast<long long>(k);
    if (kk < lo || kk > hi) spec[k] = 0.0;
  }
  std::vector<double> out(g.n);
  fft::c2r(spec, out);
  return out;
}

} // namespace detail

inline std::vector<double> lowpass(std::span<const double> x, const TimeGrid& g, double cutoff) {
  if (!(cutoff >= 0.0)) throw ParameterError("lowpass: negative cutoff");
  detail::check_below_nyquist(cutoff, g, "lowpass");
  return detail::band_mask_real(x, g, 0, detail::bin_floor(cutoff, g));
}

inline std::vector<double> bandpass(std::span<const double> x, const TimeGrid& g, double f_lo, double f_hi) {
  if (!(f_lo >= 0.0 && f_hi > f_lo)) throw ParameterError("bandpass: need 0 <= f_lo < f_hi");
  detail::check_below_nyquist(f_hi, g, "bandpass");
  return detail::band_mask_real(x, g, detail::bin_ceil(f_lo, g), detail::bin_floor(f_hi, g));
}

inline Signal lowpass_filter(const Signal& s, double cutoff) {
  return Signal(s.grid(), lowpass(s.values(), s.grid(), cutoff));
}

inline Signal bandpass_filter(const Signal& s, const BandSpec& band) {
  return Signal(s.grid(), bandpass(s.values(), s.grid(), band.lower(), band.upper()));
}

// Low-pass of a complex sequence, keeps |f| <= cutoff on both sides.
inline void lowpass_complex(std::vector<std::complex<double>>& z, const TimeGrid& g, double cutoff) {
  if (z.size() != g.n) throw ShapeError("lowpass_complex: length does not match grid");
  detail::check_below_nyquist(cutoff, g, "lowpass_complex");
  const long long m = detail::bin_floor(cutoff, g);
  const auto n = static_cast<long long>(g.n);
  fft::forward(z, z);
  for (long long k = m + 1; k < n - m; ++k) z[static_cast<std::size_t>(k)] = 0.0;
  fft::inverse(z, z);
}

} // namespace bptem
