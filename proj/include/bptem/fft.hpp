#pragma once

#include <bptem/errors.hpp>

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

// Thin FFTW3 wrapper. Plans are built once per (kind, n, in-place) with
// FFTW_ESTIMATE so the arithmetic is the same on every run, and executed
// through the new-array interface so callers can use any buffer.
namespace bptem::fft {

namespace detail {

enum class Kind { r2c, c2r, fwd, inv };

class PlanCache {
public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(Kind kind, std::size_t n, bool in_place) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(kind, n, in_place);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int len = static_cast<int>(n);
    const std::size_t cplx = (kind == Kind::r2c || kind == Kind::c2r) ? n / 2 + 1 : n;
    auto* a = fftw_alloc_complex(cplx + 1);
    auto* b = in_place ? a : fftw_alloc_complex(cplx + 1);
    auto* ra = reinterpret_cast<double*>(a);
    auto* rb = reinterpret_cast<double*>(b);
    fftw_plan p = nullptr;
    switch (kind) {
    case Kind::r2c: p = fftw_plan_dft_r2c_1d(len, ra, b, flags); break;
    case Kind::c2r: p = fftw_plan_dft_c2r_1d(len, a, rb, flags); break;
    case Kind::fwd: p = fftw_plan_dft_1d(len, a, b, FFTW_FORWARD, flags); break;
    case Kind::inv: p = fftw_plan_dft_1d(len, a, b, FFTW_BACKWARD, flags); break;
    }
    if (!in_place) fftw_free(b);
    fftw_free(a);
    if (!p) throw Error("fft: FFTW failed to create a plan");
    plans_.emplace(key, p);
    return p;
  }

private:
  std::mutex mu_;
  std::map<std::tuple<Kind, std::size_t, bool>, fftw_plan> plans_;
};

inline PlanCache& cache() {
  static PlanCache c;
  return c;
}

inline fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }
inline fftw_complex* as_fftw(const std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

} // namespace detail

// Real forward transform, out has n/2+1 bins. Unnormalized.
inline void r2c(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t n = in.size();
  if (out.size() != n / 2 + 1) throw ShapeError("fft::r2c: output must have n/2+1 bins");
  auto plan = detail::cache().get(detail::Kind::r2c, n, false);
  fftw_execute_dft_r2c(plan, const_cast<double*>(in.data()), detail::as_fftw(out.data()));
}

// Inverse of r2c including the 1/n factor. out.size() is the real length.
inline void c2r(std::span<const std::complex<double>> in, std::span<double> out) {
  const std::size_t n = out.size();
  if (in.size() != n / 2 + 1) throw ShapeError("fft::c2r: input must have n/2+1 bins");
  std::vector<std::complex<double>> scratch(in.begin(), in.end()); // c2r clobbers its input
  auto plan = detail::cache().get(detail::Kind::c2r, n, false);
  fftw_execute_dft_c2r(plan, detail::as_fftw(scratch.data()), out.data());
  const double s = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= s;
}

inline void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  if (in.size() != out.size()) throw ShapeError("fft::forward: size mismatch");
  bool same = in.data() == out.data();
  auto plan = detail::cache().get(detail::Kind::fwd, in.size(), same);
  fftw_execute_dft(plan, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
}

// Normalized inverse (includes 1/n).
inline void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  if (in.size() != out.size()) throw ShapeError("fft::inverse: size mismatch");
  bool same = in.data() == out.data();
  auto plan = detail::cache().get(detail::Kind::inv, in.size(), same);
  fftw_execute_dft(plan, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
  const double s = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= s;
}

} // namespace bptem::fft
