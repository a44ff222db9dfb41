#pragma once

#include <bptem/filters.hpp>
#include <bptem/intervals.hpp>
#include <bptem/operators.hpp>
#include <bptem/tem.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

// Closed-form decoder c = G^+ q with x^I = (g^I)^T c, x^Q = (g^Q)^T c.
//
// With a_k = (pi_k cos, -pi_k sin) and P the branch lowpass, the kernels are
// g_k = P A Gamma^{-1} e_k and G = H Gamma^{-1}, H_jk = <a_j, P a_k>. Writing the
// band content of a_k through its in-band DFT bins gives H = L L^T with L of
// size K x (2 * in-band bins), so G = L (Gamma^{-1} L)^T is stored factored and
// its SVD is taken exactly through two thin QRs and a small core SVD.
namespace bptem {

inline constexpr std::size_t closed_form_max_intervals = 5000;

class ClosedFormSystem {
public:
  ClosedFormSystem(const TimeGrid& g, const FiringSequence& f, const MeasurementSequence& y, const BandSpec& band)
      : basis_(checked_basis(g, f, y, band)), q_(y.y), f0_(band.f0), cutoff_(0.5 * band.b_bp) {
    const std::size_t K = y.size();

    half_bins_ = static_cast<std::size_t>(detail::bin_floor(cutoff_, g));
    const std::size_t nb = 2 * half_bins_ + 1;
    const auto N = static_cast<long long>(g.n);
    const double two_pi = 2.0 * std::numbers::pi;

    // spectra_(m, k) = sum_i w_k[i] e^{-j w0 t_i} e^{-j 2 pi m i / N}, m = -M..M
    spectra_.setZero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) {
      auto w = basis_.weights(k);
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] == 0.0) continue;
        const std::size_t i = basis_.first(k) + j;
        const auto ii = static_cast<long long>(i);
        const double ph0 = -two_pi * f0_ * g.time(i);
        // start at m = -M: e^{+j 2 pi M i / N}, reduced mod N for accuracy
        const long long start = (static_cast<long long>(half_bins_) * ii) % N;
        std::complex<double> e = w[j] * std::polar(1.0, ph0 + two_pi * static_cast<double>(start) / static_cast<double>(N));
        const std::complex<double> step = std::polar(1.0, -two_pi * static_cast<double>(ii % N) / static_cast<double>(N));
        for (std::size_t m = 0; m < nb; ++m) {
          spectra_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) += e;
          e *= step;
        }
      }
    }

    const double scale = std::sqrt(g.dt / static_cast<double>(g.n));
    lfac_.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(2 * nb));
    lfac_.leftCols(static_cast<Eigen::Index>(nb)) = scale * spectra_.real().transpose();
    lfac_.rightCols(static_cast<Eigen::Index>(nb)) = scale * spectra_.imag().transpose();
    rfac_.resize(lfac_.rows(), lfac_.cols());
    for (Eigen::Index c = 0; c < lfac_.cols(); ++c) {
      std::vector<double> col(lfac_.col(c).data(), lfac_.col(c).data() + K);
      auto s = basis_.solve_gram(col);
      rfac_.col(c) = Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(K));
    }
  }

  std::size_t size() const { return q_.size(); }
  const TimeGrid& grid() const { return basis_.grid(); }
  const IntervalBasis& basis() const { return basis_; }
  std::span<const double> q() const { return q_; }
  double f0() const { return f0_; }
  double cutoff() const { return cutoff_; }

  // G v without forming G.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return lfac_ * (rfac_.transpose() * v); }

  // The dense K x K matrix.
  Eigen::MatrixXd matrix() const { return lfac_ * rfac_.transpose(); }

  // x = P A Gamma^{-1} c on the grid, as an I/Q pair.
  IQPair synthesize(const Eigen::VectorXd& c) const {
    const auto& g = grid();
    std::vector<double> cv(c.data(), c.data() + c.size());
    auto beta = basis_.solve_gram(cv);
    Eigen::Map<const Eigen::VectorXd> bv(beta.data(), static_cast<Eigen::Index>(beta.size()));
    Eigen::VectorXcd band = spectra_ * bv.cast<std::complex<double>>();
    std::vector<std::complex<double>> spec(g.n, 0.0);
    const auto M = static_cast<long long>(half_bins_);
    const auto N = static_cast<long long>(g.n);
    for (long long m = -M; m <= M; ++m) spec[static_cast<std::size_t>((m + N) % N)] = band(m + M);
    fft::inverse(spec, spec);
    std::vector<double> xi(g.n), xq(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
      xi[i] = spec[i].real();
      xq[i] = spec[i].imag();
    }
    return IQPair(g, std::move(xi), std::move(xq));
  }

  // Kernel pair (g_k^I, g_k^Q).
  IQPair kernel(std::size_t k) const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
    e(static_cast<Eigen::Index>(k)) = 1.0;
    return synthesize(e);
  }

  struct Svd {
    Eigen::MatrixXd u;  // K x r
    Eigen::VectorXd s;  // r, descending
    Eigen::MatrixXd v;  // K x r
  };

  // Thin SVD of G = L R^T: L = Q1 T1, R = Q2 T2, T1 T2^T = U S V^T.
  Svd svd() const {
    Factored f(*this);
    const Eigen::Index K = lfac_.rows();
    Eigen::MatrixXd q1 = f.qr1.householderQ() * Eigen::MatrixXd::Identity(K, f.r);
    Eigen::MatrixXd q2 = f.qr2.householderQ() * Eigen::MatrixXd::Identity(K, f.r);
    return {q1 * f.core.matrixU(), f.core.singularValues(), q2 * f.core.matrixV()};
  }

  struct Pinv {
    Eigen::VectorXd c;
    std::size_t rank = 0;
    double sigma_max = 0.0;
  };

  // G^+ v keeping singular values above rcond * sigma_max; the orthogonal
  // factors are applied as Householder products, never formed.
  Pinv pinv_apply(const Eigen::VectorXd& v, double rcond) const {
    Factored f(*this);
    const auto& sv = f.core.singularValues();
    Pinv out;
    out.sigma_max = sv.size() ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > rcond * out.sigma_max) ++rank;
    out.rank = static_cast<std::size_t>(rank);
    if (!(out.sigma_max > 0.0) || rank == 0) return out;
    Eigen::VectorXd z = f.qr1.householderQ().adjoint() * v;
    Eigen::VectorXd coef = f.core.matrixU().leftCols(rank).transpose() * z.head(f.r);
    coef.array() /= sv.head(rank).array();
    Eigen::VectorXd full = Eigen::VectorXd::Zero(lfac_.rows());
    full.head(f.r) = f.core.matrixV().leftCols(rank) * coef;
    out.c = f.qr2.householderQ() * full;
    return out;
  }

private:
  static IntervalBasis checked_basis(const TimeGrid& g, const FiringSequence& f, const MeasurementSequence& y,
                                     const BandSpec& band) {
    const std::size_t K = y.size();
    if (K == 0) throw InsufficientDataError("build_closed_form: empty system (no measurements)");
    if (K != f.intervals()) throw ShapeError("build_closed_form: measurement count does not match intervals");
    if (K > closed_form_max_intervals)
      throw SizeError("build_closed_form: K = " + std::to_string(K) + " exceeds the cap of " +
                      std::to_string(closed_form_max_intervals) + "; split the window into shorter chunks");
    if (!(band.upper() < g.nyquist())) throw ParameterError("build_closed_form: band exceeds the grid Nyquist");
    return IntervalBasis(g, f.times());
  }

  struct Factored {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr1, qr2;
    Eigen::Index r;
    Eigen::BDCSVD<Eigen::MatrixXd> core;
    explicit Factored(const ClosedFormSystem& s)
        : qr1(s.lfac_), qr2(s.rfac_), r(std::min(s.lfac_.rows(), s.lfac_.cols())) {
      Eigen::MatrixXd t1 = qr1.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      Eigen::MatrixXd t2 = qr2.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      core.compute(t1 * t2.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    }
  };

  IntervalBasis basis_;
  std::vector<double> q_;
  double f0_;
  double cutoff_;
  std::size_t half_bins_ = 0;
  Eigen::MatrixXcd spectra_;  // in-band DFT of each representer, bins x K
  Eigen::MatrixXd lfac_;      // K x 2*bins
  Eigen::MatrixXd rfac_;      // Gamma^{-1} lfac_
};

inline ClosedFormSystem build_closed_form(const FiringSequence& f, const MeasurementSequence& y, const BandSpec& band,
                                          const TimeGrid& g) {
  return ClosedFormSystem(g, f, y, band);
}

struct ClosedFormSolution {
  IQPair iq;
  Eigen::VectorXd c;
  std::size_t rank = 0;
  double sigma_max = 0.0;
};

// c = G^+ q, keeping singular values above rcond * sigma_max.
inline ClosedFormSolution solve_closed_form_full(const ClosedFormSystem& sys, double rcond = 1e-10) {
  Eigen::Map<const Eigen::VectorXd> q(sys.q().data(), static_cast<Eigen::Index>(sys.size()));
  if (q.squaredNorm() == 0.0) return {IQPair::zeros(sys.grid()), Eigen::VectorXd::Zero(q.size()), 0, 0.0};
  auto p = sys.pinv_apply(q, rcond);
  if (p.rank == 0) throw RankCollapseError("solve_closed_form: all singular values below cutoff");
  auto iq = sys.synthesize(p.c);
  return {std::move(iq), std::move(p.c), p.rank, p.sigma_max};
}

inline IQPair solve_closed_form(const ClosedFormSystem& sys, double rcond = 1e-10) {
  return solve_closed_form_full(sys, rcond).iq;
}

// Coefficients sum_{k=0}^{L} (I - G)^k q.
inline Eigen::VectorXd neumann_coefficients(const ClosedFormSystem& sys, int L) {
  Eigen::Map<const Eigen::VectorXd> q(sys.q().data(), static_cast<Eigen::Index>(sys.size()));
  Eigen::VectorXd term = q;
  Eigen::VectorXd sum = q;
  for (int k = 1; k <= L; ++k) {
    term -= sys.apply(term);
    sum += term;
  }
  return sum;
}

inline IQPair neumann_partial_sum(const ClosedFormSystem& sys, int L) {
  return sys.synthesize(neumann_coefficients(sys, L));
}

} // namespace bptem
