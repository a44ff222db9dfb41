#pragma once

#include <bptem/grid.hpp>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <memory>
#include <cmath>
#include <span>
#include <vector>

namespace bptem {

// Interval functionals <pi_k, u> = integral of u over [t_k, t_{k+1}] for grid
// signals, with u read as its piecewise-linear interpolant. Each functional is
// dt * sum_i w_k[i] u_i; w_k is 1 inside the interval and fractional on the
// boundary cells. Gamma_jk = dt * <w_j, w_k> is the Gram matrix of the
// representers (tridiagonal when intervals span several grid steps).
class IntervalBasis {
public:
  IntervalBasis(const TimeGrid& g, std::span<const double> times) : grid_(g) {
    const std::size_t K = times.size() < 2 ? 0 : times.size() - 1;
    first_.resize(K);
    offset_.assign(K + 1, 0);
    length_.resize(K);
    const double top = static_cast<double>(g.n - 1);
    auto pos = [&](double t) { return std::clamp((t - g.t_start) / g.dt, 0.0, top); };

    for (std::size_t k = 0; k < K; ++k) {
      length_[k] = times[k + 1] - times[k];
      const double pa = pos(times[k]);
      const double pb = pos(times[k + 1]);
      auto c0 = static_cast<std::size_t>(std::floor(pa));
      auto c1 = std::min(static_cast<std::size_t>(std::floor(pb)), g.n - 2);
      c0 = std::min(c0, g.n - 2);
      first_[k] = c0;
      offset_[k] = weights_.size();
      weights_.resize(weights_.size() + (c1 - c0) + 2, 0.0);
      double* w = weights_.data() + offset_[k];
      for (std::size_t c = c0; c <= c1; ++c) {
        const double cd = static_cast<double>(c);
        const double s0 = std::max(pa, cd) - cd;
        const double s1 = std::min(pb, cd + 1.0) - cd;
        if (!(s1 > s0)) continue;
        const double half = 0.5 * (s1 * s1 - s0 * s0);
        w[c - c0] += (s1 - s0) - half;
        w[c - c0 + 1] += half;
      }
    }
    offset_[K] = weights_.size();
    factor_gram();
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return length_.size(); }
  double length(std::size_t k) const { return length_[k]; }
  std::size_t first(std::size_t k) const { return first_[k]; }
  std::span<const double> weights(std::size_t k) const {
    return {weights_.data() + offset_[k], offset_[k + 1] - offset_[k]};
  }

  // Q_k[u] for every interval.
  std::vector<double> integrate(std::span<const double> u) const {
    if (u.size() != grid_.n) throw ShapeError("IntervalBasis::integrate: length mismatch");
    std::vector<double> q(size());
    for (std::size_t k = 0; k < size(); ++k) {
      auto w = weights(k);
      const double* x = u.data() + first_[k];
      double s = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
      q[k] = grid_.dt * s;
    }
    return q;
  }

  // out += scale * sum_k beta_k w_k
  void accumulate(std::span<const double> beta, std::span<double> out, double scale = 1.0) const {
    if (beta.size() != size() || out.size() != grid_.n) throw ShapeError("IntervalBasis::accumulate");
    for (std::size_t k = 0; k < size(); ++k) {
      auto w = weights(k);
      double* o = out.data() + first_[k];
      const double bk = scale * beta[k];
      for (std::size_t j = 0; j < w.size(); ++j) o[j] += bk * w[j];
    }
  }

  std::vector<double> synthesize(std::span<const double> beta) const {
    std::vector<double> out(grid_.n, 0.0);
    accumulate(beta, out);
    return out;
  }

  // Gamma^{-1} r
  std::vector<double> solve_gram(std::span<const double> r) const {
    if (r.size() != size()) throw ShapeError("IntervalBasis::solve_gram: length mismatch");
    if (size() == 0) return {};
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::VectorXd x = llt_->solve(rv);
    return {x.data(), x.data() + x.size()};
  }

  const Eigen::SparseMatrix<double>& gram() const { return gram_; }

private:
  using Llt = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>>;

  void factor_gram() {
    const std::size_t K = size();
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t j = 0; j < K; ++j) {
      auto wj = weights(j);
      const std::size_t ej = first_[j] + wj.size();
      for (std::size_t k = j; k < K && first_[k] < ej; ++k) {
        auto wk = weights(k);
        const std::size_t lo = first_[k];
        const std::size_t hi = std::min(ej, first_[k] + wk.size());
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += wj[i - first_[j]] * wk[i - lo];
        s *= grid_.dt;
        if (s == 0.0) continue;
        trip.emplace_back(static_cast<int>(j), static_cast<int>(k), s);
        if (k != j) trip.emplace_back(static_cast<int>(k), static_cast<int>(j), s);
      }
    }
    gram_.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    gram_.setFromTriplets(trip.begin(), trip.end());
    if (K == 0) return;
    auto llt = std::make_shared<Llt>(gram_);
    if (llt->info() != Eigen::Success)
      throw InsufficientDataError("IntervalBasis: interval Gram matrix is singular (intervals too short for the grid)");
    llt_ = std::move(llt);
  }

  TimeGrid grid_;
  std::vector<std::size_t> first_;
  std::vector<std::size_t> offset_;
  std::vector<double> weights_;
  std::vector<double> length_;
  Eigen::SparseMatrix<double> gram_;
  // Shared so the basis stays copyable; never modified after construction.
  std::shared_ptr<const Llt> llt_;
};

} // namespace bptem
