#include <bptem/apocs.hpp>
#include <bptem/closed_form.hpp>
#include <bptem/metrics.hpp>
#include <bptem/test_signal.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace bptem;

namespace {
struct Problem {
  TimeGrid g;
  Signal x;
  IQPair iq;
  FiringSequence f;
  MeasurementSequence y;
  BandSpec band;
};

Problem small_problem(double f0 = 50.0) {
  TemParams p{1.0, 1.0 / 120.0, 3.0, 2.0};
  auto g = make_grid(-1.0, 1.0, std::max(16.0 * (f0 + 15.0), 1200.0));
  auto [x, iq] = gen_test_signal(f0, 10.0, 2.5, g);
  auto f = encode(x, p);
  auto y = measurements(f);
  return {g, x, iq, f, y, BandSpec(f0, 30.0)};
}

double rel_diff(const IQPair& a, const IQPair& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.grid().n; ++i) {
    num += std::pow(a.xi()[i] - b.xi()[i], 2) + std::pow(a.xq()[i] - b.xq()[i], 2);
    den += std::pow(b.xi()[i], 2) + std::pow(b.xq()[i], 2);
  }
  return std::sqrt(num / den);
}
} // namespace

// Oracle: G c must equal the interval integrals of the synthesized, recomposed signal.
TEST(ClosedForm, OperatorMatchesTimeDomainMeasurement) {
  auto pr = small_problem();
  auto sys = build_closed_form(pr.f, pr.y, pr.band, pr.g);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  Eigen::VectorXd c(static_cast<Eigen::Index>(sys.size()));
  for (auto& v : c) v = nd(rng);
  auto iq = sys.synthesize(c);
  auto q = sys.basis().integrate(modulate(iq, pr.band.f0).values());
  auto gc = sys.apply(c);
  Eigen::Map<Eigen::VectorXd> qv(q.data(), static_cast<Eigen::Index>(q.size()));
  EXPECT_LT((gc - qv).norm(), 1e-10 * qv.norm());
  EXPECT_LT((sys.matrix() * c - gc).norm(), 1e-12 * gc.norm());
}

TEST(ClosedForm, KernelsAreBandLimited) {
  auto pr = small_problem();
  auto sys = build_closed_form(pr.f, pr.y, pr.band, pr.g);
  auto k = sys.kernel(sys.size() / 2);
  auto li = lowpass(k.xi(), pr.g, 15.0);
  for (std::size_t i = 0; i < pr.g.n; ++i) EXPECT_NEAR(li[i], k.xi()[i], 1e-12);
}

TEST(ClosedForm, SvdReconstructsAndPinvMatchesDenseOracle) {
  auto pr = small_problem();
  auto sys = build_closed_form(pr.f, pr.y, pr.band, pr.g);
  auto G = sys.matrix();
  auto s = sys.svd();
  Eigen::MatrixXd rec = s.u * s.s.asDiagonal() * s.v.transpose();
  EXPECT_LT((rec - G).norm(), 1e-10 * G.norm());

  Eigen::BDCSVD<Eigen::MatrixXd> dense(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = dense.singularValues();
  EXPECT_NEAR(sv(0), s.s(0), 1e-10 * sv(0));
  Eigen::Map<const Eigen::VectorXd> q(sys.q().data(), static_cast<Eigen::Index>(sys.size()));
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > 1e-10 * sv(0)) ++r;
  Eigen::VectorXd coef = dense.matrixU().leftCols(r).transpose() * q;
  coef.array() /= sv.head(r).array();
  Eigen::VectorXd c_oracle = dense.matrixV().leftCols(r) * coef;
  auto sol = solve_closed_form_full(sys);
  EXPECT_EQ(sol.rank, static_cast<std::size_t>(r));
  EXPECT_LT(rel_diff(sol.iq, sys.synthesize(c_oracle)), 1e-6);
}

TEST(ClosedForm, RecoversTestSignal) {
  auto pr = small_problem();
  auto iq = solve_closed_form(build_closed_form(pr.f, pr.y, pr.band, pr.g));
  EXPECT_GT(sndr_db(pr.x, modulate(iq, 50.0)).sndr_db, 40.0);
  EXPECT_GT(sndr_db(pr.iq.in_phase(), iq.in_phase()).sndr_db, 40.0);
}

TEST(ClosedForm, MatchesApocsLimit) {
  auto pr = small_problem();
  auto cf = solve_closed_form(build_closed_form(pr.f, pr.y, pr.band, pr.g));
  IterConfig cfg;
  cfg.max_iter = 2000;
  cfg.rel_tol = 1e-12;
  auto ap = apocs(pr.f, pr.y, pr.band, pr.g, cfg);
  EXPECT_LT(rel_diff(ap.iq, cf), 1e-3);
}

TEST(ClosedForm, NeumannSumsEqualApocsIteratesAndApproachSolution) {
  auto pr = small_problem();
  auto sys = build_closed_form(pr.f, pr.y, pr.band, pr.g);
  auto cf = solve_closed_form(sys);
  double prev = 1e300;
  for (int L : {10, 50, 200}) {
    const double d = rel_diff(neumann_partial_sum(sys, L), cf);
    EXPECT_LT(d, prev);
    prev = d;
  }
  // APOCS iterate l >= 1 is the synthesized sum of the first l Neumann terms.
  IterConfig cfg;
  cfg.max_iter = 5;
  cfg.rel_tol = 1e-300;
  auto ap = apocs(pr.f, pr.y, pr.band, pr.g, cfg);
  EXPECT_LT(rel_diff(ap.iq, neumann_partial_sum(sys, 4)), 1e-9);
}

TEST(ClosedForm, ZeroMeasurementsAndErrors) {
  auto g = make_grid(-1.0, 1.0, 1600.0);
  TemParams p{1.0, 1.0 / 120.0, 3.0, 2.0};
  auto f = encode(Signal::zeros(g), p);
  auto y = measurements(f);
  auto sys = build_closed_form(f, y, BandSpec(50.0, 30.0), g);
  auto sol = solve_closed_form_full(sys);  // y is zero up to rounding
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_NEAR(sol.iq.xi()[i], 0.0, 1e-9);
  MeasurementSequence y0{std::vector<double>(y.size(), 0.0)};
  auto exact = solve_closed_form_full(build_closed_form(f, y0, BandSpec(50.0, 30.0), g));
  EXPECT_EQ(exact.rank, 0u);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_EQ(exact.iq.xi()[i], 0.0);

  FiringSequence one({0.0}, p, -1.0, 1.0);
  EXPECT_THROW(build_closed_form(one, MeasurementSequence{}, BandSpec(50.0, 30.0), g), InsufficientDataError);
  EXPECT_THROW(build_closed_form(f, y, BandSpec(790.0, 30.0), g), ParameterError);
  std::vector<double> many(closed_form_max_intervals + 2);
  for (std::size_t k = 0; k < many.size(); ++k) many[k] = -1.0 + 1.9 * static_cast<double>(k) / static_cast<double>(many.size());
  FiringSequence big(many, p, -1.0, 1.0);
  MeasurementSequence ybig{std::vector<double>(many.size() - 1, 0.0)};
  EXPECT_THROW(build_closed_form(big, ybig, BandSpec(50.0, 30.0), g), SizeError);
  EXPECT_THROW(build_closed_form(f, ybig, BandSpec(50.0, 30.0), g), ShapeError);
}
