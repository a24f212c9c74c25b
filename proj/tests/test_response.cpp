#include <gtest/gtest.h>

#include "support.hpp"

using namespace qpm;
using namespace qpm::testing;

namespace {

double scalar_im_alpha(double w) { return (1.0 / cd(w * w - 2.0, w)).imag(); }

}  // namespace

TEST(Direct, StaticRealResponseIsReal) {
  Gen g(1);
  const auto s = random_hermitian_spec(g, 5);
  const auto t = polarizability_direct(s, Kick{g.real_vector(5, 1.0)}, RVec::Zero(1));
  EXPECT_EQ(t.im_alpha(0), 0.0);
}

TEST(Direct, UndampedOffResonance) {
  const auto t = polarizability_direct(scalar_spec(1.0, 0.0), Kick{RVec::Ones(1)}, RVec::LinSpaced(5, 0.1, 0.9));
  EXPECT_EQ(t.im_alpha.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Direct, ScalarDampedAtSqrtTwo) {
  RVec w(1);
  w << std::sqrt(2.0);
  const auto t = polarizability_direct(scalar_spec(2.0, 0.5), Kick{RVec::Ones(1)}, w);
  EXPECT_NEAR(t.im_alpha(0), -1.0 / std::sqrt(2.0), 1e-14);
}

TEST(Direct, SingularOnResonance) {
  RVec w(1);
  w << 1.0;
  EXPECT_THROW(polarizability_direct(scalar_spec(1.0, 0.0), Kick{RVec::Ones(1)}, w), SingularAtFrequency);
}

TEST(Decompose, UnitOscillatorIntercepts) {
  const auto s = scalar_spec(1.0, 0.0);
  const auto p = prepare(s, Basis::symmetric_kappa);
  const auto l = decompose_modes(p.eig, s, Kick{RVec::Ones(1)});
  std::vector<double> I{l.intercept(0).real(), l.intercept(1).real()};
  std::sort(I.begin(), I.end());
  EXPECT_NEAR(I[0], 0.0, 1e-15);
  EXPECT_NEAR(I[1], 1.0, 1e-15);
  EXPECT_LT(l.angle.norm(), 1e-15);
  for (double w : {0.3, 2.0}) {
    double sa = 0.0, sd = 0.0;
    for (Eigen::Index k = 0; k < 2; ++k) {
      sa += l.coefficient(k, w).real();
      sd += l.coefficient(k, w).imag();
    }
    EXPECT_NEAR(sa, 1.0, 1e-15);
    EXPECT_NEAR(sd, 0.0, 1e-15);
  }
}

TEST(Decompose, SumRule) {
  Gen g(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_general_spec(g, g.integer(1, 10));
    const Kick kick{g.real_vector(s.n, 1.0)};
    const auto l = decompose_modes(prepare(s).eig, s, kick);
    const double fr = kick.f.dot(s.gen_coord_vector);
    EXPECT_LT(std::abs(l.trace_fR - fr), 1e-15);
    for (double w : {0.0, 0.7, 3.1, 11.0}) {
      double total = 0.0;
      for (Eigen::Index k = 0; k < l.size(); ++k) total += l.coefficient(k, w).real() + l.coefficient(k, w).imag();
      EXPECT_LT(std::abs(total - fr), 1e-9 * std::max(1.0, std::abs(fr)));
    }
  }
}

TEST(Decompose, MatchesBruteForceDiagonal) {
  Gen g(3);
  const Eigen::Index n = 6;
  const auto s = random_general_spec(g, n);
  const Kick kick{g.real_vector(n, 1.0)};
  const auto p = prepare(s);
  const auto l = decompose_modes(p.eig, s, kick);
  const Mat fR = kick.f.cast<cd>() * s.gen_coord_vector.cast<cd>().transpose();
  for (int i = 0; i < 5; ++i) {
    const double w = g.uniform(-5.0, 5.0);
    Mat inner = Mat::Zero(2 * n, 2 * n);
    inner.topLeftCorner(n, n) = fR;
    Mat d = 2.0 * s.damping;
    d.diagonal().array() += I_unit * w;
    inner.bottomLeftCorner(n, n) = -d * fR;
    const Mat C = p.eig.inverse_vectors * inner * p.eig.right_vectors;
    for (Eigen::Index k = 0; k < l.size(); ++k)
      EXPECT_LT(std::abs(C(k, k) - l.coefficient(k, w)), 1e-10 * (1.0 + std::abs(C(k, k))));
  }
}

TEST(Decompose, LinearInAmplitude) {
  Gen g(4);
  const auto s = random_general_spec(g, 4);
  const auto p = prepare(s);
  const RVec f = g.real_vector(4, 1.0);
  const auto a = decompose_modes(p.eig, s, Kick{f});
  const auto b = decompose_modes(p.eig, s, Kick{3.0 * f});
  EXPECT_LT((b.intercept - 3.0 * a.intercept).norm(), 1e-13 * b.intercept.norm());
  EXPECT_LT((b.angle - 3.0 * a.angle).norm(), 1e-13 * (1.0 + b.angle.norm()));
  const RVec grid = RVec::LinSpaced(30, 0.0, 5.0);
  const auto ta = reconstruct_spectrum(a, all_modes(a), grid);
  const auto tb = reconstruct_spectrum(b, all_modes(b), grid);
  EXPECT_LT((tb.im_alpha - 3.0 * ta.im_alpha).norm(), 1e-12 * tb.im_alpha.norm());
}

TEST(Decompose, ConjugatePairsCancelImaginaryTrace) {
  Gen g(5);
  MediumSpec s = skeleton(g, 5);
  const RMat a = g.real_matrix(5, 5, 1.0);
  s.kernel = (a + a.transpose() + 6.0 * RMat::Identity(5, 5)).cast<cd>();
  s.damping = (0.1 * RMat::Identity(5, 5) + 0.02 * g.real_matrix(5, 5, 1.0)).cast<cd>();
  const auto l = decompose_modes(prepare(s).eig, s, Kick{g.real_vector(5, 1.0)});
  for (double w : {0.0, 1.5, 4.0}) {
    double im = 0.0;
    for (Eigen::Index k = 0; k < l.size(); ++k) im += l.coefficient(k, w).imag();
    EXPECT_LT(std::abs(im), 1e-12);
  }
}

TEST(Reconstruct, FullSelectionMatchesDirect) {
  Gen g(6);
  for (int trial = 0; trial < 8; ++trial) {
    const auto s = random_general_spec(g, g.integer(1, 20));
    const Kick kick{g.real_vector(s.n, 1.0)};
    const RVec grid = frequency_grid(0.0, 8.0, 0.04);
    const auto direct = polarizability_direct(s, kick, grid);
    const auto l = decompose_modes(prepare(s).eig, s, kick);
    const auto rec = reconstruct_spectrum(l, all_modes(l), grid);
    EXPECT_LT(relative_linf(rec.im_alpha, direct.im_alpha), 1e-8);
    EXPECT_LT((rec.im_alpha - rec.absorptive - rec.dispersive).norm(), 1e-15 * (1.0 + rec.im_alpha.norm()));
  }
}

TEST(Reconstruct, EmptySelectionIsZero) {
  Gen g(7);
  const auto s = random_general_spec(g, 3);
  const auto l = decompose_modes(prepare(s).eig, s, Kick{g.real_vector(3, 1.0)});
  const auto t = reconstruct_spectrum(l, {}, RVec::LinSpaced(10, 0.0, 3.0));
  EXPECT_EQ(t.im_alpha.norm(), 0.0);
}

TEST(Reconstruct, ScalarClosedForm) {
  const auto s = scalar_spec(2.0, 0.5);
  const auto l = decompose_modes(prepare(s).eig, s, Kick{RVec::Ones(1)});
  const RVec grid = frequency_grid(0.0, 5.0, 0.01);
  const auto t = reconstruct_spectrum(l, all_modes(l), grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) EXPECT_NEAR(t.im_alpha(i), scalar_im_alpha(grid(i)), 1e-10);
}

TEST(Grid, InclusiveEndpoints) {
  const RVec g = frequency_grid(0.0, 7.0, 0.01);
  EXPECT_EQ(g.size(), 701);
  EXPECT_EQ(g(700), 700 * 0.01);
  EXPECT_EQ(frequency_grid(1.0, 1.0, 0.5).size(), 1);
  EXPECT_THROW(frequency_grid(0.0, 1.0, 0.0), InvalidSpec);
  EXPECT_THROW(frequency_grid(1.0, 0.0, 0.1), InvalidSpec);
}

TEST(Filter, EigenvalueWindow) {
  const auto s = scalar_spec(2.0, 0.5);
  const auto l = decompose_modes(prepare(s).eig, s, Kick{RVec::Ones(1)});
  EXPECT_EQ(filter_eigenvalue(l, 1.0, 1.5).size(), 2u);
  EXPECT_TRUE(filter_eigenvalue(l, 0.0, 0.0).empty());
  EXPECT_THROW(filter_eigenvalue(l, 2.0, 1.0), InvalidSpec);
  Gen g(8);
  const auto r = random_general_spec(g, 7);
  const auto lr = decompose_modes(prepare(r).eig, r, Kick{g.real_vector(7, 1.0)});
  EXPECT_EQ(filter_eigenvalue(lr, 0.0, lr.mu.cwiseAbs().maxCoeff()).size(), 14u);
}

TEST(Filter, InterceptThresholds) {
  Gen g(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_general_spec(g, g.integer(2, 12));
    const auto l = decompose_modes(prepare(s).eig, s, Kick{g.real_vector(s.n, 1.0)});
    const double top = l.intercept.real().cwiseAbs().maxCoeff();
    EXPECT_TRUE(filter_intercept(l, top * 1.01).empty());
    std::size_t nonzero = 0;
    for (Eigen::Index k = 0; k < l.size(); ++k) nonzero += l.intercept(k).real() != 0.0;
    EXPECT_EQ(filter_intercept(l, 0.0).size(), nonzero);
    IndexSet prev;
    for (double t : {top, 0.5 * top, 0.1 * top, 0.01 * top, 0.0}) {
      const IndexSet cur = filter_intercept(l, t);
      EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
    EXPECT_THROW(filter_intercept(l, -1.0), InvalidSpec);
  }
}

TEST(Filter, TopIntercepts) {
  Gen g(10);
  const auto s = random_general_spec(g, 6);
  const auto l = decompose_modes(prepare(s).eig, s, Kick{g.real_vector(6, 1.0)});
  const IndexSet top = top_intercepts(l, 3);
  ASSERT_EQ(top.size(), 3u);
  double smallest_in = std::numeric_limits<double>::infinity(), largest_out = 0.0;
  for (Eigen::Index k = 0; k < l.size(); ++k) {
    const double v = std::abs(l.intercept(k).real());
    if (std::find(top.begin(), top.end(), k) != top.end()) smallest_in = std::min(smallest_in, v);
    else largest_out = std::max(largest_out, v);
  }
  EXPECT_GE(smallest_in, largest_out);
}
