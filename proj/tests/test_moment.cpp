#include <qrelay/conic/solver.hpp>
#include <qrelay/moment.hpp>
#include <qrelay/outage.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace qrelay;
using Catch::Approx;

namespace {

HermitianMatrix random_hermitian(int n, Philox& g) {
  CMat B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = g.complex_normal();
  return HermitianMatrix(B);
}

// Monte-Carlo E[vec(M) vec(M)^H].
CMat empirical_U(const ChannelScenario& sc, const SystemParams& p, MomentOrder o, int n,
                 std::uint64_t seed) {
  const int L2 = p.L * p.L;
  CMat acc = CMat::Zero(L2, L2);
  Philox g(seed, 1);
  for (int s = 0; s < n; ++s) {
    const CVec v = vec(m_matrix(sample_perturbation(p.L, g), sc, p, o).matrix());
    acc.noalias() += v * v.adjoint();
  }
  return acc / n;
}

}  // namespace

TEST_CASE("q and c constants") {
  CHECK(q_of_rho(0.1) == 2.0);
  CHECK(q_of_rho(0.5) == 2.0);
  CHECK(q_of_rho(std::exp(-8.0)) ==
        Approx(2.0 + 2.0 * std::numbers::sqrt2).epsilon(1e-12));
  CHECK(c_of_rho(0.25) == 2.0);
  CHECK(c_of_rho(0.01) == Approx(10.0));
  const double q = q_of_rho(1e-6);
  CHECK(q > 2.0);
  CHECK(c_of_rho(1e-6) == Approx((q - 1) * (q - 1) * std::exp(2 * q / (q - 1))));
  CHECK_THROWS_AS(q_of_rho(0.0), InvalidArgument);
  CHECK_THROWS_AS(c_of_rho(1.0), InvalidArgument);
}

TEST_CASE("M4 reproduces the exact quartic") {
  Philox g(21);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int L = 1 + t % 5;
    SystemParams p = SystemParams::uniform(L, 1.0 + 10.0 * g.uniform_pos(),
                                           0.5 + 5.0 * g.uniform_pos(), 0.1, 0.25, 0.25);
    for (int i = 0; i < L; ++i) p.sigma2(i) = 0.1 + g.uniform_pos();
    const auto sc = sample_channel(p, 500 + t, g.uniform_pos(), g.uniform_pos());
    const auto W = random_hermitian(L, g);
    const auto pr = sample_perturbation(L, g);
    const double lhs = inner(W, m_matrix(pr, sc, p, MomentOrder::Fourth)) - a0(W, sc, p);
    const double rhs = exact_Q(W, pr, sc, p);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("M2 is the degree-2 truncation") {
  Philox g(22);
  const auto p = SystemParams::uniform(3, 10.0, 2.0, 0.1, 0.25, 0.25);
  const auto sc = sample_channel(p, 4, 0.4, 0.5);
  for (int t = 0; t < 20; ++t) {
    const auto W = random_hermitian(3, g);
    const auto pr = sample_perturbation(3, g);
    // Q(t) = sum_{d<=4} c_d t^d; fit on 5 nodes and keep d <= 2
    RMat V(5, 5);
    RVec q(5);
    for (int k = 0; k < 5; ++k) {
      const double s = -1.0 + 0.5 * k;
      for (int d = 0; d < 5; ++d) V(k, d) = std::pow(s, d);
      q(k) = exact_Q(W, pr.scaled(s), sc, p);
    }
    const RVec c = V.fullPivLu().solve(q);
    const double trunc = c(0) + c(1) + c(2);
    const double m2 = inner(W, m_matrix(pr, sc, p, MomentOrder::Second)) - a0(W, sc, p);
    CHECK(m2 == Approx(trunc).epsilon(1e-8).margin(1e-10));
  }
}

TEST_CASE("U matches a Monte-Carlo second moment") {
  const auto p = SystemParams::uniform(2, 10.0, 2.0, 0.1, 0.25, 0.25);
  const auto sc = sample_channel(p, 42, 0.5, 0.6);
  for (auto o : {MomentOrder::Fourth, MomentOrder::Second}) {
    const CMat emp = empirical_U(sc, p, o, 200000, 9);
    const auto mc = coefficients(sc, p, o);
    const double err_exact = (assemble_U(mc, UForm::Exact) - emp).norm() / emp.norm();
    const double err_printed = (assemble_U(mc, UForm::Printed) - emp).norm() / emp.norm();
    INFO(to_string(o) << " exact " << err_exact << " printed " << err_printed);
    CHECK(err_exact < 0.03);
    CHECK(err_printed > 3.0 * err_exact);
  }
}

TEST_CASE("U has the tabulated structure") {
  SystemParams p = SystemParams::uniform(1, 3.0, 1.5, 0.1, 0.25, 0.4);
  const auto sc = sample_channel(p, 5, 0.3, 0.2);
  for (auto o : {MomentOrder::Fourth, MomentOrder::Second}) {
    const auto mc = coefficients(sc, p, o);
    CHECK(mc.num_d() == (o == MomentOrder::Fourth ? 15 : 10));
    double s = 0.0;
    for (int m = 0; m < 9; ++m) s += std::norm(mc.C(0, m));
    const CMat Up = assemble_U(mc, UForm::Printed);
    CHECK(Up(0, 0).real() == Approx(s).epsilon(1e-14));
    CHECK(assemble_U(mc, UForm::Exact)(0, 0).real() == Approx(s + mc.diag_extra(0)));
  }

  const auto p4 = SystemParams::uniform(4, 10.0, 3.0, 0.1, 0.25, 0.25);
  const auto sc4 = sample_channel(p4, 6, 0.3, 0.3);
  const auto um = build_U(coefficients(sc4, p4, MomentOrder::Fourth));
  CHECK((um.U - um.U.adjoint()).norm() < 1e-12 * um.U.norm());
  CHECK(um.min_eig > -1e-6 * um.max_eig);
  CHECK((um.sqrt_U * um.sqrt_U - um.U).norm() < 1e-8 * um.U.norm());
}

TEST_CASE("restriction norm equals the second moment of W.M") {
  const auto p = SystemParams::uniform(2, 5.0, 2.0, 0.1, 0.25, 0.25);
  const auto sc = sample_channel(p, 8, 0.4, 0.3);
  Philox g(23);
  const auto W = random_hermitian(2, g);
  const auto um = build_U(coefficients(sc, p, MomentOrder::Fourth));
  const double closed = (um.sqrt_U * vec(W.matrix())).squaredNorm();
  double acc = 0.0;
  const int n = 200000;
  Philox r(24);
  for (int s = 0; s < n; ++s) {
    const double v = inner(W, m_matrix(sample_perturbation(2, r), sc, p, MomentOrder::Fourth));
    acc += v * v;
  }
  CHECK(acc / n == Approx(closed).epsilon(0.03));
}

TEST_CASE("error-free scenario collapses the restriction") {
  const auto p = SystemParams::uniform(4, 10.0, db_to_linear(10), 0.1, 0.25, 0.25);
  const auto sc = sample_channel(p, 9, 0.0, 0.0);
  const auto um = build_U(coefficients(sc, p, MomentOrder::Fourth));
  CHECK(um.U.norm() == 0.0);
}

TEST_CASE("moment programs solve to an active restriction") {
  const auto p = SystemParams::uniform(4, 10.0, db_to_linear(12), 0.1, 0.25, 0.25);
  int solved = 0;
  for (int s = 0; s < 10; ++s) {
    const auto sc = sample_channel(p, 300 + s, std::sqrt(0.01), std::sqrt(0.01));
    for (auto o : {MomentOrder::Fourth, MomentOrder::Second}) {
      const auto sp = build_problem(sc, p, o);
      const auto sol = conic::solve(sp.program);
      if (sol.status == conic::SolveStatus::Infeasible) continue;
      REQUIRE(sol.optimal());
      ++solved;
      const HermitianMatrix W(sp.W_of(sol.x));
      CHECK(W.eigenvalues().minCoeff() >= -1e-7 * W.eigenvalues().maxCoeff());
      CHECK(sp.margin(W) >= -1e-6);
      CHECK(sp.margin(W) <= 1e-5 * (1.0 + sp.linear_part(W)));
      CHECK(sol.objective == Approx(inner(avg_power_matrix(sc, p), W)).epsilon(1e-9));
      CHECK(sp.margin(W) ==
            Approx(a0(W, sc, p) - sp.c * (sp.U.sqrt_U * vec(W.matrix())).norm()).margin(1e-9));
    }
  }
  CHECK(solved >= 10);
}

TEST_CASE("outage of a second-order design is seed-stable") {
  const auto p = SystemParams::uniform(4, 10.0, db_to_linear(12), 0.1, 0.25, 0.25);
  const auto sc = sample_channel(p, 77, std::sqrt(0.01), std::sqrt(0.01));
  const auto sp = build_problem(sc, p, MomentOrder::Second);
  const auto sol = conic::solve(sp.program);
  REQUIRE(sol.optimal());
  const HermitianMatrix W(sp.W_of(sol.x));
  const int n = 10000;
  const double r1 = outage_estimate(W, sc, p, n, 1);
  const double r2 = outage_estimate(W, sc, p, n, 2);
  CHECK(std::abs(r1 - r2) <= 3.0 * std::sqrt(p.rho * (1 - p.rho) / n));
  CHECK(r1 <= p.rho);
}
