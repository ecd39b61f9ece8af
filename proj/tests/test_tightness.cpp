#include <qrelay/harness/analysis.hpp>
#include <qrelay/tightness.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace qrelay;
using Catch::Approx;

namespace {

GaussianQuadratic quad(const RMat& A, const RVec& a) { return {A, a, 0.0}; }

GaussianQuadratic random_quad(int m, Philox& g) { return harness::random_quadratic(m, g); }

}  // namespace

TEST_CASE("second moment closed form") {
  RMat E1 = RMat::Zero(3, 3);
  E1(0, 0) = 1.0;
  CHECK(second_moment(quad(E1, RVec::Zero(3))) == 3.0);
  CHECK(second_moment(quad(E1, RVec::Zero(3)), SecondMomentForm::Printed) == 3.0);

  RVec a(3);
  a << 1.0, -2.0, 0.5;
  CHECK(second_moment(quad(RMat::Zero(3, 3), a)) == Approx(a.squaredNorm()));
  CHECK(second_moment(quad(RMat::Identity(2, 2), RVec::Zero(2))) == 8.0);

  CHECK_THROWS_AS(second_moment(quad(RMat::Zero(2, 3), RVec::Zero(2))), InvalidArgument);
  RMat asym = RMat::Zero(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(second_moment(quad(asym, RVec::Zero(2))), InvalidArgument);
}

TEST_CASE("second moment against Monte-Carlo") {
  Philox g(41);
  const auto q = random_quad(5, g);
  double acc = 0.0;
  const int n = 1000000;
  RVec xi(5);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < 5; ++i) xi(i) = g.normal();
    const double v = q.evaluate(xi);
    acc += v * v;
  }
  const double mc = acc / n;
  CHECK(second_moment(q) == Approx(mc).epsilon(0.02));
  // the printed variant drops half of the off-diagonal contribution
  RMat off = q.A;
  off.diagonal().setZero();
  CHECK(second_moment(q) - second_moment(q, SecondMomentForm::Printed) ==
        Approx(off.squaredNorm()));
}

TEST_CASE("moment and Bernstein right-hand sides") {
  RMat E1 = RMat::Zero(1, 1);
  E1(0, 0) = 1.0;
  CHECK(moment_rhs(quad(E1, RVec::Zero(1)), 0.01) == Approx(std::sqrt(300.0)));
  RVec e1 = RVec::Zero(2);
  e1(0) = 1.0;
  CHECK(moment_rhs(quad(RMat::Zero(2, 2), e1), 0.25) == Approx(2.0));
  CHECK(moment_rhs(quad(RMat::Identity(2, 2), RVec::Zero(2)), 0.0004) ==
        Approx(141.421356).epsilon(1e-6));

  const double ln = std::log(2500.0);
  const double b = bernstein_rhs(quad(RMat::Identity(2, 2), RVec::Zero(2)), 0.0004);
  CHECK(b == Approx(2.0 + 2.0 * std::sqrt(ln) * std::sqrt(2.0) + 2.0 * ln));
  CHECK(b == Approx(25.56).margin(0.005));

  const double rho = 0.05, l = std::log(1.0 / rho);
  CHECK(bernstein_rhs(quad(-RMat::Identity(3, 3), RVec::Zero(3)), rho) ==
        Approx(-3.0 + 2.0 * std::sqrt(l) * std::sqrt(3.0)));
  RVec a(3);
  a << 0.3, -1.2, 2.0;
  CHECK(bernstein_rhs(quad(RMat::Zero(3, 3), a), rho) ==
        Approx(std::sqrt(2.0 * l) * a.norm()));
  CHECK_THROWS_AS(bernstein_rhs(quad(RMat::Zero(1, 1), RVec::Zero(1)), 1.0), InvalidArgument);
}

TEST_CASE("rho window") {
  const auto [lo, hi] = rho_window();
  CHECK(lo == std::exp(-8.0));
  CHECK(hi == 0.00045);
  CHECK(lo == Approx(0.000335).margin(1e-6));
  CHECK(in_rho_window(0.00044));
  CHECK_FALSE(in_rho_window(0.001));
  CHECK_FALSE(in_rho_window(lo));
}

TEST_CASE("dominance report") {
  const auto r = check_dominance(quad(RMat::Identity(2, 2), RVec::Zero(2)), 0.0004);
  CHECK(r.moment_rhs == Approx(141.421356).epsilon(1e-6));
  CHECK(r.bernstein_rhs == Approx(25.56).margin(0.005));
  CHECK(r.dominated);
  CHECK(r.in_window);
  CHECK_FALSE(check_dominance(quad(RMat::Identity(2, 2), RVec::Zero(2)), 0.3).in_window);
}

TEST_CASE("dominance holds across the window") {
  Philox g(42);
  const auto grid = harness::window_grid(20);
  int violations = 0, violations_printed = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto q = random_quad(1 + t % 8, g);
    for (double rho : grid) {
      violations += !check_dominance(q, rho).dominated;
      violations_printed += !check_dominance(q, rho, SecondMomentForm::Printed).dominated;
    }
  }
  CHECK(violations == 0);
  CHECK(violations_printed == 0);
}

TEST_CASE("norm chain used by the dominance argument") {
  Philox g(43);
  for (int t = 0; t < 2000; ++t) {
    const auto q = random_quad(1 + t % 8, g);
    const double x = q.a.norm(), y = q.A.norm(), z = std::abs(q.A.trace());
    CHECK(std::sqrt(x * x + y * y + z * z) >= (x + y + z) / std::sqrt(3.0) - 1e-12);
    CHECK(s_plus(q.A) <= q.A.norm() + 1e-12);
    CHECK(std::sqrt(y * y / 16 + x * x) + 0.75 * y >= std::sqrt(y * y + 0.5 * x * x) - 1e-12);
  }
}

TEST_CASE("proof thresholds hold exactly on the window") {
  const auto [lo, hi] = rho_window();
  auto holds = [](double r) {
    const double l = std::log(1.0 / r);
    return 1.0 / (4.0 * std::sqrt(3.0 * r)) >= 2.0 * std::sqrt(l) &&
           std::sqrt(3.0) / (4.0 * std::sqrt(r)) >= 2.0 * l;
  };
  for (int k = 1; k <= 1000; ++k) CHECK(holds(lo + (hi - lo) * k / 1001.0));
  CHECK_FALSE(holds(0.001));
}

TEST_CASE("right-hand sides are positively homogeneous") {
  Philox g(44);
  for (int t = 0; t < 200; ++t) {
    const auto q = random_quad(1 + t % 8, g);
    const double alpha = 0.1 + 5.0 * g.uniform_pos();
    const auto qs = quad(alpha * q.A, alpha * q.a);
    for (double rho : {0.0004, 0.01, 0.2}) {
      CHECK(moment_rhs(qs, rho) == Approx(alpha * moment_rhs(q, rho)).epsilon(1e-12));
      CHECK(bernstein_rhs(qs, rho) ==
            Approx(alpha * bernstein_rhs(q, rho)).epsilon(1e-10).margin(1e-12));
    }
  }
}
