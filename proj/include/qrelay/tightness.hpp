#pragma once

// Moment versus Bernstein restrictions of Pr(xi^T A xi + a^T xi >= t) <= rho
// for xi ~ N(0, I_m).

#include <qrelay/moment.hpp>
#include <qrelay/types.hpp>

#include <cmath>
#include <utility>

namespace qrelay {

struct GaussianQuadratic {
  RMat A;
  RVec a;
  double t = 0.0;

  int dim() const { return static_cast<int>(a.size()); }

  void validate() const {
    if (A.rows() != A.cols() || A.rows() != a.size())
      throw InvalidArgument("GaussianQuadratic: A must be m x m with m = len(a)");
    if (A.size() > 0 && (A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidArgument("GaussianQuadratic: A must be symmetric");
  }

  double evaluate(const RVec& xi) const { return xi.dot(A * xi) + a.dot(xi); }
};

enum class SecondMomentForm {
  Exact,    // ||a||^2 + 2||A||_F^2 + tr(A)^2
  Printed,  // ||a||^2 + ||A||_F^2 + tr(A)^2 + sum a_ii^2; exact only for diagonal A
};

inline double second_moment(const GaussianQuadratic& q,
                            SecondMomentForm form = SecondMomentForm::Exact) {
  q.validate();
  const double tr = q.A.trace();
  const double base = q.a.squaredNorm() + q.A.squaredNorm() + tr * tr;
  if (form == SecondMomentForm::Exact) return base + q.A.squaredNorm();
  return base + q.A.diagonal().squaredNorm();
}

inline double moment_rhs(const GaussianQuadratic& q, double rho,
                         SecondMomentForm form = SecondMomentForm::Exact) {
  check_rho(rho, "moment_rhs");
  return c_of_rho(rho) * std::sqrt(second_moment(q, form));
}

/// max(lambda_max(A), 0)
inline double s_plus(const RMat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMat> es(A, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues()(A.rows() - 1));
}

inline double bernstein_rhs(const GaussianQuadratic& q, double rho) {
  check_rho(rho, "bernstein_rhs");
  q.validate();
  const double ln = std::log(1.0 / rho);
  return q.A.trace() +
         2.0 * std::sqrt(ln) * std::sqrt(q.A.squaredNorm() + 0.5 * q.a.squaredNorm()) +
         2.0 * ln * s_plus(q.A);
}

/// Interval of rho on which the moment restriction provably dominates.
inline std::pair<double, double> rho_window() { return {std::exp(-8.0), 0.00045}; }

inline bool in_rho_window(double rho) {
  const auto [lo, hi] = rho_window();
  return rho > lo && rho < hi;
}

struct DominanceReport {
  double moment_rhs = 0.0;
  double bernstein_rhs = 0.0;
  bool dominated = false;
  bool in_window = false;
};

inline DominanceReport check_dominance(const GaussianQuadratic& q, double rho,
                                       SecondMomentForm form = SecondMomentForm::Exact) {
  DominanceReport r;
  r.moment_rhs = moment_rhs(q, rho, form);
  r.bernstein_rhs = bernstein_rhs(q, rho);
  r.dominated = r.moment_rhs >= r.bernstein_rhs;
  r.in_window = in_rho_window(rho);
  return r;
}

}  // namespace qrelay
