#pragma once

// Product-cone algebra used by the interior-point solver: Jordan products,
// Nesterov-Todd scalings and step-length computations for nonnegative
// orthants, second-order cones and PSD cones (in svec coordinates).

#include <qrelay/conic/program.hpp>

#include <algorithm>
#include <limits>
#include <vector>

namespace qrelay::conic::detail {

struct ConeSlice {
  Cone cone;
  int offset = 0;
  int dim() const { return cone.dim(); }
};

/// Per-cone NT scaling W with W z = W^{-T} s = lambda.
struct ConeScaling {
  // Nonneg: d = sqrt(s/z), W = diag(d).
  RVec d;
  // SOC: W = beta (2 v v^T - J), symmetric, with v^T J v = 1.
  double beta = 1.0;
  RVec v;
  // PSD: W(U) = R^T U R, W^{-1}(U) = Rinv^T U Rinv.
  RMat R, Rinv;
};

class ProductCone {
 public:
  ProductCone() = default;
  explicit ProductCone(const std::vector<Cone>& cones) {
    int off = 0;
    for (const auto& c : cones) {
      slices_.push_back({c, off});
      off += c.dim();
      degree_ += (c.type == ConeType::Nonneg) ? c.size
                 : (c.type == ConeType::SOC)  ? 1
                                              : c.size;
    }
    dim_ = off;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<ConeSlice>& slices() const { return slices_; }

  RVec identity() const {
    RVec e = RVec::Zero(dim_);
    for (const auto& sl : slices_) {
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          e.segment(sl.offset, sl.dim()).setOnes();
          break;
        case ConeType::SOC:
          e(sl.offset) = 1.0;
          break;
        case ConeType::PSD:
          e.segment(sl.offset, sl.dim()) = svec(RMat::Identity(sl.cone.size, sl.cone.size));
          break;
        case ConeType::Zero:
          break;
      }
    }
    return e;
  }

  /// Smallest "eigenvalue" of v in the Jordan-algebra sense; positive iff v
  /// is interior.
  double min_eig(const RVec& v) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& sl : slices_) {
      const auto seg = v.segment(sl.offset, sl.dim());
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          m = std::min(m, seg.minCoeff());
          break;
        case ConeType::SOC:
          m = std::min(m, seg(0) - seg.tail(sl.dim() - 1).norm());
          break;
        case ConeType::PSD: {
          Eigen::SelfAdjointEigenSolver<RMat> es(smat(seg, sl.cone.size),
                                                 Eigen::EigenvaluesOnly);
          m = std::min(m, es.eigenvalues()(0));
          break;
        }
        case ConeType::Zero:
          break;
      }
    }
    return m;
  }

  /// u o v.
  RVec jordan(const RVec& u, const RVec& v) const {
    RVec r(dim_);
    for (const auto& sl : slices_) {
      const int o = sl.offset, n = sl.dim();
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          r.segment(o, n) = u.segment(o, n).cwiseProduct(v.segment(o, n));
          break;
        case ConeType::SOC:
          r(o) = u.segment(o, n).dot(v.segment(o, n));
          r.segment(o + 1, n - 1) =
              u(o) * v.segment(o + 1, n - 1) + v(o) * u.segment(o + 1, n - 1);
          break;
        case ConeType::PSD: {
          const int k = sl.cone.size;
          const RMat U = smat(u.segment(o, n), k), V = smat(v.segment(o, n), k);
          r.segment(o, n) = svec(0.5 * (U * V + V * U));
          break;
        }
        case ConeType::Zero:
          break;
      }
    }
    return r;
  }

  /// Solves lambda o x = d for x. PSD parts of lambda must be diagonal,
  /// which holds for NT-scaled points.
  RVec jordan_div(const RVec& lambda, const RVec& d) const {
    RVec x(dim_);
    for (const auto& sl : slices_) {
      const int o = sl.offset, n = sl.dim();
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          x.segment(o, n) = d.segment(o, n).cwiseQuotient(lambda.segment(o, n));
          break;
        case ConeType::SOC: {
          const double l0 = lambda(o);
          const auto l1 = lambda.segment(o + 1, n - 1);
          const double det = jnorm2(lambda.segment(o, n));
          const double x0 = (l0 * d(o) - l1.dot(d.segment(o + 1, n - 1))) / det;
          x(o) = x0;
          x.segment(o + 1, n - 1) = (d.segment(o + 1, n - 1) - x0 * l1) / l0;
          break;
        }
        case ConeType::PSD: {
          const int k = sl.cone.size;
          const RVec lam = smat(lambda.segment(o, n), k).diagonal();
          RMat D = smat(d.segment(o, n), k);
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) D(i, j) *= 2.0 / (lam(i) + lam(j));
          x.segment(o, n) = svec(D);
          break;
        }
        case ConeType::Zero:
          break;
      }
    }
    return x;
  }

  /// Largest alpha with lambda + alpha * d in the cone (lambda interior).
  /// Returns +inf when unbounded.
  double max_step(const RVec& lambda, const RVec& d) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (const auto& sl : slices_) {
      const int o = sl.offset, n = sl.dim();
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          for (int i = o; i < o + n; ++i)
            if (d(i) < 0.0) alpha = std::min(alpha, -lambda(i) / d(i));
          break;
        case ConeType::SOC: {
          const auto lk = lambda.segment(o, n);
          const auto dk = d.segment(o, n);
          const double lnorm2 = jnorm2(lk);
          if (lnorm2 <= 0.0) {
            alpha = 0.0;
            break;
          }
          const double lnorm = std::sqrt(lnorm2);
          const RVec lbar = lk / lnorm;
          const double ld = lbar(0) * dk(0) - lbar.tail(n - 1).dot(dk.tail(n - 1));
          const double rho0 = ld / lnorm;
          const double factor = (ld + dk(0)) / (lbar(0) + 1.0);
          const RVec rho1 = (dk.tail(n - 1) - factor * lbar.tail(n - 1)) / lnorm;
          const double sigma = rho1.norm() - rho0;
          if (sigma > 0.0) alpha = std::min(alpha, 1.0 / sigma);
          break;
        }
        case ConeType::PSD: {
          const int k = sl.cone.size;
          const RVec lam = smat(lambda.segment(o, n), k).diagonal();
          RMat D = smat(d.segment(o, n), k);
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) D(i, j) /= std::sqrt(lam(i) * lam(j));
          Eigen::SelfAdjointEigenSolver<RMat> es(D, Eigen::EigenvaluesOnly);
          const double mn = es.eigenvalues()(0);
          if (mn < 0.0) alpha = std::min(alpha, -1.0 / mn);
          break;
        }
        case ConeType::Zero:
          break;
      }
    }
    return alpha;
  }

  /// NT scaling at (s, z); returns lambda = W z.
  RVec compute_scaling(const RVec& s, const RVec& z,
                       std::vector<ConeScaling>& W) const {
    W.assign(slices_.size(), {});
    RVec lambda(dim_);
    for (std::size_t c = 0; c < slices_.size(); ++c) {
      const auto& sl = slices_[c];
      const int o = sl.offset, n = sl.dim();
      auto& w = W[c];
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          w.d = (s.segment(o, n).cwiseQuotient(z.segment(o, n))).cwiseSqrt();
          lambda.segment(o, n) = (s.segment(o, n).cwiseProduct(z.segment(o, n))).cwiseSqrt();
          break;
        case ConeType::SOC: {
          const auto sk = s.segment(o, n);
          const auto zk = z.segment(o, n);
          const double sJs = jnorm2(sk);
          const double zJz = jnorm2(zk);
          const double sn = std::sqrt(sJs), zn = std::sqrt(zJz);
          const RVec sbar = sk / sn;
          const RVec zbar = zk / zn;
          const double gam = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
          RVec wbar(n);
          wbar(0) = (sbar(0) + zbar(0)) / (2.0 * gam);
          wbar.tail(n - 1) = (sbar.tail(n - 1) - zbar.tail(n - 1)) / (2.0 * gam);
          w.v = wbar;
          w.v(0) += 1.0;
          w.v /= std::sqrt(2.0 * (wbar(0) + 1.0));
          w.beta = std::sqrt(sn / zn);
          lambda.segment(o, n) = apply_soc(w, zk);
          break;
        }
        case ConeType::PSD: {
          const int k = sl.cone.size;
          const RMat Ls = sym_factor(smat(s.segment(o, n), k));
          const RMat Lz = sym_factor(smat(z.segment(o, n), k));
          Eigen::JacobiSVD<RMat> svd(Lz.transpose() * Ls,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
          const RVec sv = svd.singularValues();
          const RVec isq = sv.cwiseSqrt().cwiseInverse();
          w.R = Ls * svd.matrixV() * isq.asDiagonal();
          w.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
          RMat Lam = RMat::Zero(k, k);
          Lam.diagonal() = sv;
          lambda.segment(o, n) = svec(Lam);
          break;
        }
        case ConeType::Zero:
          break;
      }
    }
    return lambda;
  }

  enum class Op { W, WT, Winv, WinvT };

  /// Applies one of W, W^T, W^{-1}, W^{-T} to a vector.
  RVec apply(const std::vector<ConeScaling>& W, Op op, const RVec& v) const {
    RVec r(dim_);
    for (std::size_t c = 0; c < slices_.size(); ++c) {
      const auto& sl = slices_[c];
      const int o = sl.offset, n = sl.dim();
      const auto& w = W[c];
      const auto vk = v.segment(o, n);
      switch (sl.cone.type) {
        case ConeType::Nonneg:
          if (op == Op::W || op == Op::WT)
            r.segment(o, n) = vk.cwiseProduct(w.d);
          else
            r.segment(o, n) = vk.cwiseQuotient(w.d);
          break;
        case ConeType::SOC:
          if (op == Op::W || op == Op::WT)
            r.segment(o, n) = apply_soc(w, vk);
          else
            r.segment(o, n) = apply_soc_inv(w, vk);
          break;
        case ConeType::PSD: {
          const int k = sl.cone.size;
          const RMat U = smat(vk, k);
          RMat out;
          switch (op) {
            case Op::W: out = w.R.transpose() * U * w.R; break;
            case Op::WT: out = w.R * U * w.R.transpose(); break;
            case Op::Winv: out = w.Rinv.transpose() * U * w.Rinv; break;
            case Op::WinvT: out = w.Rinv * U * w.Rinv.transpose(); break;
          }
          r.segment(o, n) = svec(out);
          break;
        }
        case ConeType::Zero:
          break;
      }
    }
    return r;
  }

  RMat apply_cols(const std::vector<ConeScaling>& W, Op op, const RMat& M) const {
    RMat r(M.rows(), M.cols());
    for (int j = 0; j < M.cols(); ++j) r.col(j) = apply(W, op, M.col(j));
    return r;
  }

 private:
  // u0^2 - ||u1||^2, factored to avoid cancellation near the boundary.
  template <typename V>
  static double jnorm2(const V& u) {
    const double t = u.tail(u.size() - 1).norm();
    return (u(0) - t) * (u(0) + t);
  }

  static RVec apply_soc(const ConeScaling& w, const Eigen::Ref<const RVec>& v) {
    // beta (2 v (v^T u) - J u)
    RVec r = 2.0 * w.v.dot(v) * w.v;
    r(0) -= v(0);
    r.tail(v.size() - 1) += v.tail(v.size() - 1);
    return w.beta * r;
  }

  static RVec apply_soc_inv(const ConeScaling& w, const Eigen::Ref<const RVec>& v) {
    // (1/beta) (2 J v v^T J u - J u)
    RVec Jw = w.v;
    Jw.tail(Jw.size() - 1) *= -1.0;
    RVec r = 2.0 * Jw.dot(v) * Jw;
    r(0) -= v(0);
    r.tail(v.size() - 1) += v.tail(v.size() - 1);
    return r / w.beta;
  }

  // F with S = F F^T from the eigendecomposition; valid for any S > 0.
  static RMat sym_factor(const RMat& S) {
    Eigen::SelfAdjointEigenSolver<RMat> es(S);
    RVec ev = es.eigenvalues().cwiseMax(std::numeric_limits<double>::min());
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  }

  std::vector<ConeSlice> slices_;
  int dim_ = 0;
  int degree_ = 0;
};

}  // namespace qrelay::conic::detail
