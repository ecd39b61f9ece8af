#pragma once

#include <qrelay/types.hpp>

#include <algorithm>
#include <functional>

namespace qrelay::conic {

/// Rank by eigenvalue gap: the smallest k with lambda_k / lambda_{k+1} > ratio
/// (descending order, lambda_{L+1} = 0). Returns L when no gap exists.
inline int rank_from_eigenvalues(RVec ev, double ratio = 1e4) {
  const int L = static_cast<int>(ev.size());
  if (L == 0) return 0;
  std::sort(ev.data(), ev.data() + L, std::greater<>());
  ev = ev.cwiseMax(0.0);
  if (ev(0) <= 0.0) return 0;
  for (int k = 0; k < L; ++k) {
    const double next = (k + 1 < L) ? ev(k + 1) : 0.0;
    if (next <= 0.0 || ev(k) / next > ratio) return k + 1;
  }
  return L;
}

inline int rank_of(const HermitianMatrix& W, double ratio = 1e4) {
  return rank_from_eigenvalues(W.eigenvalues(), ratio);
}

}  // namespace qrelay::conic
