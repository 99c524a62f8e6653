#pragma once

#include "predcomb/core.hpp"

namespace predcomb {

struct PowerResult {
  Vector vector;  // unit norm
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
  // Set when the leading eigenvalue looks (numerically) repeated, i.e. the
  // gap to the next eigenvalue is below 1e-12 relative.
  bool small_gap = false;
};

// Dominant eigenvector of a symmetric PSD matrix by power iteration.
// Stops once 1 - |cos(v_k, v_{k+1})| <= tol or after max_iters products.
PowerResult power_iteration(const Matrix& sym, const Vector& start, double tol, int max_iters);

}  // namespace predcomb
