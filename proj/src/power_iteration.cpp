#include "predcomb/power_iteration.hpp"

#include <cmath>

#include "predcomb/errors.hpp"

namespace predcomb {
namespace {

constexpr double kGapTol = 1e-12;
constexpr int kDeflationIters = 100;

// Rough second eigenvalue via a few deflated power steps. The Rayleigh
// quotient approaches lambda_2 from below.
double second_eigenvalue(const Matrix& sym, const Vector& top, double lambda1) {
  // Deterministic start without symmetric structure.
  Vector v(sym.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::cos(1.3 * static_cast<double>(i + 1));
  v -= top * top.dot(v);
  if (v.norm() == 0.0) return 0.0;
  v.normalize();
  double rq = v.dot(sym * v);
  for (int k = 0; k < kDeflationIters; ++k) {
    Vector w = sym * v - lambda1 * top * top.dot(v);
    w -= top * top.dot(w);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
    const double next = v.dot(sym * v);
    const bool settled = std::abs(next - rq) <= 1e-15 * std::max(1.0, std::abs(lambda1));
    rq = next;
    if (settled) break;
  }
  return rq;
}

}  // namespace

PowerResult power_iteration(const Matrix& sym, const Vector& start, double tol, int max_iters) {
  if (sym.rows() != sym.cols() || start.size() != sym.rows())
    throw DimensionMismatch("power_iteration: shape mismatch");
  const double start_norm = start.norm();
  if (!(start_norm > 0.0)) throw InvalidArgument("power_iteration: zero start vector");

  PowerResult out;
  Vector v = start / start_norm;
  for (int k = 0; k < max_iters; ++k) {
    Vector w = sym * v;
    const double n = w.norm();
    if (n == 0.0) {
      // v lies in the null space; the matrix is zero along every direction seen.
      out.vector = v;
      out.eigenvalue = 0.0;
      out.iterations = k + 1;
      out.converged = true;
      return out;
    }
    w /= n;
    const double cosine = v.dot(w);
    v = std::move(w);
    out.iterations = k + 1;
    if (1.0 - std::abs(cosine) <= tol) {
      out.converged = true;
      break;
    }
  }
  out.vector = v;
  out.eigenvalue = v.dot(sym * v);
  const double lambda2 = second_eigenvalue(sym, v, out.eigenvalue);
  out.small_gap = (out.eigenvalue - lambda2) <= kGapTol * std::max(1.0, std::abs(out.eigenvalue));
  return out;
}

}  // namespace predcomb
