#pragma once

#include <vector>

#include "predcomb/core.hpp"

namespace predcomb {

enum class KernelKind { isotropic_gaussian, anisotropic_gaussian, linear_anisotropic };

// isotropic_gaussian:   k(a,b) = exp(-|a-b|^2 / sigma_k_sq)
// anisotropic_gaussian: k(a,b) = exp(-sum_i w_i (a_i-b_i)^2)
// linear_anisotropic:   k(a,b) = sum_i w_i a_i b_i
struct KernelSpec {
  KernelKind kind = KernelKind::isotropic_gaussian;
  double sigma_k_sq = 1.0;
  Vector weights;

  static KernelSpec isotropic(double sigma_k_sq);
  static KernelSpec anisotropic(Vector weights);
  static KernelSpec linear(Vector weights);

  // Throws InvalidArgument on a non-positive bandwidth or negative weights,
  // DimensionMismatch when the weight count differs from `dims`.
  void validate(Eigen::Index dims) const;
};

// Kernel matrix between the rows of `a` and the rows of `b`.
Matrix gram(const Matrix& a, const Matrix& b, const KernelSpec& spec);

inline constexpr double kDefaultRidge = 1e-10;

// Fraction of the variance of f explained by a least-squares linear fit on
// the reference rows; clamped to [0, 1].
double linear_predictability(const NormalizedPredictor& f, const ReferenceMatrix& g,
                             double ridge = kDefaultRidge);

// GP posterior mean K (K + sigma_sq I)^{-1} f.
Vector gp_posterior_mean(const NormalizedPredictor& f, const ReferenceMatrix& g,
                         const KernelSpec& spec, double sigma_sq);

// f^T Q' f / f^T C_N f for the GP smoother, clamped to [0, 1].
double nonlinear_predictability(const NormalizedPredictor& f, const ReferenceMatrix& g,
                                const KernelSpec& spec, double sigma_sq);

inline constexpr double kEigenFloor = 1e-9;

// Low-rank (subset-of-regressors) factorization of the GP smoother.
//
// With S = K_GB^T K_GB and P = (S + sigma^2 K_BB)^{-1}, the smoother is
// approximated by K_GB T K_GB^T where T = 2P - P S P. `t_half` satisfies
// t_half * t_half^T = T.
struct NystromFactor {
  std::vector<Eigen::Index> basis_rows;  // row indices of G used as basis
  Matrix basis;                           // N' x R
  Matrix k_gb;                            // N x N'
  Matrix k_bb;                            // N' x N'
  Matrix k_gb_gram;                       // K_GB^T K_GB
  Matrix t_half;                          // N' x N'
  Eigen::Index n_basis = 0;
  double jitter = 0.0;                    // diagonal added to K_BB, 0 when none was needed
  bool eigen_fallback = false;            // t_half came from the floored eigen-decomposition

  // T = t_half t_half^T.
  Matrix t() const { return t_half * t_half.transpose(); }
};

// Evenly spaced basis indices floor(i * N / n_basis), i = 0..n_basis-1.
std::vector<Eigen::Index> even_basis_indices(Eigen::Index n, Eigen::Index n_basis);

// Builds the factor from the evenly spaced basis rows of G. Rows that are
// exact duplicates of an earlier basis row are dropped, so n_basis can be
// smaller than requested.
NystromFactor build_nystrom(const ReferenceMatrix& g, Eigen::Index n_basis, const KernelSpec& spec,
                            double sigma_sq);

// f^T Q'' f for the factor, Q'' = C_N K_GB (lambda_j T) K_GB^T C_N.
double nystrom_quadratic_form(const NystromFactor& factor, const Vector& f, double lambda_j);

}  // namespace predcomb
