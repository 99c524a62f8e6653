#pragma once

// Independent dense oracles and seeded instance builders shared by the unit
// and acceptance tests. Oracles use explicit inverses and full
// eigen-decompositions on purpose.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "predcomb/core.hpp"
#include "predcomb/denoise.hpp"
#include "predcomb/predictability.hpp"
#include "predcomb/rng.hpp"

namespace predcomb::testing {

inline Vector random_vector(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline ReferenceMatrix random_refs(Rng& rng, Eigen::Index n, Eigen::Index r) {
  Matrix g(n, r);
  for (Eigen::Index j = 0; j < r; ++j) g.col(j) = NormalizedPredictor::project(random_vector(rng, n)).values();
  return ReferenceMatrix(g);
}

inline Matrix centering(Eigen::Index n) {
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

inline double kernel_entry(const Vector& a, const Vector& b, const KernelSpec& spec) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    switch (spec.kind) {
      case KernelKind::isotropic_gaussian: s += (a[k] - b[k]) * (a[k] - b[k]) / spec.sigma_k_sq; break;
      case KernelKind::anisotropic_gaussian: s += spec.weights[k] * (a[k] - b[k]) * (a[k] - b[k]); break;
      case KernelKind::linear_anisotropic: s += spec.weights[k] * a[k] * b[k]; break;
    }
  }
  return spec.kind == KernelKind::linear_anisotropic ? s : std::exp(-s);
}

inline Matrix gram_oracle(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = kernel_entry(a.row(i).transpose(), b.row(j).transpose(), spec);
  return k;
}

// Smoother M = K (K + sigma^2 I)^{-1} via an explicit inverse.
inline Matrix smoother_oracle(const Matrix& k, double sigma_sq) {
  const Eigen::Index n = k.rows();
  return k * (k + sigma_sq * Matrix::Identity(n, n)).inverse();
}

// Q' = C (2M - M^T M) C for the exact GP smoother (M symmetric).
inline Matrix qprime_oracle(const Matrix& k, double sigma_sq) {
  const Matrix m = smoother_oracle(k, sigma_sq);
  const Matrix c = centering(k.rows());
  return c * (m + m.transpose() - m.transpose() * m) * c;
}

// Predictability as 1 - residual / variance with the posterior mean.
inline double residual_ratio_oracle(const Vector& f, const Vector& m) {
  const Vector c = f.array() - f.mean();
  return 1.0 - (f - m).squaredNorm() / c.squaredNorm();
}

inline Vector top_eigenvector(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  return es.eigenvectors().col(sym.rows() - 1);
}

inline double abs_cosine(const Vector& a, const Vector& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

// Dense A for one update of member `idx` with the exact (N' = N) smoother.
inline Matrix dense_a(std::size_t idx, const PredictorEnsemble& e, const DenoiseConfig& cfg) {
  const Vector f = e.members[idx].values();
  const Matrix g = e.references_for(idx).matrix();
  Matrix a = f * f.transpose();
  if (cfg.algorithm == Algorithm::npc) {
    KernelSpec spec = KernelSpec::isotropic(cfg.sigma_k_sq);
    if (cfg.use_ard) spec = KernelSpec::anisotropic(e.relevance_for(idx, cfg.sigma_k_sq).sigma_a);
    a += cfg.lambda_j * qprime_oracle(gram_oracle(g, g, spec), cfg.sigma_sq);
  } else if (cfg.algorithm == Algorithm::lpc) {
    a += cfg.lambda_j * g * (g.transpose() * g + cfg.ridge * Matrix::Identity(g.cols(), g.cols())).inverse() *
         g.transpose();
  } else {
    for (Eigen::Index i = 0; i < g.cols(); ++i) {
      const double w = std::exp(-(2.0 - 2.0 * f.dot(g.col(i))) / cfg.opc_sigma_sq);
      a += cfg.opc_lambda * w * g.col(i) * g.col(i).transpose();
    }
  }
  return a;
}

inline PredictorEnsemble random_ensemble(Rng& rng, Eigen::Index n, Eigen::Index r) {
  std::vector<EvaluationVector> members;
  const Vector base = random_vector(rng, n);
  members.emplace_back(base);
  for (Eigen::Index j = 0; j < r; ++j)
    members.emplace_back(Vector(base.array().sin() + 0.7 * random_vector(rng, n).array()));
  return PredictorEnsemble::from_raw(members, {0});
}

}  // namespace predcomb::testing
