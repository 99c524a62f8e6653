#include "predcomb/predictability.hpp"

#include <algorithm>
#include <cmath>

#include "predcomb/errors.hpp"

namespace predcomb {
namespace {

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

void require_positive_noise(double sigma_sq, const char* where) {
  if (!(sigma_sq > 0.0)) throw NonPositiveNoise(std::string(where) + ": sigma_sq must be > 0");
}

// Per-dimension weights w such that the Gaussian kernels read
// exp(-sum_i w_i (a_i - b_i)^2).
Vector gaussian_weights(const KernelSpec& spec, Eigen::Index dims) {
  if (spec.kind == KernelKind::isotropic_gaussian)
    return Vector::Constant(dims, 1.0 / spec.sigma_k_sq);
  return spec.weights;
}

}  // namespace

KernelSpec KernelSpec::isotropic(double sigma_k_sq) {
  return KernelSpec{KernelKind::isotropic_gaussian, sigma_k_sq, Vector()};
}

KernelSpec KernelSpec::anisotropic(Vector weights) {
  return KernelSpec{KernelKind::anisotropic_gaussian, 1.0, std::move(weights)};
}

KernelSpec KernelSpec::linear(Vector weights) {
  return KernelSpec{KernelKind::linear_anisotropic, 1.0, std::move(weights)};
}

void KernelSpec::validate(Eigen::Index dims) const {
  if (kind == KernelKind::isotropic_gaussian) {
    if (!(sigma_k_sq > 0.0) || !std::isfinite(sigma_k_sq))
      throw InvalidArgument("KernelSpec: sigma_k_sq must be positive");
    return;
  }
  if (weights.size() != dims)
    throw DimensionMismatch("KernelSpec: expected " + std::to_string(dims) + " weights, got " +
                            std::to_string(weights.size()));
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw InvalidArgument("KernelSpec: weights must be finite and non-negative");
}

Matrix gram(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  if (a.cols() != b.cols())
    throw DimensionMismatch("gram: row dimension " + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.cols()));
  spec.validate(a.cols());

  // Transposed copies so each row is a contiguous column.
  const Matrix at = a.transpose();
  const Matrix bt = b.transpose();
  Matrix k(a.rows(), b.rows());

  if (spec.kind == KernelKind::linear_anisotropic) {
    const Vector& w = spec.weights;
    for (Eigen::Index j = 0; j < bt.cols(); ++j) {
      const Vector wb = w.cwiseProduct(bt.col(j));
      for (Eigen::Index i = 0; i < at.cols(); ++i) k(i, j) = at.col(i).dot(wb);
    }
    return k;
  }

  const Vector w = gaussian_weights(spec, a.cols());
  for (Eigen::Index j = 0; j < bt.cols(); ++j) {
    const auto bj = bt.col(j);
    for (Eigen::Index i = 0; i < at.cols(); ++i) {
      const double d2 = ((at.col(i) - bj).array().square() * w.array()).sum();
      k(i, j) = std::exp(-d2);
    }
  }
  return k;
}

double linear_predictability(const NormalizedPredictor& f, const ReferenceMatrix& g, double ridge) {
  const Matrix& gm = g.matrix();
  if (gm.rows() != f.size()) throw DimensionMismatch("linear_predictability: length mismatch");
  Matrix gram_gg = gm.transpose() * gm;
  gram_gg.diagonal().array() += ridge;
  const Eigen::LLT<Matrix> llt(gram_gg);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("linear_predictability: G^T G + ridge I is not positive definite");
  const Vector w = llt.solve(gm.transpose() * f.values());
  const Vector fc = center(f.values());
  const double residual = (f.values() - gm * w).squaredNorm();
  return clamp_unit(1.0 - residual / fc.squaredNorm());
}

Vector gp_posterior_mean(const NormalizedPredictor& f, const ReferenceMatrix& g,
                         const KernelSpec& spec, double sigma_sq) {
  require_positive_noise(sigma_sq, "gp_posterior_mean");
  if (g.rows() != f.size()) throw DimensionMismatch("gp_posterior_mean: length mismatch");
  const Matrix k = gram(g.matrix(), g.matrix(), spec);
  Matrix reg = k;
  reg.diagonal().array() += sigma_sq;
  const Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("gp_posterior_mean: K + sigma^2 I is not positive definite");
  return k * llt.solve(f.values());
}

double nonlinear_predictability(const NormalizedPredictor& f, const ReferenceMatrix& g,
                                const KernelSpec& spec, double sigma_sq) {
  require_positive_noise(sigma_sq, "nonlinear_predictability");
  // For centered f, f^T Q' f = 2 f^T m - |m|^2 with m the posterior mean of f.
  const Vector fc = center(f.values());
  const Vector m = gp_posterior_mean(f, g, spec, sigma_sq);
  return clamp_unit((2.0 * fc.dot(m) - m.squaredNorm()) / fc.squaredNorm());
}

std::vector<Eigen::Index> even_basis_indices(Eigen::Index n, Eigen::Index n_basis) {
  if (n_basis < 1 || n_basis > n)
    throw BasisCountOutOfRange("basis count " + std::to_string(n_basis) + " not in [1, " +
                               std::to_string(n) + "]");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_basis));
  for (Eigen::Index i = 0; i < n_basis; ++i) idx[static_cast<std::size_t>(i)] = (i * n) / n_basis;
  return idx;
}

NystromFactor build_nystrom(const ReferenceMatrix& g, Eigen::Index n_basis, const KernelSpec& spec,
                            double sigma_sq) {
  require_positive_noise(sigma_sq, "build_nystrom");
  const Matrix& gm = g.matrix();
  spec.validate(gm.cols());

  NystromFactor out;
  for (Eigen::Index row : even_basis_indices(gm.rows(), n_basis)) {
    const bool duplicate = std::any_of(out.basis_rows.begin(), out.basis_rows.end(),
                                       [&](Eigen::Index r) { return gm.row(r) == gm.row(row); });
    if (!duplicate) out.basis_rows.push_back(row);
  }
  out.n_basis = static_cast<Eigen::Index>(out.basis_rows.size());
  out.basis.resize(out.n_basis, gm.cols());
  for (Eigen::Index i = 0; i < out.n_basis; ++i)
    out.basis.row(i) = gm.row(out.basis_rows[static_cast<std::size_t>(i)]);

  out.k_gb = gram(gm, out.basis, spec);
  out.k_bb = gram(out.basis, out.basis, spec);

  Matrix s = Matrix::Zero(out.n_basis, out.n_basis);
  s.selfadjointView<Eigen::Lower>().rankUpdate(out.k_gb.transpose());
  s = s.selfadjointView<Eigen::Lower>();
  out.k_gb_gram = s;

  // P^{-1} = S + sigma^2 K_BB. Duplicate-free bases keep this PD in exact
  // arithmetic; a jitter ladder on K_BB covers near-duplicates.
  const double diag_scale = std::max(out.k_bb.diagonal().mean(), 1e-300);
  Eigen::LLT<Matrix> p_inv;
  for (double rel : {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4}) {
    out.jitter = rel * diag_scale;
    Matrix m = s + sigma_sq * out.k_bb;
    m.diagonal().array() += sigma_sq * out.jitter;
    p_inv.compute(m);
    if (p_inv.info() == Eigen::Success) break;
  }
  if (p_inv.info() != Eigen::Success)
    throw SingularSystem("build_nystrom: K_GB^T K_GB + sigma^2 K_BB is singular");

  // T = 2P - P S P = P (S + 2 sigma^2 K_BB) P, so with
  // S + 2 sigma^2 K_BB = L L^T the factor T^{1/2} = P L.
  Matrix middle = s + 2.0 * sigma_sq * out.k_bb;
  middle.diagonal().array() += 2.0 * sigma_sq * out.jitter;
  const Eigen::LLT<Matrix> middle_llt(middle);
  if (middle_llt.info() == Eigen::Success) {
    out.t_half = p_inv.solve(Matrix(middle_llt.matrixL()));
    if (out.t_half.allFinite()) return out;
  }

  out.eigen_fallback = true;
  const Matrix p = p_inv.solve(Matrix::Identity(out.n_basis, out.n_basis));
  Matrix t = 2.0 * p - p * s * p;
  t = 0.5 * (t + t.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(t);
  const Vector lambda = eig.eigenvalues().cwiseMax(kEigenFloor);
  out.t_half = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  return out;
}

double nystrom_quadratic_form(const NystromFactor& factor, const Vector& f, double lambda_j) {
  if (f.size() != factor.k_gb.rows()) throw DimensionMismatch("nystrom_quadratic_form: length");
  const Vector v = factor.t_half.transpose() * (factor.k_gb.transpose() * center(f));
  return lambda_j * v.squaredNorm();
}

}  // namespace predcomb
