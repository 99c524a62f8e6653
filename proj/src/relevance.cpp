#include "predcomb/relevance.hpp"

#include <cmath>

#include "predcomb/errors.hpp"

namespace predcomb {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

void check_theta(const Vector& theta, Eigen::Index r) {
  if (theta.size() != r) throw DimensionMismatch("ml_energy: theta length differs from R");
  if (!theta.allFinite() || (theta.array().abs() > kThetaBound).any())
    throw NumericalOverflow("ml_energy: log-weights must lie in [-50, 50]");
}

Vector project_box(Vector theta) { return theta.cwiseMax(-kThetaBound).cwiseMin(kThetaBound); }

}  // namespace

void ArdConfig::validate() const {
  if (!(lambda_noise > 0.0) || !(step > 0.0) || max_iters <= 0 || !(grad_tol > 0.0))
    throw InvalidArgument("ArdConfig: all controls must be positive");
}

ArdProblem::ArdProblem(const ReferenceMatrix& g, const NormalizedPredictor& f)
    : gtg(g.matrix().transpose() * g.matrix()), gtf(g.matrix().transpose() * f.values()) {
  if (g.rows() != f.size()) throw DimensionMismatch("ArdProblem: length mismatch");
}

EnergyAndGradient ml_energy_and_gradient(const Vector& theta, const ArdProblem& problem,
                                         double lambda_noise) {
  check_theta(theta, problem.gtg.rows());
  const Vector sigma = theta.array().exp();
  Matrix m = problem.gtg / lambda_noise;
  m.diagonal() += sigma.cwiseInverse();
  const Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw SingularSystem("ml_energy: system is not positive definite");

  const Vector u = llt.solve(problem.gtf);
  const Matrix m_inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double inv_l2 = 1.0 / (lambda_noise * lambda_noise);

  EnergyAndGradient out;
  out.energy = theta.sum() + log_det - inv_l2 * problem.gtf.dot(u);
  // dM/dtheta_i = -e_i e_i^T / sigma_i.
  out.gradient = (1.0 - m_inv.diagonal().array() / sigma.array() -
                  inv_l2 * u.array().square() / sigma.array())
                     .matrix();
  return out;
}

double ml_energy(const Vector& theta, const ReferenceMatrix& g, const NormalizedPredictor& f,
                 const ArdConfig& cfg) {
  cfg.validate();
  return ml_energy_and_gradient(theta, ArdProblem(g, f), cfg.lambda_noise).energy;
}

Vector optimize_relevance(const ReferenceMatrix& g, const NormalizedPredictor& f0,
                          const ArdConfig& cfg) {
  cfg.validate();
  const ArdProblem problem(g, f0);
  Vector theta = Vector::Zero(g.count());
  EnergyAndGradient cur = ml_energy_and_gradient(theta, problem, cfg.lambda_noise);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Gradient components pushing against an active bound do not count.
    Vector free_grad = cur.gradient;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      if ((theta[i] <= -kThetaBound && free_grad[i] > 0.0) ||
          (theta[i] >= kThetaBound && free_grad[i] < 0.0))
        free_grad[i] = 0.0;
    }
    if (free_grad.norm() <= cfg.grad_tol) break;

    double step = cfg.step;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      Vector trial = project_box(theta - step * cur.gradient);
      const double decrease = cur.gradient.dot(theta - trial);
      if (decrease <= 0.0) continue;
      EnergyAndGradient next = ml_energy_and_gradient(trial, problem, cfg.lambda_noise);
      if (next.energy <= cur.energy - kArmijo * decrease) {
        theta = std::move(trial);
        cur = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return theta.array().exp();
}

RelevanceWeights scale_to_anisotropic(const Vector& sigma_l, double sigma_k_sq) {
  if (!(sigma_k_sq > 0.0)) throw InvalidArgument("scale_to_anisotropic: sigma_k_sq must be > 0");
  return RelevanceWeights{sigma_l, sigma_l / sigma_k_sq};
}

Vector normalized_weights(const Vector& sigma_l) {
  const double total = sigma_l.sum();
  if (!(total > 0.0)) return Vector::Constant(sigma_l.size(), 1.0 / static_cast<double>(sigma_l.size()));
  return sigma_l / total;
}

}  // namespace predcomb
