#pragma once

#include "predcomb/core.hpp"

namespace predcomb {

// Controls for the marginal-likelihood fit of the linear ARD kernel.
struct ArdConfig {
  double lambda_noise = 0.1;  // likelihood noise variance
  double step = 0.1;          // initial step of each backtracking line search
  int max_iters = 500;
  double grad_tol = 1e-6;

  void validate() const;
};

// Diagonals of the linear (sigma_l) and anisotropic Gaussian (sigma_a) ARD
// kernels, one entry per reference.
struct RelevanceWeights {
  Vector sigma_l;
  Vector sigma_a;
};

// Log-weights outside [-kThetaBound, kThetaBound] are rejected.
inline constexpr double kThetaBound = 50.0;

// Sufficient statistics of (G, f) for the energy: G^T G and G^T f.
struct ArdProblem {
  Matrix gtg;
  Vector gtf;

  ArdProblem(const ReferenceMatrix& g, const NormalizedPredictor& f);
};

struct EnergyAndGradient {
  double energy = 0.0;
  Vector gradient;
};

// Negative log marginal likelihood of f under the linear kernel with
// weights exp(theta), up to sigma-independent constants:
//   sum(theta) + log|diag(1/sigma) + G^T G / lambda|
//     - f^T G (diag(1/sigma) + G^T G / lambda)^{-1} G^T f / lambda^2
double ml_energy(const Vector& theta, const ReferenceMatrix& g, const NormalizedPredictor& f,
                 const ArdConfig& cfg);
EnergyAndGradient ml_energy_and_gradient(const Vector& theta, const ArdProblem& problem,
                                         double lambda_noise);

// Projected gradient descent with Armijo backtracking in log-weight space,
// starting at sigma = 1. Returns sigma_l = exp(theta*).
Vector optimize_relevance(const ReferenceMatrix& g, const NormalizedPredictor& f0,
                          const ArdConfig& cfg);

RelevanceWeights scale_to_anisotropic(const Vector& sigma_l, double sigma_k_sq);

// Weights rescaled to sum to one (all-zero input maps to uniform weights).
Vector normalized_weights(const Vector& sigma_l);

}  // namespace predcomb
