#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "predcomb/core.hpp"
#include "predcomb/relevance.hpp"

namespace predcomb {

enum class Algorithm { npc, lpc, opc };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct DenoiseConfig {
  Algorithm algorithm = Algorithm::npc;
  double sigma_sq = 0.1;      // GP noise variance
  double sigma_k_sq = 1.0;    // global kernel scaling
  double lambda_j = 1.0;      // weight of the predictability term
  int n_iters = 20;           // S
  Eigen::Index n_basis = 300; // N', capped at N
  double power_tol = 1e-10;
  int power_max = 10000;
  bool joint = true;
  bool use_ard = true;
  double ridge = 1e-10;       // LPC conditioning
  double opc_sigma_sq = 1.0;  // OPC weight bandwidth
  double opc_lambda = 1.0;    // OPC regularization weight
  // ARD optimizer controls; the likelihood noise follows sigma_sq unless
  // ard_lambda is set.
  ArdConfig ard;
  std::optional<double> ard_lambda;

  double ard_lambda_noise() const { return ard_lambda.value_or(sigma_sq); }
  void validate() const;
};

// Target and reference predictors denoised together. Members other than
// `i` act as the references of member i.
struct PredictorEnsemble {
  std::vector<NormalizedPredictor> members;
  std::vector<ScaleShift> scale_shifts;
  std::vector<std::size_t> target_indices;
  // Linear ARD weights per member (length members-1, ordered as the other
  // members), empty until computed.
  std::vector<Vector> relevance;
  std::optional<double> relevance_lambda;

  static PredictorEnsemble from_raw(std::span<const EvaluationVector> members,
                                    std::vector<std::size_t> target_indices);

  std::size_t size() const noexcept { return members.size(); }
  Eigen::Index points() const { return members.front().size(); }
  bool is_target(std::size_t i) const;
  ReferenceMatrix references_for(std::size_t i) const;
  // Fits sigma_l for every listed member against the rest (all members when
  // `which` is empty).
  void compute_relevance(const ArdConfig& cfg, std::span<const std::size_t> which = {});
  RelevanceWeights relevance_for(std::size_t i, double sigma_k_sq) const;
  EvaluationVector restored(std::size_t i) const;
  void validate() const;
};

struct StepResult {
  NormalizedPredictor predictor;
  int power_iterations = 0;
  bool power_converged = true;
  bool small_gap = false;
};

// One NPC update of member `target_idx`: top eigenvector of
// (f^t)(f^t)^T + lambda_j Q'' via power iteration on Y^T Y.
StepResult denoise_step(std::size_t target_idx, const PredictorEnsemble& ensemble,
                        const DenoiseConfig& cfg);

// LPC update with the linear projector G (G^T G + ridge I)^{-1} G^T.
StepResult lpc_denoise_step(std::size_t target_idx, const PredictorEnsemble& ensemble,
                            const DenoiseConfig& cfg);

// Adapted OPC update: top eigenvector of f f^T + lambda_o sum_i w_i g_i g_i^T
// with w_i = exp(-(2 - 2<f, g_i>) / sigma_o_sq).
StepResult opc_baseline_step(std::size_t target_idx, const PredictorEnsemble& ensemble,
                             double sigma_o_sq, double lambda_o, const DenoiseConfig& cfg = {});

// Dispatches on cfg.algorithm.
StepResult update_member(std::size_t idx, const PredictorEnsemble& ensemble, const DenoiseConfig& cfg);

struct DenoiseTrace {
  // snapshots[t][k] is target k (in target_indices order) after t iterations.
  std::vector<std::vector<NormalizedPredictor>> snapshots;
  std::vector<double> validation;
  std::vector<std::string> warnings;
};

using ValidationMetric = std::function<double(const PredictorEnsemble&)>;

// Runs cfg.n_iters synchronous sweeps. With cfg.joint every member is
// updated from the previous sweep's snapshot; otherwise only the targets.
std::pair<PredictorEnsemble, DenoiseTrace> joint_denoise(PredictorEnsemble ensemble,
                                                         const DenoiseConfig& cfg,
                                                         const ValidationMetric& validation = {});

// Builds an ensemble of class score columns (targets) plus rank references.
PredictorEnsemble make_multiclass_ensemble(std::span<const EvaluationVector> class_columns,
                                           const ReferenceMatrix& rank_refs);

// Jointly denoises class columns with rank references and returns the
// class columns in their original scale.
std::vector<EvaluationVector> multiclass_denoise(std::span<const EvaluationVector> class_columns,
                                                 const ReferenceMatrix& rank_refs,
                                                 const DenoiseConfig& cfg);

struct TuneResult {
  std::size_t best_index = 0;
  DenoiseConfig config;
  std::size_t best_iteration = 0;
  double best_score = 0.0;
  std::vector<std::vector<double>> curves;  // validation curve per candidate
  std::vector<NormalizedPredictor> best_targets;  // targets at the selected iteration
};

// Exhaustive search over candidate configs and iterations, maximizing the
// validation metric. Ties go to the lowest candidate index, then the lowest
// iteration.
TuneResult tune(const PredictorEnsemble& ensemble, std::span<const DenoiseConfig> candidates,
                const ValidationMetric& metric);

// Cartesian product over the three hyperparameter axes, in
// sigma_sq-major order. OPC reads sigma_sq as sigma_o_sq and lambda_j as
// lambda_o.
std::vector<DenoiseConfig> make_grid(const DenoiseConfig& base, std::span<const double> sigma_sq,
                                     std::span<const double> sigma_k_sq,
                                     std::span<const double> lambda_j);

// Median squared distance between rows of g (weighted by `weights` when
// non-empty), over at most 1000 evenly spaced rows.
double median_sq_row_distance(const Matrix& g, const Vector& weights = Vector());

}  // namespace predcomb
