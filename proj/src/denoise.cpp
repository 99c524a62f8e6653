#include "predcomb/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "predcomb/errors.hpp"
#include "predcomb/parallel.hpp"
#include "predcomb/power_iteration.hpp"
#include "predcomb/predictability.hpp"

namespace predcomb {
namespace {

constexpr double kDegenerateNorm = 1e-12;

// Maximizes the Rayleigh quotient of A = f f^T + W W^T over centered unit
// vectors. W is only touched through W^T f, W^T W and e -> W e, so the
// eigen-solve runs on the small (k+1) x (k+1) matrix Y^T Y, Y = [f, W].
StepResult rayleigh_update(const Vector& f, const Vector& wtf, const Matrix& wtw,
                           const std::function<Vector(const Vector&)>& apply_w,
                           const DenoiseConfig& cfg, const char* where) {
  const Eigen::Index k = wtf.size();
  Matrix yty(k + 1, k + 1);
  yty(0, 0) = f.squaredNorm();
  yty.block(1, 0, k, 1) = wtf;
  yty.block(0, 1, 1, k) = wtf.transpose();
  yty.bottomRightCorner(k, k) = 0.5 * (wtw + wtw.transpose());

  // Warm start Y^T f^t.
  const Vector start = yty.col(0);
  const PowerResult power = power_iteration(yty, start, cfg.power_tol, cfg.power_max);

  Vector out = f * power.vector[0];
  if (k > 0) out += apply_w(power.vector.tail(k));
  const double norm = out.norm();
  if (!(norm > kDegenerateNorm))
    throw DegenerateTarget(std::string(where) + ": |Y e| vanished");
  out /= norm;
  if (out.dot(f) < 0.0) out = -out;
  out.array() -= out.mean();
  out.normalize();

  StepResult result{NormalizedPredictor(std::move(out))};
  result.power_iterations = power.iterations;
  result.power_converged = power.converged;
  result.small_gap = power.small_gap;
  return result;
}

StepResult unchanged(const PredictorEnsemble& ensemble, std::size_t i) {
  return StepResult{ensemble.members[i]};
}

void check_index(const PredictorEnsemble& ensemble, std::size_t i) {
  if (i >= ensemble.size()) throw InvalidArgument("member index out of range");
  if (ensemble.size() < 2) throw InvalidArgument("ensemble needs at least 2 members");
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::npc: return "npc";
    case Algorithm::lpc: return "lpc";
    case Algorithm::opc: return "opc";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "npc") return Algorithm::npc;
  if (name == "lpc") return Algorithm::lpc;
  if (name == "opc") return Algorithm::opc;
  throw InvalidArgument("unknown algorithm '" + name + "' (expected npc, lpc or opc)");
}

void DenoiseConfig::validate() const {
  if (!(sigma_sq > 0.0)) throw NonPositiveNoise("DenoiseConfig: sigma_sq must be > 0");
  if (!(sigma_k_sq > 0.0)) throw InvalidArgument("DenoiseConfig: sigma_k_sq must be > 0");
  if (!(lambda_j >= 0.0)) throw InvalidArgument("DenoiseConfig: lambda_j must be >= 0");
  if (n_iters < 0) throw InvalidArgument("DenoiseConfig: n_iters must be >= 0");
  if (n_basis < 1) throw BasisCountOutOfRange("DenoiseConfig: n_basis must be >= 1");
  if (!(power_tol > 0.0) || power_max < 1)
    throw InvalidArgument("DenoiseConfig: power iteration controls must be positive");
  if (!(ridge >= 0.0)) throw InvalidArgument("DenoiseConfig: ridge must be >= 0");
  if (!(opc_sigma_sq > 0.0) || !(opc_lambda >= 0.0))
    throw InvalidArgument("DenoiseConfig: OPC sigma must be > 0 and lambda >= 0");
  ArdConfig a = ard;
  a.lambda_noise = ard_lambda_noise();
  a.validate();
}

PredictorEnsemble PredictorEnsemble::from_raw(std::span<const EvaluationVector> members,
                                              std::vector<std::size_t> target_indices) {
  PredictorEnsemble e;
  for (const auto& m : members) {
    auto [p, s] = center_normalize(m);
    e.members.push_back(std::move(p));
    e.scale_shifts.push_back(s);
  }
  e.target_indices = std::move(target_indices);
  e.validate();
  return e;
}

bool PredictorEnsemble::is_target(std::size_t i) const {
  return std::find(target_indices.begin(), target_indices.end(), i) != target_indices.end();
}

void PredictorEnsemble::validate() const {
  if (members.size() < 2) throw InvalidArgument("PredictorEnsemble: need at least 2 members");
  if (scale_shifts.size() != members.size())
    throw InvalidArgument("PredictorEnsemble: one ScaleShift per member required");
  const Eigen::Index n = members.front().size();
  for (const auto& m : members)
    if (m.size() != n) throw DimensionMismatch("PredictorEnsemble: members differ in length");
  if (target_indices.empty()) throw InvalidArgument("PredictorEnsemble: no target members");
  for (std::size_t t : target_indices)
    if (t >= members.size()) throw InvalidArgument("PredictorEnsemble: target index out of range");
  if (!relevance.empty()) {
    if (relevance.size() != members.size())
      throw InvalidArgument("PredictorEnsemble: relevance must cover every member");
    for (const auto& r : relevance)
      if (r.size() != 0 && r.size() != static_cast<Eigen::Index>(members.size() - 1))
        throw DimensionMismatch("PredictorEnsemble: relevance length must be members-1");
  }
}

ReferenceMatrix PredictorEnsemble::references_for(std::size_t i) const {
  check_index(*this, i);
  Matrix g(points(), static_cast<Eigen::Index>(members.size() - 1));
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < members.size(); ++j)
    if (j != i) g.col(col++) = members[j].values();
  return ReferenceMatrix(std::move(g));
}

void PredictorEnsemble::compute_relevance(const ArdConfig& cfg, std::span<const std::size_t> which) {
  std::vector<std::size_t> all;
  if (which.empty()) {
    for (std::size_t i = 0; i < members.size(); ++i) all.push_back(i);
    which = all;
  }
  if (relevance.size() != members.size() || relevance_lambda != cfg.lambda_noise) {
    relevance.assign(members.size(), Vector());
    relevance_lambda = cfg.lambda_noise;
  }
  std::vector<Vector> fitted(which.size());
  parallel_for(which.size(), [&](std::size_t k) {
    const std::size_t i = which[k];
    fitted[k] = optimize_relevance(references_for(i), members[i], cfg);
  });
  for (std::size_t k = 0; k < which.size(); ++k) relevance[which[k]] = std::move(fitted[k]);
}

RelevanceWeights PredictorEnsemble::relevance_for(std::size_t i, double sigma_k_sq) const {
  if (i >= relevance.size() || relevance[i].size() == 0)
    throw InvalidArgument("relevance weights for member " + std::to_string(i) + " not computed");
  return scale_to_anisotropic(relevance[i], sigma_k_sq);
}

EvaluationVector PredictorEnsemble::restored(std::size_t i) const {
  return inverse_normalize(members.at(i), scale_shifts.at(i));
}

StepResult denoise_step(std::size_t target_idx, const PredictorEnsemble& ensemble,
                        const DenoiseConfig& cfg) {
  check_index(ensemble, target_idx);
  if (!(cfg.sigma_sq > 0.0)) throw NonPositiveNoise("denoise_step: sigma_sq must be > 0");
  if (cfg.lambda_j == 0.0) return unchanged(ensemble, target_idx);

  const ReferenceMatrix refs = ensemble.references_for(target_idx);
  const KernelSpec spec = cfg.use_ard
                              ? KernelSpec::anisotropic(ensemble.relevance_for(target_idx, cfg.sigma_k_sq).sigma_a)
                              : KernelSpec::isotropic(cfg.sigma_k_sq);
  const Eigen::Index n = ensemble.points();
  const NystromFactor factor = build_nystrom(refs, std::min(cfg.n_basis, n), spec, cfg.sigma_sq);

  const Vector& f = ensemble.members[target_idx].values();
  // W = C_N K_GB T^{1/2} sqrt(lambda), formed explicitly.
  Matrix w = factor.k_gb * (std::sqrt(cfg.lambda_j) * factor.t_half);
  w.rowwise() -= w.colwise().mean();
  Matrix wtw = Matrix::Zero(w.cols(), w.cols());
  wtw.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
  wtw = wtw.selfadjointView<Eigen::Lower>();
  const Vector wtf = w.transpose() * f;
  return rayleigh_update(
      f, wtf, wtw, [&](const Vector& e) -> Vector { return w * e; },
      cfg, "denoise_step");
}

StepResult lpc_denoise_step(std::size_t target_idx, const PredictorEnsemble& ensemble,
                            const DenoiseConfig& cfg) {
  check_index(ensemble, target_idx);
  if (cfg.lambda_j == 0.0) return unchanged(ensemble, target_idx);

  const ReferenceMatrix refs = ensemble.references_for(target_idx);
  const Matrix& g = refs.matrix();
  Matrix gtg = g.transpose() * g;
  Matrix reg = gtg;
  reg.diagonal().array() += cfg.ridge;
  const Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("lpc_denoise_step: G^T G + ridge I is not positive definite");

  // Q = W W^T with W = G L^{-T}.
  const auto lower = llt.matrixL();
  const Vector& f = ensemble.members[target_idx].values();
  const double root_lambda = std::sqrt(cfg.lambda_j);
  const Vector wtf = root_lambda * lower.solve(g.transpose() * f);
  const Matrix half = lower.solve(gtg);  // L^{-1} G^T G
  const Matrix wtw = cfg.lambda_j * Matrix(lower.solve(half.transpose()));
  return rayleigh_update(
      f, wtf, wtw,
      [&](const Vector& e) -> Vector {
        return g * Vector(llt.matrixU().solve(Vector(root_lambda * e)));
      },
      cfg, "lpc_denoise_step");
}

StepResult opc_baseline_step(std::size_t target_idx, const PredictorEnsemble& ensemble,
                             double sigma_o_sq, double lambda_o, const DenoiseConfig& cfg) {
  check_index(ensemble, target_idx);
  if (!(sigma_o_sq > 0.0)) throw InvalidArgument("opc_baseline_step: sigma_o_sq must be > 0");
  if (!(lambda_o >= 0.0)) throw InvalidArgument("opc_baseline_step: lambda_o must be >= 0");
  if (lambda_o == 0.0) return unchanged(ensemble, target_idx);

  const ReferenceMatrix refs = ensemble.references_for(target_idx);
  const Matrix& g = refs.matrix();
  const Vector& f = ensemble.members[target_idx].values();
  const Vector corr = g.transpose() * f;
  // Squared ambient distance between unit vectors: 2 - 2 <f, g_i>.
  const Vector weights = (-(2.0 - 2.0 * corr.array()) / sigma_o_sq).exp();
  const Vector scale = (lambda_o * weights).cwiseSqrt();
  const Vector wtf = scale.cwiseProduct(corr);
  const Matrix wtw = scale.asDiagonal() * (g.transpose() * g) * scale.asDiagonal();
  return rayleigh_update(
      f, wtf, wtw, [&](const Vector& e) -> Vector { return g * scale.cwiseProduct(e); }, cfg,
      "opc_baseline_step");
}

StepResult update_member(std::size_t idx, const PredictorEnsemble& ensemble, const DenoiseConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::npc: return denoise_step(idx, ensemble, cfg);
    case Algorithm::lpc: return lpc_denoise_step(idx, ensemble, cfg);
    case Algorithm::opc: return opc_baseline_step(idx, ensemble, cfg.opc_sigma_sq, cfg.opc_lambda, cfg);
  }
  throw InvalidArgument("update_member: unknown algorithm");
}

std::pair<PredictorEnsemble, DenoiseTrace> joint_denoise(PredictorEnsemble ensemble,
                                                         const DenoiseConfig& cfg,
                                                         const ValidationMetric& validation) {
  ensemble.validate();
  cfg.validate();

  std::vector<std::size_t> update_set;
  if (cfg.joint) {
    for (std::size_t i = 0; i < ensemble.size(); ++i) update_set.push_back(i);
  } else {
    update_set = ensemble.target_indices;
  }

  if (cfg.algorithm == Algorithm::npc && cfg.use_ard && cfg.n_iters > 0) {
    ArdConfig ard = cfg.ard;
    ard.lambda_noise = cfg.ard_lambda_noise();
    std::vector<std::size_t> missing;
    const bool same_lambda = ensemble.relevance_lambda == ard.lambda_noise &&
                             ensemble.relevance.size() == ensemble.size();
    for (std::size_t i : update_set)
      if (!same_lambda || ensemble.relevance[i].size() == 0) missing.push_back(i);
    if (!same_lambda) missing = update_set;
    if (!missing.empty()) ensemble.compute_relevance(ard, missing);
  }

  DenoiseTrace trace;
  auto record = [&](const PredictorEnsemble& e) {
    std::vector<NormalizedPredictor> snap;
    for (std::size_t t : e.target_indices) snap.push_back(e.members[t]);
    trace.snapshots.push_back(std::move(snap));
    if (validation) trace.validation.push_back(validation(e));
  };
  record(ensemble);

  for (int t = 0; t < cfg.n_iters; ++t) {
    std::vector<std::optional<StepResult>> results(update_set.size());
    parallel_for(update_set.size(), [&](std::size_t k) {
      results[k] = update_member(update_set[k], ensemble, cfg);
    });
    for (std::size_t k = 0; k < update_set.size(); ++k) {
      const StepResult& r = *results[k];
      const std::string where =
          "iteration " + std::to_string(t + 1) + " member " + std::to_string(update_set[k]);
      if (!r.power_converged) trace.warnings.push_back(where + ": power iteration hit power_max");
      if (r.small_gap) trace.warnings.push_back(where + ": leading eigenvalue gap below 1e-12");
      ensemble.members[update_set[k]] = r.predictor;
    }
    record(ensemble);
  }
  return {std::move(ensemble), std::move(trace)};
}

PredictorEnsemble make_multiclass_ensemble(std::span<const EvaluationVector> class_columns,
                                           const ReferenceMatrix& rank_refs) {
  if (class_columns.size() < 2) throw InvalidArgument("multiclass: need at least 2 class columns");
  PredictorEnsemble e;
  for (std::size_t h = 0; h < class_columns.size(); ++h) {
    auto [p, s] = center_normalize(class_columns[h]);
    e.members.push_back(std::move(p));
    e.scale_shifts.push_back(s);
    e.target_indices.push_back(h);
  }
  const Eigen::Index n = e.members.front().size();
  if (rank_refs.rows() != n) throw DimensionMismatch("multiclass: reference length differs");
  // References are already normalized; a unit ScaleShift restores them as-is.
  const ScaleShift identity{0.0, 1.0 / std::sqrt(static_cast<double>(n))};
  for (Eigen::Index j = 0; j < rank_refs.count(); ++j) {
    e.members.emplace_back(Vector(rank_refs.matrix().col(j)));
    e.scale_shifts.push_back(identity);
  }
  e.validate();
  return e;
}

std::vector<EvaluationVector> multiclass_denoise(std::span<const EvaluationVector> class_columns,
                                                 const ReferenceMatrix& rank_refs,
                                                 const DenoiseConfig& cfg) {
  auto [out, trace] = joint_denoise(make_multiclass_ensemble(class_columns, rank_refs), cfg);
  std::vector<EvaluationVector> restored;
  for (std::size_t t : out.target_indices) restored.push_back(out.restored(t));
  return restored;
}

TuneResult tune(const PredictorEnsemble& ensemble, std::span<const DenoiseConfig> candidates,
                const ValidationMetric& metric) {
  if (candidates.empty()) throw EmptyGrid("tune: empty hyperparameter grid");
  if (!metric) throw InvalidArgument("tune: a validation metric is required");

  TuneResult best;
  bool have_best = false;
  // ARD weights depend only on the likelihood noise; fit once per value.
  std::map<double, PredictorEnsemble> prepared;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const DenoiseConfig& cfg = candidates[c];
    const PredictorEnsemble* start = &ensemble;
    if (cfg.algorithm == Algorithm::npc && cfg.use_ard && cfg.n_iters > 0) {
      const double lambda = cfg.ard_lambda_noise();
      auto it = prepared.find(lambda);
      if (it == prepared.end()) {
        PredictorEnsemble e = ensemble;
        ArdConfig ard = cfg.ard;
        ard.lambda_noise = lambda;
        e.compute_relevance(ard);
        it = prepared.emplace(lambda, std::move(e)).first;
      }
      start = &it->second;
    }
    auto [final_state, trace] = joint_denoise(*start, cfg, metric);
    for (std::size_t t = 0; t < trace.validation.size(); ++t) {
      if (!have_best || trace.validation[t] > best.best_score) {
        have_best = true;
        best.best_index = c;
        best.config = cfg;
        best.best_iteration = t;
        best.best_score = trace.validation[t];
        best.best_targets = trace.snapshots[t];
      }
    }
    best.curves.push_back(std::move(trace.validation));
  }
  return best;
}

std::vector<DenoiseConfig> make_grid(const DenoiseConfig& base, std::span<const double> sigma_sq,
                                     std::span<const double> sigma_k_sq,
                                     std::span<const double> lambda_j) {
  std::vector<DenoiseConfig> grid;
  for (double s : sigma_sq)
    for (double k : sigma_k_sq)
      for (double l : lambda_j) {
        DenoiseConfig c = base;
        if (base.algorithm == Algorithm::opc) {
          c.opc_sigma_sq = s;
          c.opc_lambda = l;
        } else {
          c.sigma_sq = s;
          c.sigma_k_sq = k;
          c.lambda_j = l;
        }
        grid.push_back(c);
      }
  return grid;
}

double median_sq_row_distance(const Matrix& g, const Vector& weights) {
  const Eigen::Index n = g.rows();
  if (n < 2) throw InvalidArgument("median_sq_row_distance: need at least 2 rows");
  const Vector w = weights.size() == 0 ? Vector::Ones(g.cols()) : weights;
  if (w.size() != g.cols()) throw DimensionMismatch("median_sq_row_distance: weight count");
  const auto rows = even_basis_indices(n, std::min<Eigen::Index>(n, 1000));
  std::vector<double> d;
  d.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      d.push_back(((g.row(rows[a]) - g.row(rows[b])).array().square() * w.transpose().array()).sum());
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace predcomb
