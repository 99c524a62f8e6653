#include "predcomb/experiment.hpp"

#include "predcomb/errors.hpp"
#include "predcomb/parallel.hpp"

namespace predcomb {
namespace {

constexpr Eigen::Index kToyPoints = 100;
constexpr Eigen::Index kAttrPoints = 200;
constexpr int kAttrClasses = 8;
constexpr int kAttrInformative = 5;
constexpr int kAttrRandom = 3;
constexpr double kAttrNoise = 0.15;
constexpr Eigen::Index kMulticlassPoints = 150;
constexpr int kMulticlassClasses = 3;
constexpr int kMulticlassAttributes = 3;
constexpr double kScoreNoise = 0.6;
constexpr double kAttributeNoise = 0.1;

struct Problem {
  PredictorEnsemble ensemble;
  std::vector<Eigen::Index> val, test;
  ValidationMetric val_metric, test_metric;
};

Problem ranking_problem(const Dataset& d) {
  std::vector<EvaluationVector> members{EvaluationVector(d.target)};
  for (const auto& r : d.references) members.emplace_back(r);
  Problem p{PredictorEnsemble::from_raw(members, {0}), d.indices(Split::val), d.indices(Split::test),
            {}, {}};
  const Vector gt = *d.ground_truth;
  auto metric = [gt](std::vector<Eigen::Index> idx) {
    return [gt, idx = std::move(idx)](const PredictorEnsemble& e) {
      return kendall_x100(e.members[e.target_indices.front()].values(), gt, idx);
    };
  };
  p.val_metric = metric(p.val);
  p.test_metric = metric(p.test);
  return p;
}

Problem multiclass_problem(const MulticlassDataset& d) {
  Matrix refs(static_cast<Eigen::Index>(d.labels.size()), static_cast<Eigen::Index>(d.references.size()));
  for (std::size_t j = 0; j < d.references.size(); ++j)
    refs.col(static_cast<Eigen::Index>(j)) = NormalizedPredictor::project(d.references[j]).values();
  std::vector<EvaluationVector> columns;
  for (const auto& c : d.class_scores) columns.emplace_back(c);
  Problem p{make_multiclass_ensemble(columns, ReferenceMatrix(refs)), {}, {}, {}, {}};
  for (std::size_t i = 0; i < d.split.size(); ++i)
    (d.split[i] == Split::val ? p.val : p.test).push_back(static_cast<Eigen::Index>(i));
  auto metric = [labels = d.labels](std::vector<Eigen::Index> idx) {
    return [labels, idx = std::move(idx)](const PredictorEnsemble& e) {
      std::vector<Vector> cols;
      for (std::size_t t : e.target_indices) cols.push_back(e.restored(t).values());
      return classification_accuracy(cols, labels, idx);
    };
  };
  p.val_metric = metric(p.val);
  p.test_metric = metric(p.test);
  return p;
}

Problem make_problem(Scenario s, std::uint64_t seed) {
  switch (s) {
    case Scenario::toy1:
      return ranking_problem(gen_toy(ToySpec{kToyPoints, 1.0, ToyMode::difference, seed}));
    case Scenario::toy2:
      return ranking_problem(gen_toy(ToySpec{kToyPoints, 1.0, ToyMode::xor_, seed}));
    case Scenario::attr:
      return ranking_problem(gen_attribute_benchmark(kAttrPoints, kAttrClasses, kAttrInformative,
                                                     kAttrRandom, kAttrNoise, seed));
    case Scenario::multiclass:
      return multiclass_problem(gen_multiclass_benchmark(kMulticlassPoints, kMulticlassClasses,
                                                         kMulticlassAttributes, kScoreNoise,
                                                         kAttributeNoise, seed));
  }
  throw InvalidArgument("unknown scenario");
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::toy1: return "toy1";
    case Scenario::toy2: return "toy2";
    case Scenario::attr: return "attr";
    case Scenario::multiclass: return "multiclass";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "toy1") return Scenario::toy1;
  if (name == "toy2") return Scenario::toy2;
  if (name == "attr") return Scenario::attr;
  if (name == "multiclass") return Scenario::multiclass;
  throw InvalidArgument("unknown scenario '" + name + "' (expected toy1, toy2, attr or multiclass)");
}

Grid default_npc_grid() { return Grid{{1e-3, 1e-2, 1e-1, 1.0}, {0.1, 1.0, 10.0}, {0.1, 1.0, 10.0}}; }
Grid default_lpc_grid() { return Grid{{1.0}, {1.0}, {0.1, 1.0, 10.0}}; }
Grid default_opc_grid() { return Grid{{0.1, 1.0, 10.0}, {1.0}, {0.1, 1.0, 10.0}}; }

double sigma_k_heuristic(const PredictorEnsemble& ensemble, const DenoiseConfig& cfg) {
  const std::size_t target = ensemble.target_indices.front();
  const ReferenceMatrix refs = ensemble.references_for(target);
  if (!cfg.use_ard) return median_sq_row_distance(refs.matrix());
  ArdConfig ard = cfg.ard;
  ard.lambda_noise = cfg.ard_lambda_noise();
  const Vector w = optimize_relevance(refs, ensemble.members[target], ard);
  const double h = median_sq_row_distance(refs.matrix(), w);
  return h > 0.0 ? h : median_sq_row_distance(refs.matrix());
}

std::vector<DenoiseConfig> expand_grid(const PredictorEnsemble& ensemble, const DenoiseConfig& base,
                                       const Grid& grid) {
  if (base.algorithm != Algorithm::npc)
    return make_grid(base, grid.sigma_sq, grid.sigma_k_factor, grid.lambda_j);
  std::vector<DenoiseConfig> out;
  for (double s : grid.sigma_sq) {
    DenoiseConfig at_s = base;
    at_s.sigma_sq = s;
    const double h = sigma_k_heuristic(ensemble, at_s);
    std::vector<double> k;
    for (double factor : grid.sigma_k_factor) k.push_back(factor * h);
    const double s_axis[] = {s};
    for (auto& c : make_grid(at_s, s_axis, k, grid.lambda_j)) out.push_back(std::move(c));
  }
  return out;
}

std::vector<Variant> scenario_variants(const ScenarioOptions& options) {
  DenoiseConfig base;
  base.n_iters = options.n_iters;
  base.n_basis = options.n_basis;

  const bool toy = options.scenario == Scenario::toy1 || options.scenario == Scenario::toy2;
  DenoiseConfig opc = base, lpc = base, npc = base;
  opc.algorithm = Algorithm::opc;
  lpc.algorithm = Algorithm::lpc;
  // Toy references are noise-free and the targets are not linear in them
  // (toy2), so the toy NPC runs target-only with the isotropic kernel.
  npc.joint = !toy;
  npc.use_ard = !toy;
  opc.joint = lpc.joint = !toy;

  std::vector<Variant> out{{"OPC", opc, default_opc_grid()},
                           {"LPC", lpc, default_lpc_grid()},
                           {"NPC", npc, default_npc_grid()}};
  if (options.ablate) {
    DenoiseConfig final_cfg = base;
    DenoiseConfig ablated = base;
    if (*options.ablate == "joint") {
      ablated.joint = false;
    } else if (*options.ablate == "ard") {
      ablated.use_ard = false;
    } else {
      throw InvalidArgument("unknown ablation '" + *options.ablate + "' (expected joint or ard)");
    }
    out.push_back({"NPC w/o " + *options.ablate, ablated, default_npc_grid()});
    out.push_back({"NPC final", final_cfg, default_npc_grid()});
  }
  return out;
}

SeedResult run_seed(const ScenarioOptions& options, std::uint64_t seed) {
  const Problem p = make_problem(options.scenario, seed);
  SeedResult r;
  r.seed = seed;
  r.baseline_val = p.val_metric(p.ensemble);
  r.baseline_test = p.test_metric(p.ensemble);
  for (const Variant& v : scenario_variants(options)) {
    const auto candidates = expand_grid(p.ensemble, v.base, v.grid);
    const TuneResult t = tune(p.ensemble, candidates, p.val_metric);
    PredictorEnsemble chosen = p.ensemble;
    for (std::size_t k = 0; k < chosen.target_indices.size(); ++k)
      chosen.members[chosen.target_indices[k]] = t.best_targets[k];
    r.variants.push_back(VariantScore{v.name, t.best_score, p.test_metric(chosen), t.best_iteration, t.config});
  }
  return r;
}

std::vector<SeedResult> run_scenario(const ScenarioOptions& options, std::uint64_t seed_base, int count) {
  if (count < 1) throw InvalidArgument("run_scenario: need at least one seed");
  std::vector<SeedResult> results(static_cast<std::size_t>(count));
  parallel_for(results.size(), [&](std::size_t k) { results[k] = run_seed(options, seed_base + k); });
  return results;
}

}  // namespace predcomb
