#include "doctest.h"
#include "predcomb/bench.hpp"
#include "predcomb/errors.hpp"
#include "predcomb/experiment.hpp"
#include "support.hpp"

using namespace predcomb;
using namespace predcomb::testing;

namespace {
PredictorEnsemble toy_ensemble(const Dataset& d) {
  std::vector<EvaluationVector> m{EvaluationVector(d.target)};
  for (const auto& r : d.references) m.emplace_back(r);
  return PredictorEnsemble::from_raw(m, {0});
}

void check_normalized(const NormalizedPredictor& p) {
  CHECK(std::abs(p.values().sum()) <= 1e-9 * static_cast<double>(p.size()));
  CHECK(std::abs(p.values().norm() - 1.0) <= 1e-9);
}
}  // namespace

TEST_SUITE("denoise") {
  TEST_CASE("lambda_J = 0 returns the target unchanged") {
    Rng rng(1);
    PredictorEnsemble e = random_ensemble(rng, 30, 3);
    DenoiseConfig cfg;
    cfg.lambda_j = 0.0;
    cfg.opc_lambda = 0.0;
    for (Algorithm a : {Algorithm::npc, Algorithm::lpc, Algorithm::opc}) {
      cfg.algorithm = a;
      CHECK((update_member(0, e, cfg).predictor.values().array() == e.members[0].values().array()).all());
    }
  }

  TEST_CASE("steps match the dense eigen oracle") {
    Rng rng(2);
    for (int trial = 0; trial < 6; ++trial) {
      const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.below(31));
      PredictorEnsemble e = random_ensemble(rng, n, 1 + static_cast<Eigen::Index>(rng.below(4)));
      DenoiseConfig cfg;
      cfg.n_basis = n;
      cfg.sigma_sq = 0.01 + rng.uniform();
      cfg.sigma_k_sq = 0.1 + rng.uniform();
      cfg.lambda_j = 0.2 + 3 * rng.uniform();
      cfg.use_ard = trial % 2 == 0;
      e.compute_relevance(ArdConfig{});
      for (Algorithm a : {Algorithm::npc, Algorithm::lpc, Algorithm::opc}) {
        cfg.algorithm = a;
        const StepResult r = update_member(0, e, cfg);
        check_normalized(r.predictor);
        CHECK(abs_cosine(r.predictor.values(), top_eigenvector(dense_a(0, e, cfg))) >= 1 - 1e-6);
        CHECK(r.predictor.values().dot(e.members[0].values()) >= 0.0);
      }
    }
  }

  TEST_CASE("step maximizes the Rayleigh objective") {
    Rng rng(3);
    PredictorEnsemble e = random_ensemble(rng, 25, 2);
    DenoiseConfig cfg;
    cfg.use_ard = false;
    cfg.n_basis = 25;
    const Matrix a = dense_a(0, e, cfg);
    const Vector f0 = e.members[0].values();
    const Vector f1 = denoise_step(0, e, cfg).predictor.values();
    CHECK(f1.dot(a * f1) >= f0.dot(a * f0) - 1e-9);
  }

  TEST_CASE("missing relevance and bad noise are reported") {
    Rng rng(4);
    PredictorEnsemble e = random_ensemble(rng, 20, 2);
    DenoiseConfig cfg;
    CHECK_THROWS_AS(denoise_step(0, e, cfg), InvalidArgument);
    cfg.use_ard = false;
    cfg.sigma_sq = 0.0;
    CHECK_THROWS_AS(denoise_step(0, e, cfg), NonPositiveNoise);
  }

  TEST_CASE("toy 1: NPC and LPC reach 100") {
    const Dataset d = gen_toy(ToySpec{100, 1.0, ToyMode::difference, 6});
    DenoiseConfig cfg;
    cfg.joint = false;
    cfg.use_ard = false;
    for (Algorithm a : {Algorithm::npc, Algorithm::lpc}) {
      cfg.algorithm = a;
      auto [out, trace] = joint_denoise(toy_ensemble(d), cfg);
      CHECK(trace.snapshots.size() == 21);
      CHECK(kendall_x100(out.members[0].values(), *d.ground_truth) == doctest::Approx(100.0));
    }
  }

  TEST_CASE("joint_denoise: S = 0, lambda_J = 0, sign canonicalization, determinism") {
    Rng rng(5);
    const PredictorEnsemble e = random_ensemble(rng, 40, 3);
    DenoiseConfig cfg;
    cfg.n_iters = 0;
    auto [same, t0] = joint_denoise(e, cfg);
    for (std::size_t i = 0; i < e.size(); ++i)
      CHECK((same.members[i].values().array() == e.members[i].values().array()).all());
    CHECK(t0.snapshots.size() == 1);

    cfg.n_iters = 5;
    cfg.lambda_j = 0.0;
    auto [fixed, t1] = joint_denoise(e, cfg);
    CHECK((fixed.members[0].values().array() == e.members[0].values().array()).all());

    cfg.lambda_j = 2.0;
    auto [a, ta] = joint_denoise(e, cfg);
    auto [b, tb] = joint_denoise(e, cfg);
    for (std::size_t i = 0; i < e.size(); ++i) {
      CHECK((a.members[i].values().array() == b.members[i].values().array()).all());
      check_normalized(a.members[i]);
    }
    for (std::size_t t = 1; t < ta.snapshots.size(); ++t)
      CHECK(ta.snapshots[t][0].values().dot(ta.snapshots[t - 1][0].values()) >= 0.0);
  }

  TEST_CASE("joint flag controls whether references move") {
    Rng rng(6);
    const PredictorEnsemble e = random_ensemble(rng, 40, 3);
    DenoiseConfig cfg;
    cfg.n_iters = 3;
    cfg.joint = false;
    auto [fixed, tf] = joint_denoise(e, cfg);
    for (std::size_t i = 1; i < e.size(); ++i)
      CHECK((fixed.members[i].values().array() == e.members[i].values().array()).all());
    cfg.joint = true;
    auto [moved, tm] = joint_denoise(e, cfg);
    CHECK((moved.members[1].values() - e.members[1].values()).norm() > 1e-6);
  }

  TEST_CASE("worker count does not change results") {
    Rng rng(7);
    const PredictorEnsemble e = random_ensemble(rng, 60, 4);
    DenoiseConfig cfg;
    cfg.n_iters = 3;
    setenv("PREDCOMB_THREADS", "1", 1);
    auto [a, ta] = joint_denoise(e, cfg);
    setenv("PREDCOMB_THREADS", "4", 1);
    auto [b, tb] = joint_denoise(e, cfg);
    unsetenv("PREDCOMB_THREADS");
    for (std::size_t i = 0; i < e.size(); ++i)
      CHECK((a.members[i].values().array() == b.members[i].values().array()).all());
  }

  TEST_CASE("OPC examples") {
    Rng rng(8);
    const Vector raw = random_vector(rng, 30);
    std::vector<EvaluationVector> m{EvaluationVector(raw), EvaluationVector(raw)};
    const auto e = PredictorEnsemble::from_raw(m, {0});
    const auto r = opc_baseline_step(0, e, 1.0, 5.0);
    CHECK(abs_cosine(r.predictor.values(), e.members[0].values()) >= 1 - 1e-12);
    CHECK((opc_baseline_step(0, e, 1.0, 0.0).predictor.values().array() == e.members[0].values().array()).all());
    CHECK_THROWS_AS(opc_baseline_step(0, e, 0.0, 1.0), InvalidArgument);
  }

  TEST_CASE("multiclass denoising") {
    // Two complementary columns, irrelevant references, lambda_J = 0.
    Rng rng(9);
    const Eigen::Index n = 40;
    Vector p = (random_vector(rng, n).array() * 2.0).exp();
    p = p.array() / (1.0 + p.array());
    const std::vector<EvaluationVector> cols{EvaluationVector(p), EvaluationVector(Vector(1.0 - p.array()))};
    const ReferenceMatrix refs = random_refs(rng, n, 2);
    DenoiseConfig cfg;
    cfg.lambda_j = 0.0;
    const auto out = multiclass_denoise(cols, refs, cfg);
    std::vector<int> before(n), after(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      before[i] = cols[1][i] > cols[0][i];
      after[i] = out[1][i] > out[0][i];
    }
    CHECK(before == after);

    cfg.lambda_j = 1.0;
    cfg.n_iters = 0;
    const auto same = multiclass_denoise(cols, refs, cfg);
    for (int k = 0; k < 2; ++k) CHECK((same[k].values() - cols[k].values()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK_THROWS_AS(multiclass_denoise({cols.begin(), 1}, refs, cfg), InvalidArgument);
  }

  TEST_CASE("multiclass denoising with fixed hyperparameters improves most seeds") {
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const MulticlassDataset d = gen_multiclass_benchmark(150, 3, 3, 0.6, 0.1, seed);
      std::vector<EvaluationVector> cols;
      for (const auto& c : d.class_scores) cols.emplace_back(c);
      Matrix refs(150, 3);
      for (int j = 0; j < 3; ++j) refs.col(j) = NormalizedPredictor::project(d.references[j]).values();
      DenoiseConfig cfg;
      cfg.sigma_k_sq = median_sq_row_distance(refs);
      const auto out = multiclass_denoise(cols, ReferenceMatrix(refs), cfg);
      std::vector<Vector> before, after;
      for (int k = 0; k < 3; ++k) {
        before.push_back(cols[k].values());
        after.push_back(out[k].values());
      }
      improved += classification_accuracy(after, d.labels) >= classification_accuracy(before, d.labels);
    }
    CHECK(improved >= 8);
  }

  TEST_CASE("multiclass benchmark improves classification on most seeds") {
    // Validation-tuned: grid and iteration picked on the val split, accuracy
    // scored on the test split.
    const Grid grid{{1e-2, 1e-1}, {1.0}, {0.1, 1.0, 10.0}};
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const MulticlassDataset d = gen_multiclass_benchmark(150, 3, 3, 0.6, 0.1, seed);
      std::vector<EvaluationVector> cols;
      for (const auto& c : d.class_scores) cols.emplace_back(c);
      Matrix refs(150, 3);
      for (int j = 0; j < 3; ++j) refs.col(j) = NormalizedPredictor::project(d.references[j]).values();
      const PredictorEnsemble e = make_multiclass_ensemble(cols, ReferenceMatrix(refs));
      std::vector<Eigen::Index> val, test;
      for (std::size_t i = 0; i < d.split.size(); ++i)
        (d.split[i] == Split::val ? val : test).push_back(static_cast<Eigen::Index>(i));
      auto accuracy = [&](const PredictorEnsemble& x, const std::vector<Eigen::Index>& idx) {
        std::vector<Vector> out;
        for (std::size_t t : x.target_indices) out.push_back(x.restored(t).values());
        return classification_accuracy(out, d.labels, idx);
      };
      const auto candidates = expand_grid(e, DenoiseConfig{}, grid);
      const TuneResult t = tune(e, candidates, [&](const PredictorEnsemble& x) { return accuracy(x, val); });
      PredictorEnsemble chosen = e;
      for (std::size_t k = 0; k < chosen.target_indices.size(); ++k)
        chosen.members[chosen.target_indices[k]] = t.best_targets[k];
      improved += accuracy(chosen, test) >= accuracy(e, test);
    }
    CHECK(improved >= 8);
  }

  TEST_CASE("tune: single point, exhaustive agreement, determinism") {
    const Dataset d = gen_toy(ToySpec{100, 1.0, ToyMode::xor_, 2});
    const auto e = toy_ensemble(d);
    const auto val = d.indices(Split::val);
    const Vector gt = *d.ground_truth;
    const ValidationMetric metric = [&](const PredictorEnsemble& x) {
      return kendall_x100(x.members[0].values(), gt, val);
    };
    DenoiseConfig base;
    base.joint = false;
    base.use_ard = false;
    const std::vector<DenoiseConfig> one{base};
    const TuneResult single = tune(e, one, metric);
    CHECK(single.best_index == 0);
    CHECK(single.curves.size() == 1);

    const double s[] = {0.01, 0.1}, k[] = {0.02, 0.2}, l[] = {0.5, 2.0};
    const auto grid = make_grid(base, s, k, l);
    CHECK(grid.size() == 8);
    const TuneResult t = tune(e, grid, metric);
    double best = -1e9;
    for (const auto& c : grid) {
      auto [out, trace] = joint_denoise(e, c, metric);
      for (double v : trace.validation) best = std::max(best, v);
    }
    CHECK(t.best_score >= best - 0.5);
    CHECK(t.curves[t.best_index][t.best_iteration] == t.best_score);
    const TuneResult again = tune(e, grid, metric);
    CHECK(again.best_index == t.best_index);
    CHECK(again.best_iteration == t.best_iteration);
    CHECK_THROWS_AS(tune(e, std::vector<DenoiseConfig>{}, metric), EmptyGrid);
  }

  TEST_CASE("tune breaks ties toward the first candidate and iteration") {
    Rng rng(10);
    const auto e = random_ensemble(rng, 20, 2);
    DenoiseConfig base;
    base.use_ard = false;
    const std::vector<DenoiseConfig> grid{base, base};
    const TuneResult t = tune(e, grid, [](const PredictorEnsemble&) { return 1.0; });
    CHECK(t.best_index == 0);
    CHECK(t.best_iteration == 0);
  }

  TEST_CASE("config validation") {
    DenoiseConfig c;
    c.n_basis = 0;
    CHECK_THROWS_AS(c.validate(), BasisCountOutOfRange);
    c = DenoiseConfig{};
    c.lambda_j = -1;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    CHECK(parse_algorithm("lpc") == Algorithm::lpc);
    CHECK_THROWS_AS(parse_algorithm("svm"), InvalidArgument);
  }
}
