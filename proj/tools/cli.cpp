#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "predcomb/errors.hpp"
#include "predcomb/experiment.hpp"
#include "predcomb/io.hpp"

namespace predcomb::cli {
namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct ToygenArgs {
  std::string mode = "difference";
  Eigen::Index n = 100;
  double noise = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct AttrgenArgs {
  Eigen::Index n = 200;
  int classes = 8;
  int informative = 5;
  int random = 8;
  double noise = 0.15;
  std::uint64_t seed = 0;
  std::string out;
};

struct DenoiseArgs {
  std::string input;
  std::string algo = "npc";
  double sigma_sq = 0.1;
  double sigma_k_sq = 1.0;
  double lambda_j = 1.0;
  int iters = 20;
  Eigen::Index basis = 300;
  bool joint = false;
  bool ard = false;
  double opc_sigma_sq = 1.0;
  double opc_lambda = 1.0;
  bool tune = false;
  std::vector<double> grid_sigma_sq{1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> grid_sigma_k{0.1, 1.0, 10.0};
  std::vector<double> grid_lambda{0.1, 1.0, 10.0};
  std::string prefix = "denoised";
  std::uint64_t seed = 0;
};

struct ArdArgs {
  std::string input;
  double sigma_sq = 0.1;
  int informative = 0;
  std::string out = "ard_weights.csv";
};

struct BenchArgs {
  std::string scenario;
  int seeds = 10;
  std::uint64_t seed_base = 0;
  std::string ablate;
  int iters = 20;
  Eigen::Index basis = 300;
  std::string prefix = "bench";
};

ordered_json config_json(const DenoiseConfig& c) {
  ordered_json j;
  j["algorithm"] = to_string(c.algorithm);
  j["sigma_sq"] = c.sigma_sq;
  j["sigma_k_sq"] = c.sigma_k_sq;
  j["lambda_j"] = c.lambda_j;
  j["n_iters"] = c.n_iters;
  j["n_basis"] = c.n_basis;
  j["joint"] = c.joint;
  j["use_ard"] = c.use_ard;
  j["opc_sigma_sq"] = c.opc_sigma_sq;
  j["opc_lambda"] = c.opc_lambda;
  j["power_tol"] = c.power_tol;
  j["power_max"] = c.power_max;
  j["ridge"] = c.ridge;
  j["ard_lambda_noise"] = c.ard_lambda_noise();
  return j;
}

class Manifest {
 public:
  explicit Manifest(std::string command) : start_(Clock::now()) { j_["command"] = std::move(command); }
  ordered_json& operator[](const char* k) { return j_[k]; }
  void emit(const std::string& path, std::ostream& err) {
    j_["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    if (path.empty()) {
      err << "manifest: " << j_.dump() << "\n";
      return;
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << j_.dump(2) << "\n";
  }

 private:
  ordered_json j_;
  Clock::time_point start_;
};

PredictorEnsemble dataset_ensemble(const Dataset& d) {
  std::vector<EvaluationVector> members{EvaluationVector(d.target)};
  for (const auto& r : d.references) members.emplace_back(r);
  return PredictorEnsemble::from_raw(members, {0});
}

// Known ground-truth indices within `idx` (or all points when idx is empty).
std::vector<Eigen::Index> with_truth(const Dataset& d, std::vector<Eigen::Index> idx) {
  if (idx.empty()) {
    idx.resize(static_cast<std::size_t>(d.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  }
  std::vector<Eigen::Index> out;
  if (!d.ground_truth) return out;
  for (Eigen::Index i : idx)
    if (std::isfinite((*d.ground_truth)[i])) out.push_back(i);
  return out;
}

int cmd_toygen(const ToygenArgs& a, const std::string& manifest_path, std::ostream& out,
               std::ostream& err) {
  Manifest m("toygen");
  ToySpec spec{a.n, a.noise, a.mode == "xor" ? ToyMode::xor_ : ToyMode::difference, a.seed};
  const Dataset d = gen_toy(spec);
  save_dataset(a.out, d);
  m["config"] = {{"mode", a.mode}, {"n", a.n}, {"noise", a.noise}};
  m["seed"] = a.seed;
  m["outputs"] = {a.out};
  m.emit(manifest_path, err);
  out << "wrote " << d.size() << " rows to " << a.out << "\n";
  return kOk;
}

int cmd_attrgen(const AttrgenArgs& a, const std::string& manifest_path, std::ostream& out,
                std::ostream& err) {
  Manifest m("attrgen");
  const Dataset d = gen_attribute_benchmark(a.n, a.classes, a.informative, a.random, a.noise, a.seed);
  save_dataset(a.out, d);
  m["config"] = {{"n", a.n},           {"classes", a.classes}, {"informative", a.informative},
                 {"random", a.random}, {"noise", a.noise}};
  m["seed"] = a.seed;
  m["outputs"] = {a.out};
  m.emit(manifest_path, err);
  out << "wrote " << d.size() << " rows (" << d.references.size() << " references) to " << a.out
      << "\n";
  return kOk;
}

int cmd_denoise(const DenoiseArgs& a, const std::string& manifest_path, std::ostream& out,
                std::ostream& err) {
  Manifest m("denoise");
  const Dataset d = load_dataset(a.input);
  PredictorEnsemble ens = dataset_ensemble(d);

  DenoiseConfig cfg;
  cfg.algorithm = parse_algorithm(a.algo);
  cfg.sigma_sq = a.sigma_sq;
  cfg.sigma_k_sq = a.sigma_k_sq;
  cfg.lambda_j = a.lambda_j;
  cfg.n_iters = a.iters;
  cfg.n_basis = a.basis;
  cfg.joint = a.joint;
  cfg.use_ard = a.ard;
  cfg.opc_sigma_sq = a.opc_sigma_sq;
  cfg.opc_lambda = a.opc_lambda;
  cfg.validate();

  const std::vector<Eigen::Index> eval = with_truth(d, {});
  auto kendall_of = [&](const Vector& v, const std::vector<Eigen::Index>& idx) {
    return kendall_x100(v, *d.ground_truth, idx);
  };

  ResultsSummary summary;
  summary.seed = a.seed;
  NormalizedPredictor final_target = ens.members[0];
  std::size_t chosen_iteration = static_cast<std::size_t>(cfg.n_iters);

  if (a.tune) {
    const std::vector<Eigen::Index> val = with_truth(d, d.indices(Split::val));
    if (val.size() < 2)
      throw InvalidArgument("denoise --tune: needs at least 2 val points with ground truth");
    Grid grid{a.grid_sigma_sq, a.grid_sigma_k, a.grid_lambda};
    if (cfg.algorithm == Algorithm::lpc) grid.sigma_sq = {cfg.sigma_sq}, grid.sigma_k_factor = {1.0};
    if (cfg.algorithm == Algorithm::opc) grid.sigma_k_factor = {1.0};
    const auto candidates = expand_grid(ens, cfg, grid);
    const TuneResult t = tune(ens, candidates, [&](const PredictorEnsemble& e) {
      return kendall_of(e.members[0].values(), val);
    });
    cfg = t.config;
    final_target = t.best_targets.front();
    chosen_iteration = t.best_iteration;
    for (std::size_t it = 0; it < t.curves[t.best_index].size(); ++it)
      summary.per_iteration.push_back({it, "val_kendall_x100", t.curves[t.best_index][it]});
    summary.final_metrics["val_kendall_x100"] = t.best_score;
    summary.final_metrics["grid_size"] = candidates.size();
  } else {
    auto [result, trace] = joint_denoise(ens, cfg);
    final_target = result.members[0];
    for (std::size_t it = 0; it < trace.snapshots.size(); ++it)
      if (eval.size() >= 2)
        summary.per_iteration.push_back({it, "kendall_x100", kendall_of(trace.snapshots[it][0].values(), eval)});
    for (const auto& w : trace.warnings) err << "warning: " << w << "\n";
    summary.final_metrics["warnings"] = trace.warnings;
  }

  const Vector restored = inverse_normalize(final_target, ens.scale_shifts[0]).values();
  summary.config = config_json(cfg);
  summary.config["tuned"] = a.tune;
  summary.final_metrics["iteration"] = chosen_iteration;
  std::optional<double> baseline, final_k;
  if (eval.size() >= 2) {
    baseline = kendall_of(d.target, eval);
    final_k = kendall_of(restored, eval);
    summary.final_metrics["baseline_kendall_x100"] = *baseline;
    summary.final_metrics["kendall_x100"] = *final_k;
    const auto test = with_truth(d, d.indices(Split::test));
    if (test.size() >= 2) summary.final_metrics["test_kendall_x100"] = kendall_of(restored, test);
  }

  const std::string pred_path = a.prefix + "_predictions.csv";
  const std::string csv_path = a.prefix + "_metrics.csv";
  const std::string json_path = a.prefix + "_summary.json";
  save_predictions(pred_path, d, restored);
  save_results(csv_path, json_path, summary);

  m["config"] = summary.config;
  m["seed"] = a.seed;
  m["inputs"] = {a.input};
  m["outputs"] = {pred_path, csv_path, json_path};
  m.emit(manifest_path, err);

  if (final_k) {
    out << std::fixed << std::setprecision(2) << "baseline Kendall x100: " << *baseline << "\n"
        << "final Kendall x100: " << *final_k << "\n";
  } else {
    out << "no ground truth; wrote " << pred_path << "\n";
  }
  return kOk;
}

int cmd_ard(const ArdArgs& a, const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  Manifest m("ard");
  const Dataset d = load_dataset(a.input);
  const PredictorEnsemble ens = dataset_ensemble(d);
  ArdConfig cfg;
  cfg.lambda_noise = a.sigma_sq;
  cfg.validate();
  const Vector sigma_l = optimize_relevance(ens.references_for(0), ens.members[0], cfg);
  const Vector w = normalized_weights(sigma_l);

  std::ofstream f(a.out);
  if (!f) throw IoError("cannot open '" + a.out + "' for writing");
  f << "reference,sigma_l,weight\n";
  for (Eigen::Index j = 0; j < w.size(); ++j)
    f << "ref_" << j + 1 << "," << format_double(sigma_l[j]) << "," << format_double(w[j]) << "\n";
  if (!f) throw IoError("failed writing '" + a.out + "'");

  m["config"] = {{"sigma_sq", a.sigma_sq}, {"step", cfg.step}, {"max_iters", cfg.max_iters},
                 {"grad_tol", cfg.grad_tol}};
  m["seed"] = 0;
  m["inputs"] = {a.input};
  m["outputs"] = {a.out};
  m.emit(manifest_path, err);

  out << "reference  sigma_l       weight\n";
  for (Eigen::Index j = 0; j < w.size(); ++j)
    out << "ref_" << std::left << std::setw(7) << j + 1 << std::right << std::scientific
        << std::setprecision(4) << sigma_l[j] << "  " << std::fixed << std::setprecision(4) << w[j]
        << "\n";
  if (a.informative > 0) {
    const Eigen::Index k = a.informative;
    if (k >= w.size())
      throw InvalidArgument("ard --informative: must be smaller than the reference count");
    const double inf = w.head(k).mean(), rnd = w.tail(w.size() - k).mean();
    out << std::fixed << std::setprecision(4) << "informative mean " << inf << ", random mean " << rnd
        << ", separated " << (inf > rnd ? "yes" : "no") << "\n";
  }
  return kOk;
}

struct Stats {
  double mean = 0, std = 0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(s.std / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

int cmd_bench(const BenchArgs& a, const std::string& manifest_path, std::ostream& out,
              std::ostream& err) {
  Manifest m("bench");
  ScenarioOptions opt;
  opt.scenario = parse_scenario(a.scenario);
  if (!a.ablate.empty()) opt.ablate = a.ablate;
  opt.n_iters = a.iters;
  opt.n_basis = a.basis;
  if (a.seeds < 1) throw InvalidArgument("bench: --seeds must be >= 1");
  const auto results = run_scenario(opt, a.seed_base, a.seeds);

  const std::string seeds_path = a.prefix + "_seeds.csv";
  const std::string summary_path = a.prefix + "_summary.csv";
  {
    std::ofstream f(seeds_path);
    if (!f) throw IoError("cannot open '" + seeds_path + "' for writing");
    f << "seed,method,val_accuracy,test_accuracy,improvement,iteration\n";
    for (const auto& r : results) {
      f << r.seed << ",baseline," << format_double(r.baseline_val) << ","
        << format_double(r.baseline_test) << ",0,0\n";
      for (const auto& v : r.variants)
        f << r.seed << "," << v.name << "," << format_double(v.val_accuracy) << ","
          << format_double(v.test_accuracy) << "," << format_double(v.test_accuracy - r.baseline_test)
          << "," << v.iteration << "\n";
    }
    if (!f) throw IoError("failed writing '" + seeds_path + "'");
  }

  std::vector<std::string> names{"baseline"};
  for (const auto& v : results.front().variants) names.push_back(v.name);
  std::vector<Stats> acc, imp;
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::vector<double> a_k, i_k;
    for (const auto& r : results) {
      const double t = k == 0 ? r.baseline_test : r.variants[k - 1].test_accuracy;
      a_k.push_back(t);
      i_k.push_back(t - r.baseline_test);
    }
    acc.push_back(stats(a_k));
    imp.push_back(stats(i_k));
  }
  // Improvement relative to the full model's improvement (ablation tables).
  std::optional<double> final_imp;
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == "NPC final") final_imp = imp[k].mean;

  {
    std::ofstream f(summary_path);
    if (!f) throw IoError("cannot open '" + summary_path + "' for writing");
    f << "method,mean_accuracy,std_accuracy,mean_improvement,std_improvement,ratio_to_final\n";
    for (std::size_t k = 0; k < names.size(); ++k) {
      f << names[k] << "," << format_double(acc[k].mean) << "," << format_double(acc[k].std) << ","
        << format_double(imp[k].mean) << "," << format_double(imp[k].std) << ",";
      if (final_imp && *final_imp != 0.0) f << format_double(imp[k].mean / *final_imp);
      f << "\n";
    }
    if (!f) throw IoError("failed writing '" + summary_path + "'");
  }

  m["config"] = {{"scenario", a.scenario}, {"seeds", a.seeds},  {"ablate", a.ablate},
                 {"iters", a.iters},       {"basis", a.basis}};
  m["seed"] = a.seed_base;
  m["outputs"] = {seeds_path, summary_path};
  m.emit(manifest_path, err);

  const char* metric = opt.scenario == Scenario::multiclass ? "accuracy %" : "Kendall x100";
  out << a.scenario << " (" << a.seeds << " seeds, test " << metric << ")\n";
  out << std::left << std::setw(16) << "method" << std::right << std::setw(18) << "accuracy"
      << std::setw(18) << "improvement" << "\n";
  out << std::fixed << std::setprecision(2);
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::ostringstream a_s, i_s;
    a_s << std::fixed << std::setprecision(2) << acc[k].mean << " +- " << acc[k].std;
    i_s << std::fixed << std::setprecision(2) << std::showpos << imp[k].mean << std::noshowpos
        << " +- " << imp[k].std;
    out << std::left << std::setw(16) << names[k] << std::right << std::setw(18) << a_s.str()
        << std::setw(18) << i_s.str() << "\n";
  }
  return kOk;
}

template <class T>
CLI::Option* flag_default(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  return app->add_option(name, value, help)->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Denoising predictors by joint predictability on a manifold of normalized predictors",
               "predcomb"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string manifest;
  app.add_option("--manifest", manifest,
                 "Write the run manifest (JSON) to this file instead of stderr");

  ToygenArgs tg;
  auto* toygen = app.add_subcommand("toygen", "Generate a toy problem dataset");
  flag_default(toygen, "--mode", tg.mode, "difference (g1 - g2) or xor")
      ->check(CLI::IsMember({"difference", "xor"}));
  flag_default(toygen, "--n", tg.n, "Number of points")->check(CLI::Range(2, 100000000));
  flag_default(toygen, "--noise", tg.noise, "Standard deviation of the target noise")
      ->check(CLI::NonNegativeNumber);
  flag_default(toygen, "--seed", tg.seed, "Generator seed");
  toygen->add_option("-o,--out", tg.out, "Output dataset CSV")->required();

  AttrgenArgs ag;
  auto* attrgen = app.add_subcommand("attrgen", "Generate a synthetic relative-attribute dataset");
  flag_default(attrgen, "--n", ag.n, "Number of points")->check(CLI::Range(2, 100000000));
  flag_default(attrgen, "--classes", ag.classes, "Number of latent classes")->check(CLI::PositiveNumber);
  flag_default(attrgen, "--informative", ag.informative, "Informative references")
      ->check(CLI::NonNegativeNumber);
  flag_default(attrgen, "--random", ag.random, "Pure-noise references")->check(CLI::NonNegativeNumber);
  flag_default(attrgen, "--noise", ag.noise, "Observation noise")->check(CLI::NonNegativeNumber);
  flag_default(attrgen, "--seed", ag.seed, "Generator seed");
  attrgen->add_option("-o,--out", ag.out, "Output dataset CSV")->required();

  DenoiseArgs dn;
  auto* denoise = app.add_subcommand("denoise", "Denoise the target predictor of a dataset");
  denoise->add_option("input", dn.input, "Dataset CSV")->required();
  flag_default(denoise, "--algo", dn.algo, "npc, lpc or opc")->check(CLI::IsMember({"npc", "lpc", "opc"}));
  flag_default(denoise, "--sigma-sq", dn.sigma_sq, "GP noise variance sigma^2")->check(CLI::PositiveNumber);
  flag_default(denoise, "--sigma-k-sq", dn.sigma_k_sq, "Kernel scale sigma_k^2")->check(CLI::PositiveNumber);
  flag_default(denoise, "--lambda-j", dn.lambda_j, "Predictability weight lambda_J")->check(CLI::NonNegativeNumber);
  flag_default(denoise, "--iters", dn.iters, "Iterations S")->check(CLI::NonNegativeNumber);
  flag_default(denoise, "--basis", dn.basis, "Nystrom basis size N'")->check(CLI::PositiveNumber);
  denoise->add_flag("--joint", dn.joint, "Also denoise the references (default: target only)");
  denoise->add_flag("--ard", dn.ard, "ARD-weighted kernel (default: isotropic)");
  flag_default(denoise, "--opc-sigma-sq", dn.opc_sigma_sq, "OPC weight bandwidth sigma_O^2");
  flag_default(denoise, "--opc-lambda", dn.opc_lambda, "OPC weight lambda_O");
  denoise->add_flag("--tune", dn.tune, "Grid-search hyperparameters and iteration on val points");
  flag_default(denoise, "--grid-sigma-sq", dn.grid_sigma_sq, "Tuning grid for sigma^2 (sigma_O^2 for opc)");
  flag_default(denoise, "--grid-sigma-k", dn.grid_sigma_k, "Tuning grid for sigma_k^2 as multiples of the median heuristic");
  flag_default(denoise, "--grid-lambda", dn.grid_lambda, "Tuning grid for lambda_J (lambda_O for opc)");
  flag_default(denoise, "-o,--out-prefix", dn.prefix,
               "Writes <prefix>_predictions.csv, <prefix>_metrics.csv, <prefix>_summary.json");
  flag_default(denoise, "--seed", dn.seed, "Recorded in the summary (the algorithm is deterministic)");

  ArdArgs ar;
  auto* ard = app.add_subcommand("ard", "Fit ARD relevance weights of the references");
  ard->add_option("input", ar.input, "Dataset CSV")->required();
  flag_default(ard, "--sigma-sq", ar.sigma_sq, "Likelihood noise level")->check(CLI::PositiveNumber);
  flag_default(ard, "--informative", ar.informative,
               "Treat the first K references as informative and report separation")
      ->check(CLI::NonNegativeNumber);
  flag_default(ard, "-o,--out", ar.out, "Output weights CSV");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Run baseline/OPC/LPC/NPC over seeded splits");
  bench->add_option("scenario", bn.scenario, "toy1, toy2, attr or multiclass")
      ->required()
      ->check(CLI::IsMember({"toy1", "toy2", "attr", "multiclass"}));
  flag_default(bench, "--seeds", bn.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  flag_default(bench, "--seed-base", bn.seed_base, "First seed");
  flag_default(bench, "--ablate", bn.ablate, "Add an NPC variant without joint or ard")
      ->check(CLI::IsMember({"joint", "ard"}));
  flag_default(bench, "--iters", bn.iters, "Iterations S")->check(CLI::NonNegativeNumber);
  flag_default(bench, "--basis", bn.basis, "Nystrom basis size N'")->check(CLI::PositiveNumber);
  flag_default(bench, "-o,--out-prefix", bn.prefix, "Writes <prefix>_seeds.csv and <prefix>_summary.csv");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*toygen) return cmd_toygen(tg, manifest, out, err);
    if (*attrgen) return cmd_attrgen(ag, manifest, out, err);
    if (*denoise) return cmd_denoise(dn, manifest, out, err);
    if (*ard) return cmd_ard(ar, manifest, out, err);
    if (*bench) return cmd_bench(bn, manifest, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical failure in " << e.what() << "\n";
    return kNumerical;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace predcomb::cli
