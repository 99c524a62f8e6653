#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "predcomb/bench.hpp"
#include "predcomb/denoise.hpp"

namespace predcomb {

// Validation-tuned evaluation protocol shared by `bench` and the acceptance
// suite: every algorithm is tuned on the val points (hyperparameters and
// iteration count, iteration 0 included) and scored on the test points.

enum class Scenario { toy1, toy2, attr, multiclass };

const char* to_string(Scenario s);
Scenario parse_scenario(const std::string& name);

struct Grid {
  std::vector<double> sigma_sq;
  std::vector<double> sigma_k_factor;  // multiplies the median-distance heuristic
  std::vector<double> lambda_j;
};

// sigma^2 in {1e-3, 1e-2, 1e-1, 1}, sigma_k^2 in {0.1, 1, 10} x heuristic,
// lambda_J in {0.1, 1, 10}.
Grid default_npc_grid();
// lambda_J in {0.1, 1, 10}.
Grid default_lpc_grid();
// sigma_O^2 in {0.1, 1, 10}, lambda_O in {0.1, 1, 10}.
Grid default_opc_grid();

// Median squared distance between reference rows of the first target,
// weighted by its ARD weights when cfg.use_ard (fitted at the config's ARD
// noise level).
double sigma_k_heuristic(const PredictorEnsemble& ensemble, const DenoiseConfig& cfg);

// Expands a grid into concrete configs (sigma_k axis scaled by the
// heuristic for NPC).
std::vector<DenoiseConfig> expand_grid(const PredictorEnsemble& ensemble, const DenoiseConfig& base,
                                       const Grid& grid);

struct Variant {
  std::string name;
  DenoiseConfig base;
  Grid grid;
};

struct VariantScore {
  std::string name;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::size_t iteration = 0;
  DenoiseConfig config;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double baseline_val = 0.0;
  double baseline_test = 0.0;
  std::vector<VariantScore> variants;
};

struct ScenarioOptions {
  Scenario scenario = Scenario::toy1;
  std::optional<std::string> ablate;  // "joint" or "ard"
  int n_iters = 20;
  Eigen::Index n_basis = 300;
};

// Variants run for a scenario: OPC, LPC, NPC (toy problems use the
// target-only isotropic configuration, the others joint + ARD), plus
// "NPC final" and "NPC w/o <ablate>" when an ablation is requested.
std::vector<Variant> scenario_variants(const ScenarioOptions& options);

SeedResult run_seed(const ScenarioOptions& options, std::uint64_t seed);

// Runs seeds seed_base..seed_base+count-1, possibly concurrently; results
// are ordered by seed.
std::vector<SeedResult> run_scenario(const ScenarioOptions& options, std::uint64_t seed_base,
                                     int count);

}  // namespace predcomb
