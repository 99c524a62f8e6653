#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "predcomb/bench.hpp"

namespace predcomb {

// Dataset CSV: header `id,split,gt,target,ref_1,...,ref_R`; `gt` cells may
// be empty. Numbers are written in shortest round-trip form.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

struct IterationMetric {
  std::size_t iteration = 0;
  std::string metric;
  double value = 0.0;
};

struct ResultsSummary {
  nlohmann::ordered_json config;
  std::vector<IterationMetric> per_iteration;
  nlohmann::ordered_json final_metrics;
  std::uint64_t seed = 0;
};

// Writes `iteration,metric,value` rows to csv_path and the summary (keys
// config, per_iteration, final_metrics, seed) to json_path.
void save_results(const std::filesystem::path& csv_path, const std::filesystem::path& json_path,
                  const ResultsSummary& summary);

// `id,split,value` rows for a denoised predictor.
void save_predictions(const std::filesystem::path& path, const Dataset& dataset,
                      const Vector& values);

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace predcomb
