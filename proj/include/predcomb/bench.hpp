#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "predcomb/core.hpp"

namespace predcomb {

enum class Split { train, val, test };

const char* to_string(Split s);
Split parse_split(const std::string& s);

enum class ToyMode { difference, xor_ };

struct ToySpec {
  Eigen::Index n_points = 100;
  double noise_std = 1.0;
  ToyMode mode = ToyMode::difference;
  std::uint64_t seed = 0;
};

// A target predictor, its references, optional ground truth and a
// per-point split. Ground-truth entries may be NaN (unknown).
struct Dataset {
  std::vector<std::string> ids;
  std::vector<Split> split;
  std::optional<Vector> ground_truth;
  Vector target;
  std::vector<Vector> references;

  Eigen::Index size() const { return target.size(); }
  // Point indices assigned to `s`, ascending.
  std::vector<Eigen::Index> indices(Split s) const;
  void validate() const;
};

struct MetricReport {
  double kendall_x100 = 0.0;
  std::optional<double> classification_accuracy_pct;
  std::vector<double> curve;
};

// Toy problems: g1, g2 uniform on {0,1}; ground truth g1 - g2 (difference)
// or XOR(g1, g2); target = ground truth + N(0, noise_std^2). Points are split
// evenly between val and test by a seeded shuffle.
Dataset gen_toy(const ToySpec& spec);

// Synthetic relative-attribute data. Classes are drawn uniformly; the target
// and each informative reference are strictly monotone functions of the
// class index (random level sets and directions) plus Gaussian noise; random
// references are pure N(0,1) noise.
Dataset gen_attribute_benchmark(Eigen::Index n_points, int n_classes, int n_informative,
                                int n_random, double noise_std, std::uint64_t seed);

struct MulticlassDataset {
  std::vector<int> labels;
  std::vector<Split> split;
  std::vector<Vector> class_scores;  // one column per class
  std::vector<Vector> references;    // attribute rankers
};

// Class-score columns are one-hot labels plus N(0, score_noise^2); the
// references are monotone attribute functions of the class plus
// N(0, attribute_noise^2).
MulticlassDataset gen_multiclass_benchmark(Eigen::Index n_points, int n_classes, int n_attributes,
                                           double score_noise, double attribute_noise,
                                           std::uint64_t seed);

// 100 * (concordant - discordant) / (pairs ordered by b). Pairs tied in
// either vector are neither concordant nor discordant; pairs tied in b are
// excluded from the denominator. Returns 0 when b has no ordered pair.
double kendall_x100(const Vector& a, const Vector& b);
double kendall_x100(const Vector& a, const Vector& b, std::span<const Eigen::Index> subset);

// Percentage of points whose argmax column (lowest index wins ties) equals
// the label.
double classification_accuracy(std::span<const Vector> pred_columns, std::span<const int> labels);
double classification_accuracy(std::span<const Vector> pred_columns, std::span<const int> labels,
                               std::span<const Eigen::Index> subset);

}  // namespace predcomb
