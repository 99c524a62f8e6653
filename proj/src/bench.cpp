#include "predcomb/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "predcomb/errors.hpp"
#include "predcomb/rng.hpp"

namespace predcomb {
namespace {

// Stream ids for Rng(seed, stream).
enum Stream : std::uint64_t { kLabels = 0, kRef1, kRef2, kNoise, kSplit, kLevels, kRandomRefs };

// Half the points (rounded down) go to val, the rest to test.
std::vector<Split> val_test_split(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, kSplit);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<Split> split(static_cast<std::size_t>(n), Split::test);
  for (Eigen::Index k = 0; k < n / 2; ++k) split[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = Split::val;
  return split;
}

std::vector<std::string> default_ids(Eigen::Index n) {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

// Strictly monotone class levels in (0, 1): sorted uniforms, direction
// flipped with probability 1/2 unless `increasing`.
std::vector<double> monotone_levels(int n_classes, Rng& rng, bool increasing) {
  std::vector<double> levels(static_cast<std::size_t>(n_classes));
  for (;;) {
    for (auto& l : levels) l = rng.uniform();
    std::sort(levels.begin(), levels.end());
    if (std::adjacent_find(levels.begin(), levels.end()) == levels.end()) break;
  }
  if (!increasing && rng.below(2) == 1) std::reverse(levels.begin(), levels.end());
  return levels;
}

Vector subset_of(const Vector& v, std::span<const Eigen::Index> subset) {
  Vector out(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (subset[k] < 0 || subset[k] >= v.size()) throw InvalidArgument("subset index out of range");
    out[static_cast<Eigen::Index>(k)] = v[subset[k]];
  }
  return out;
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw InvalidArgument("unknown split '" + s + "'");
}

std::vector<Eigen::Index> Dataset::indices(Split s) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

void Dataset::validate() const {
  const auto n = static_cast<std::size_t>(target.size());
  if (n < 2) throw InvalidArgument("Dataset: need at least 2 points");
  if (ids.size() != n || split.size() != n) throw DimensionMismatch("Dataset: ids/split length");
  if (ground_truth && static_cast<std::size_t>(ground_truth->size()) != n)
    throw DimensionMismatch("Dataset: ground truth length");
  for (const auto& r : references)
    if (static_cast<std::size_t>(r.size()) != n) throw DimensionMismatch("Dataset: reference length");
}

Dataset gen_toy(const ToySpec& spec) {
  if (spec.n_points < 2) throw InvalidArgument("gen_toy: n_points must be >= 2");
  if (!(spec.noise_std >= 0.0)) throw InvalidArgument("gen_toy: noise_std must be >= 0");
  const Eigen::Index n = spec.n_points;
  Rng r1(spec.seed, kRef1), r2(spec.seed, kRef2), noise(spec.seed, kNoise);
  Vector g1(n), g2(n), gt(n), f0(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a = r1.below(2), b = r2.below(2);
    g1[i] = static_cast<double>(a);
    g2[i] = static_cast<double>(b);
    gt[i] = spec.mode == ToyMode::difference ? g1[i] - g2[i] : static_cast<double>(a ^ b);
  }
  for (Eigen::Index i = 0; i < n; ++i) f0[i] = gt[i] + spec.noise_std * noise.normal();

  Dataset d;
  d.ids = default_ids(n);
  d.split = val_test_split(n, spec.seed);
  d.ground_truth = gt;
  d.target = f0;
  d.references = {g1, g2};
  return d;
}

Dataset gen_attribute_benchmark(Eigen::Index n_points, int n_classes, int n_informative,
                                int n_random, double noise_std, std::uint64_t seed) {
  if (n_points < 2 || n_classes < 2 || n_informative < 0 || n_random < 0 ||
      n_informative + n_random < 1)
    throw InvalidArgument("gen_attribute_benchmark: invalid counts");
  if (!(noise_std >= 0.0)) throw InvalidArgument("gen_attribute_benchmark: noise_std must be >= 0");
  Rng labels_rng(seed, kLabels), levels_rng(seed, kLevels), noise(seed, kNoise),
      random_rng(seed, kRandomRefs);

  std::vector<int> labels(static_cast<std::size_t>(n_points));
  for (auto& c : labels) c = static_cast<int>(labels_rng.below(static_cast<std::uint64_t>(n_classes)));

  const auto target_levels = monotone_levels(n_classes, levels_rng, true);
  Vector gt(n_points), f0(n_points);
  for (Eigen::Index i = 0; i < n_points; ++i) {
    gt[i] = target_levels[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    f0[i] = gt[i] + noise_std * noise.normal();
  }

  Dataset d;
  d.ids = default_ids(n_points);
  d.split = val_test_split(n_points, seed);
  d.ground_truth = gt;
  d.target = f0;
  for (int j = 0; j < n_informative; ++j) {
    const auto levels = monotone_levels(n_classes, levels_rng, false);
    Vector r(n_points);
    for (Eigen::Index i = 0; i < n_points; ++i)
      r[i] = levels[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] + noise_std * noise.normal();
    d.references.push_back(std::move(r));
  }
  for (int j = 0; j < n_random; ++j) {
    Vector r(n_points);
    for (Eigen::Index i = 0; i < n_points; ++i) r[i] = random_rng.normal();
    d.references.push_back(std::move(r));
  }
  return d;
}

MulticlassDataset gen_multiclass_benchmark(Eigen::Index n_points, int n_classes, int n_attributes,
                                           double score_noise, double attribute_noise,
                                           std::uint64_t seed) {
  if (n_points < 2 || n_classes < 2 || n_attributes < 1)
    throw InvalidArgument("gen_multiclass_benchmark: invalid counts");
  Rng labels_rng(seed, kLabels), levels_rng(seed, kLevels), noise(seed, kNoise);
  MulticlassDataset d;
  d.labels.resize(static_cast<std::size_t>(n_points));
  for (auto& c : d.labels) c = static_cast<int>(labels_rng.below(static_cast<std::uint64_t>(n_classes)));
  d.split = val_test_split(n_points, seed);
  for (int h = 0; h < n_classes; ++h) {
    Vector s(n_points);
    for (Eigen::Index i = 0; i < n_points; ++i)
      s[i] = (d.labels[static_cast<std::size_t>(i)] == h ? 1.0 : 0.0) + score_noise * noise.normal();
    d.class_scores.push_back(std::move(s));
  }
  for (int j = 0; j < n_attributes; ++j) {
    const auto levels = monotone_levels(n_classes, levels_rng, false);
    Vector r(n_points);
    for (Eigen::Index i = 0; i < n_points; ++i)
      r[i] = levels[static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)])] +
             attribute_noise * noise.normal();
    d.references.push_back(std::move(r));
  }
  return d;
}

double kendall_x100(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw LengthMismatch("kendall_x100: lengths differ");
  if (a.size() < 2) throw InvalidArgument("kendall_x100: need at least 2 points");
  const Eigen::Index n = a.size();
  long long concordant = 0, discordant = 0, ordered = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int sb = sign(b[i] - b[j]);
      if (sb == 0) continue;
      ++ordered;
      const int s = sign(a[i] - a[j]) * sb;
      concordant += s > 0;
      discordant += s < 0;
    }
  }
  if (ordered == 0) return 0.0;
  return 100.0 * static_cast<double>(concordant - discordant) / static_cast<double>(ordered);
}

double kendall_x100(const Vector& a, const Vector& b, std::span<const Eigen::Index> subset) {
  if (a.size() != b.size()) throw LengthMismatch("kendall_x100: lengths differ");
  return kendall_x100(subset_of(a, subset), subset_of(b, subset));
}

double classification_accuracy(std::span<const Vector> pred_columns, std::span<const int> labels) {
  std::vector<Eigen::Index> all(labels.size());
  std::iota(all.begin(), all.end(), 0);
  return classification_accuracy(pred_columns, labels, all);
}

double classification_accuracy(std::span<const Vector> pred_columns, std::span<const int> labels,
                               std::span<const Eigen::Index> subset) {
  if (pred_columns.empty()) throw InvalidArgument("classification_accuracy: no columns");
  const auto h = static_cast<int>(pred_columns.size());
  for (const auto& c : pred_columns)
    if (c.size() != static_cast<Eigen::Index>(labels.size()))
      throw LengthMismatch("classification_accuracy: column length differs from labels");
  for (int l : labels)
    if (l < 0 || l >= h) throw LabelOutOfRange("classification_accuracy: label " + std::to_string(l));
  if (subset.empty()) return 0.0;
  std::size_t correct = 0;
  for (Eigen::Index i : subset) {
    int best = 0;
    for (int c = 1; c < h; ++c)
      if (pred_columns[static_cast<std::size_t>(c)][i] > pred_columns[static_cast<std::size_t>(best)][i]) best = c;
    correct += best == labels[static_cast<std::size_t>(i)];
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(subset.size());
}

}  // namespace predcomb
