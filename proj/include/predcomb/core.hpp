#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

namespace predcomb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Degeneracy floor on the population standard deviation.
inline constexpr double kVarianceFloor = 1e-12;

struct ScaleShift;

// Raw evaluations of a predictor on N test points. N >= 2, all finite.
class EvaluationVector {
 public:
  explicit EvaluationVector(Vector values);
  EvaluationVector(std::initializer_list<double> values);

  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vector values_;
};

// A point on the model manifold: centered, unit Euclidean norm.
class NormalizedPredictor {
 public:
  // Validates that `values` is centered and unit norm (within 1e-9).
  explicit NormalizedPredictor(Vector values);

  // Projects an arbitrary non-constant vector onto the manifold.
  static NormalizedPredictor project(const Vector& values);

  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  struct Unchecked {};
  NormalizedPredictor(Vector values, Unchecked) : values_(std::move(values)) {}
  friend std::pair<NormalizedPredictor, ScaleShift> center_normalize(const EvaluationVector&);

  Vector values_;
};

// Mean and population standard deviation of an original evaluation vector.
struct ScaleShift {
  double mean = 0.0;
  double std = 1.0;
};

// N x R matrix whose columns are normalized reference predictors.
class ReferenceMatrix {
 public:
  explicit ReferenceMatrix(Matrix columns);
  explicit ReferenceMatrix(std::span<const NormalizedPredictor> columns);

  const Matrix& matrix() const noexcept { return columns_; }
  Eigen::Index rows() const noexcept { return columns_.rows(); }
  Eigen::Index count() const noexcept { return columns_.cols(); }

 private:
  Matrix columns_;
};

// v - mean(v) * 1.
Vector center(const EvaluationVector& v);
Vector center(const Vector& v);

// Returns the manifold projection of v together with its mean and std.
// Throws ZeroVarianceError for (numerically) constant inputs.
std::pair<NormalizedPredictor, ScaleShift> center_normalize(const EvaluationVector& v);

// Undoes center_normalize: p * std * sqrt(N) + mean.
EvaluationVector inverse_normalize(const NormalizedPredictor& p, const ScaleShift& s);

}  // namespace predcomb
