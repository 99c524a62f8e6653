#include "predcomb/core.hpp"

#include <cmath>
#include <string>

#include "predcomb/errors.hpp"

namespace predcomb {
namespace {

constexpr double kManifoldTol = 1e-9;

void check_manifold(const Vector& v, const char* what) {
  const double n = static_cast<double>(v.size());
  if (v.size() < 2) throw InvalidArgument(std::string(what) + ": need at least 2 points");
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
  if (std::abs(v.sum()) > kManifoldTol * n)
    throw InvalidArgument(std::string(what) + ": vector is not centered");
  if (std::abs(v.norm() - 1.0) > kManifoldTol)
    throw InvalidArgument(std::string(what) + ": vector is not unit norm");
}

}  // namespace

EvaluationVector::EvaluationVector(Vector values) : values_(std::move(values)) {
  if (values_.size() < 2) throw InvalidArgument("EvaluationVector: need at least 2 points");
  if (!values_.allFinite()) throw InvalidArgument("EvaluationVector: non-finite entry");
}

EvaluationVector::EvaluationVector(std::initializer_list<double> values)
    : EvaluationVector(Vector(Eigen::Map<const Vector>(values.begin(),
                                                       static_cast<Eigen::Index>(values.size())))) {}

NormalizedPredictor::NormalizedPredictor(Vector values) : values_(std::move(values)) {
  check_manifold(values_, "NormalizedPredictor");
}

NormalizedPredictor NormalizedPredictor::project(const Vector& values) {
  return center_normalize(EvaluationVector(values)).first;
}

ReferenceMatrix::ReferenceMatrix(Matrix columns) : columns_(std::move(columns)) {
  if (columns_.cols() < 1) throw InvalidArgument("ReferenceMatrix: need at least one reference");
  for (Eigen::Index j = 0; j < columns_.cols(); ++j)
    check_manifold(columns_.col(j), "ReferenceMatrix column");
}

ReferenceMatrix::ReferenceMatrix(std::span<const NormalizedPredictor> columns) {
  if (columns.empty()) throw InvalidArgument("ReferenceMatrix: need at least one reference");
  const Eigen::Index n = columns.front().size();
  columns_.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != n) throw DimensionMismatch("ReferenceMatrix: column length differs");
    columns_.col(static_cast<Eigen::Index>(j)) = columns[j].values();
  }
}

Vector center(const Vector& v) {
  return v.array() - v.mean();
}

Vector center(const EvaluationVector& v) { return center(v.values()); }

std::pair<NormalizedPredictor, ScaleShift> center_normalize(const EvaluationVector& v) {
  const double mean = v.values().mean();
  Vector c = v.values().array() - mean;
  const double norm = c.norm();
  const double std = norm / std::sqrt(static_cast<double>(v.size()));
  if (!(std > kVarianceFloor)) throw ZeroVarianceError("center_normalize: constant predictor");
  c /= norm;
  // Re-center once more: the division can leave O(eps) drift in the sum.
  c.array() -= c.mean();
  c /= c.norm();
  return {NormalizedPredictor(std::move(c), NormalizedPredictor::Unchecked{}), ScaleShift{mean, std}};
}

EvaluationVector inverse_normalize(const NormalizedPredictor& p, const ScaleShift& s) {
  if (!(s.std > 0.0)) throw InvalidArgument("inverse_normalize: std must be positive");
  const double scale = s.std * std::sqrt(static_cast<double>(p.size()));
  return EvaluationVector(Vector((p.values() * scale).array() + s.mean));
}

}  // namespace predcomb
