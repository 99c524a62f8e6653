#include "predcomb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "predcomb/errors.hpp"

namespace predcomb {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ParseError("invalid number '" + cell + "'", row, col);
  return v;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file, missing header", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);

  auto find = [&](const std::string& name) -> std::size_t {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw ParseError("missing required column '" + name + "'", 1, header.size() + 1);
  };
  const std::size_t c_id = find("id"), c_split = find("split"), c_gt = find("gt"),
                    c_target = find("target");
  std::vector<std::size_t> c_refs;
  for (std::size_t r = 1;; ++r) {
    const std::string name = "ref_" + std::to_string(r);
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) break;
    c_refs.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& h = header[c];
    if (h.rfind("ref_", 0) == 0 && std::find(c_refs.begin(), c_refs.end(), c) == c_refs.end())
      throw ParseError("reference column '" + h + "' out of sequence", 1, c + 1);
  }

  Dataset d;
  std::vector<double> target, gt;
  std::vector<std::vector<double>> refs(c_refs.size());
  bool any_gt = false;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       row, std::min(cells.size(), header.size()) + 1);
    d.ids.push_back(cells[c_id]);
    try {
      d.split.push_back(parse_split(cells[c_split]));
    } catch (const InvalidArgument&) {
      throw ParseError("invalid split '" + cells[c_split] + "'", row, c_split + 1);
    }
    if (cells[c_gt].empty()) {
      gt.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      gt.push_back(parse_number(cells[c_gt], row, c_gt + 1));
      any_gt = true;
    }
    target.push_back(parse_number(cells[c_target], row, c_target + 1));
    for (std::size_t r = 0; r < c_refs.size(); ++r)
      refs[r].push_back(parse_number(cells[c_refs[r]], row, c_refs[r] + 1));
  }

  auto to_vec = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  d.target = to_vec(target);
  if (any_gt) d.ground_truth = to_vec(gt);
  for (const auto& r : refs) d.references.push_back(to_vec(r));
  if (d.target.size() < 2) throw ParseError("need at least 2 data rows", row, 1);
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  dataset.validate();
  auto out = open_output(path);
  out << "id,split,gt,target";
  for (std::size_t r = 0; r < dataset.references.size(); ++r) out << ",ref_" << (r + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out << dataset.ids[k] << ',' << to_string(dataset.split[k]) << ',';
    if (dataset.ground_truth && std::isfinite((*dataset.ground_truth)[i]))
      out << format_double((*dataset.ground_truth)[i]);
    out << ',' << format_double(dataset.target[i]);
    for (const auto& r : dataset.references) out << ',' << format_double(r[i]);
    out << '\n';
  }
  finish(out, path);
}

void save_results(const std::filesystem::path& csv_path, const std::filesystem::path& json_path,
                  const ResultsSummary& summary) {
  {
    auto out = open_output(csv_path);
    out << "iteration,metric,value\n";
    for (const auto& m : summary.per_iteration)
      out << m.iteration << ',' << m.metric << ',' << format_double(m.value) << '\n';
    finish(out, csv_path);
  }
  nlohmann::ordered_json j;
  j["config"] = summary.config;
  auto per = nlohmann::ordered_json::array();
  for (const auto& m : summary.per_iteration)
    per.push_back({{"iteration", m.iteration}, {"metric", m.metric}, {"value", m.value}});
  j["per_iteration"] = per;
  j["final_metrics"] = summary.final_metrics;
  j["seed"] = summary.seed;
  auto out = open_output(json_path);
  out << j.dump(2) << '\n';
  finish(out, json_path);
}

void save_predictions(const std::filesystem::path& path, const Dataset& dataset,
                      const Vector& values) {
  if (values.size() != dataset.size()) throw DimensionMismatch("save_predictions: length");
  auto out = open_output(path);
  out << "id,split,value\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out << dataset.ids[k] << ',' << to_string(dataset.split[k]) << ',' << format_double(values[i]) << '\n';
  }
  finish(out, path);
}

}  // namespace predcomb
