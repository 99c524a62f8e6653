#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "predcomb/bench.hpp"
#include "predcomb/errors.hpp"
#include "predcomb/io.hpp"
#include "support.hpp"

using namespace predcomb;
using namespace predcomb::testing;
namespace fs = std::filesystem;

namespace {
// Pairwise loop counting Kendall concordance with the library's tie rules.
double kendall_oracle(const Vector& a, const Vector& b) {
  double c = 0, d = 0, ordered = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = i + 1; j < a.size(); ++j) {
      if (b[i] == b[j]) continue;
      ++ordered;
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      c += s > 0;
      d += s < 0;
    }
  return ordered == 0 ? 0.0 : 100.0 * (c - d) / ordered;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / ("predcomb_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("toy generator") {
    const Dataset d = gen_toy(ToySpec{100, 0.0, ToyMode::difference, 3});
    CHECK(kendall_x100(d.target, *d.ground_truth) == 100.0);
    for (Eigen::Index i = 0; i < 100; ++i) {
      CHECK((d.references[0][i] == 0.0 || d.references[0][i] == 1.0));
      CHECK((*d.ground_truth)[i] == d.references[0][i] - d.references[1][i]);
    }
    const Dataset x = gen_toy(ToySpec{50, 1.0, ToyMode::xor_, 3});
    CHECK(x.size() == 50);
    for (Eigen::Index i = 0; i < 50; ++i)
      CHECK((*x.ground_truth)[i] == double(x.references[0][i] != x.references[1][i]));
    CHECK(x.indices(Split::val).size() == 25);
    CHECK(x.indices(Split::test).size() == 25);

    const Dataset a = gen_toy(ToySpec{100, 1.0, ToyMode::difference, 9});
    const Dataset b = gen_toy(ToySpec{100, 1.0, ToyMode::difference, 9});
    CHECK((a.target.array() == b.target.array()).all());
    CHECK(a.split == b.split);
    CHECK_THROWS_AS(gen_toy(ToySpec{1, 1.0, ToyMode::difference, 0}), InvalidArgument);
  }

  TEST_CASE("attribute generator") {
    const Dataset d = gen_attribute_benchmark(150, 6, 4, 0, 0.0, 1);
    CHECK(d.references.size() == 4);
    for (const auto& r : d.references) CHECK(std::abs(kendall_x100(r, d.target)) > 0.0);
    const Dataset e = gen_attribute_benchmark(150, 6, 4, 0, 0.0, 1);
    CHECK((d.target.array() == e.target.array()).all());
    const Dataset f = gen_attribute_benchmark(80, 4, 2, 3, 0.2, 5);
    CHECK(f.references.size() == 5);
    CHECK(f.size() == 80);
  }

  TEST_CASE("kendall examples and properties") {
    const Vector a{{1, 2, 3}}, b{{1, 3, 2}};
    CHECK(kendall_x100(a, a) == 100.0);
    CHECK(kendall_x100(a, Vector(-a)) == -100.0);
    CHECK(kendall_x100(a, b) == doctest::Approx(100.0 / 3));
    CHECK_THROWS_AS(kendall_x100(a, Vector{{1, 2}}), LengthMismatch);

    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(120));
      Vector x = random_vector(rng, n), y = random_vector(rng, n);
      // Round to create ties in both vectors.
      x = (x.array() * 2).round();
      if (trial % 2) y = (y.array() * 2).round();
      CHECK(kendall_x100(x, y) == kendall_oracle(x, y));
      const Vector tx = x.unaryExpr([](double v) { return std::exp(v) * 3 + 1; });
      CHECK(kendall_x100(tx, y) == kendall_x100(x, y));
      CHECK(kendall_x100(x, Vector(y.array().cube())) == kendall_x100(x, y));
    }
    for (int trial = 0; trial < 10; ++trial) {
      const Vector x = random_vector(rng, 40), y = random_vector(rng, 40);
      CHECK(kendall_x100(x, Vector(-y)) == doctest::Approx(-kendall_x100(x, y)));
    }
  }

  TEST_CASE("kendall on a subset") {
    const Vector a{{1, 2, 3, 0}}, b{{1, 2, 3, 9}};
    const std::vector<Eigen::Index> idx{0, 1, 2};
    CHECK(kendall_x100(a, b, idx) == 100.0);
    CHECK(kendall_x100(a, b) == 0.0);
  }

  TEST_CASE("classification accuracy") {
    const std::vector<int> labels{0, 1, 2, 1};
    std::vector<Vector> onehot(3, Vector::Zero(4));
    for (int i = 0; i < 4; ++i) onehot[labels[i]][i] = 1.0;
    CHECK(classification_accuracy(onehot, labels) == 100.0);
    const std::vector<Vector> uniform(3, Vector::Constant(4, 0.5));
    CHECK(classification_accuracy(uniform, std::vector<int>(4, 0)) == 100.0);
    CHECK(classification_accuracy(uniform, std::vector<int>(4, 1)) == 0.0);
    CHECK_THROWS_AS(classification_accuracy(uniform, std::vector<int>{0, 1, 3, 0}), LabelOutOfRange);

    Rng rng(5);
    std::vector<Vector> cols(4);
    for (auto& c : cols) c = random_vector(rng, 200);
    std::vector<int> lab(200);
    for (auto& l : lab) l = static_cast<int>(rng.below(4));
    double hits = 0;
    for (int i = 0; i < 200; ++i) {
      int best = 0;
      for (int k = 1; k < 4; ++k)
        if (cols[k][i] > cols[best][i]) best = k;
      hits += best == lab[i];
    }
    CHECK(classification_accuracy(cols, lab) == doctest::Approx(hits / 2.0));
  }
}

TEST_SUITE("io") {
  TEST_CASE("hand-written fixture parses to known vectors") {
    const Dataset d = load_dataset(PREDCOMB_FIXTURES "/three_rows.csv");
    CHECK(d.ids == std::vector<std::string>{"a", "b", "c"});
    CHECK(d.split == std::vector<Split>{Split::train, Split::val, Split::test});
    REQUIRE(d.ground_truth);
    CHECK((*d.ground_truth)[0] == 1.0);
    CHECK(std::isnan((*d.ground_truth)[1]));
    CHECK((*d.ground_truth)[2] == -2.0);
    CHECK(d.target[1] == 1.25);
    REQUIRE(d.references.size() == 2);
    CHECK(d.references[0][2] == 0.4);
    CHECK(d.references[1][2] == 1.5);
  }

  TEST_CASE("missing column names the column") {
    try {
      load_dataset(PREDCOMB_FIXTURES "/missing_gt.csv");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("'gt'") != std::string::npos);
      CHECK(e.row() == 1);
    }
    CHECK_THROWS_AS(load_dataset("/nonexistent/file.csv"), IoError);
  }

  TEST_CASE("bad cells report their location") {
    const fs::path dir = temp_dir();
    std::ofstream(dir / "bad.csv") << "id,split,gt,target,ref_1\n0,val,1,2,3\n1,test,1,x,3\n";
    try {
      load_dataset(dir / "bad.csv");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
      CHECK(e.column() == 4);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("save/load round trip is exact") {
    const fs::path dir = temp_dir();
    const Dataset d = gen_attribute_benchmark(60, 4, 2, 2, 0.3, 7);
    save_dataset(dir / "d.csv", d);
    const Dataset e = load_dataset(dir / "d.csv");
    CHECK(e.ids == d.ids);
    CHECK(e.split == d.split);
    CHECK((e.target.array() == d.target.array()).all());
    CHECK((e.ground_truth->array() == d.ground_truth->array()).all());
    for (std::size_t j = 0; j < d.references.size(); ++j)
      CHECK((e.references[j].array() == d.references[j].array()).all());
    save_dataset(dir / "e.csv", e);
    CHECK(slurp(dir / "d.csv") == slurp(dir / "e.csv"));
    fs::remove_all(dir);
  }

  TEST_CASE("results files") {
    const fs::path dir = temp_dir();
    ResultsSummary s;
    s.config = {{"sigma_sq", 0.1}};
    s.per_iteration = {{0, "kendall_x100", 50.0}, {1, "kendall_x100", 75.5}};
    s.final_metrics = {{"kendall_x100", 75.5}};
    s.seed = 3;
    save_results(dir / "r.csv", dir / "r.json", s);
    CHECK(slurp(dir / "r.csv") == "iteration,metric,value\n0,kendall_x100,50\n1,kendall_x100,75.5\n");
    const auto j = nlohmann::json::parse(slurp(dir / "r.json"));
    CHECK(j.contains("config"));
    CHECK(j.contains("per_iteration"));
    CHECK(j["final_metrics"]["kendall_x100"] == 75.5);
    CHECK(j["seed"] == 3);
    CHECK_THROWS_AS(save_results(dir / "missing" / "r.csv", dir / "r.json", s), IoError);
    fs::remove_all(dir);
  }

  TEST_CASE("format_double round trips") {
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
      const double x = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(20)) - 10.0);
      CHECK(std::stod(format_double(x)) == x);
    }
  }
}
