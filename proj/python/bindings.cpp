#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "predcomb/bench.hpp"
#include "predcomb/denoise.hpp"
#include "predcomb/errors.hpp"
#include "predcomb/experiment.hpp"
#include "predcomb/predictability.hpp"
#include "predcomb/relevance.hpp"

namespace py = pybind11;
using namespace predcomb;

namespace {

ReferenceMatrix normalized_refs(const Matrix& refs) {
  Matrix g(refs.rows(), refs.cols());
  for (Eigen::Index j = 0; j < refs.cols(); ++j)
    g.col(j) = NormalizedPredictor::project(refs.col(j)).values();
  return ReferenceMatrix(g);
}

KernelSpec kernel_for(const std::optional<Vector>& weights, double sigma_k_sq) {
  return weights ? KernelSpec::anisotropic(*weights) : KernelSpec::isotropic(sigma_k_sq);
}

py::dict dataset_dict(const Dataset& d) {
  py::dict out;
  out["ids"] = d.ids;
  std::vector<std::string> split;
  for (Split s : d.split) split.emplace_back(to_string(s));
  out["split"] = split;
  out["ground_truth"] = d.ground_truth ? py::cast(*d.ground_truth) : py::none();
  out["target"] = d.target;
  Matrix refs(d.size(), static_cast<Eigen::Index>(d.references.size()));
  for (std::size_t j = 0; j < d.references.size(); ++j) refs.col(static_cast<Eigen::Index>(j)) = d.references[j];
  out["references"] = refs;
  return out;
}

}  // namespace

PYBIND11_MODULE(_predcomb, m) {
  m.doc() = "Joint denoising of predictors on the manifold of normalized predictors";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("center_normalize", [](const Vector& v) {
        auto [p, s] = center_normalize(EvaluationVector(v));
        return py::make_tuple(p.values(), s.mean, s.std);
      }, py::arg("values"), "Returns (normalized, mean, std).");
  m.def("inverse_normalize", [](const Vector& p, double mean, double std) {
        return inverse_normalize(NormalizedPredictor(p), ScaleShift{mean, std}).values();
      }, py::arg("normalized"), py::arg("mean"), py::arg("std"));

  m.def("linear_predictability", [](const Vector& f, const Matrix& refs) {
        return linear_predictability(NormalizedPredictor::project(f), normalized_refs(refs));
      }, py::arg("target"), py::arg("references"));
  m.def("nonlinear_predictability",
        [](const Vector& f, const Matrix& refs, double sigma_sq, double sigma_k_sq,
           std::optional<Vector> weights) {
          return nonlinear_predictability(NormalizedPredictor::project(f), normalized_refs(refs),
                                          kernel_for(weights, sigma_k_sq), sigma_sq);
        },
        py::arg("target"), py::arg("references"), py::arg("sigma_sq") = 0.1,
        py::arg("sigma_k_sq") = 1.0, py::arg("weights") = py::none());

  m.def("relevance_weights", [](const Vector& f, const Matrix& refs, double sigma_sq) {
        ArdConfig cfg;
        cfg.lambda_noise = sigma_sq;
        const Vector s = optimize_relevance(normalized_refs(refs), NormalizedPredictor::project(f), cfg);
        return py::make_tuple(s, normalized_weights(s));
      }, py::arg("target"), py::arg("references"), py::arg("sigma_sq") = 0.1,
      "Returns (sigma_l, weights normalized to sum to one).");

  m.def("denoise",
        [](const Vector& target, const Matrix& refs, const std::string& algo, double sigma_sq,
           double sigma_k_sq, double lambda_j, int iters, Eigen::Index basis, bool joint, bool use_ard,
           double opc_sigma_sq, double opc_lambda) {
          std::vector<EvaluationVector> members{EvaluationVector(target)};
          for (Eigen::Index j = 0; j < refs.cols(); ++j) members.emplace_back(Vector(refs.col(j)));
          DenoiseConfig cfg;
          cfg.algorithm = parse_algorithm(algo);
          cfg.sigma_sq = sigma_sq;
          cfg.sigma_k_sq = sigma_k_sq;
          cfg.lambda_j = lambda_j;
          cfg.n_iters = iters;
          cfg.n_basis = basis;
          cfg.joint = joint;
          cfg.use_ard = use_ard;
          cfg.opc_sigma_sq = opc_sigma_sq;
          cfg.opc_lambda = opc_lambda;
          std::pair<PredictorEnsemble, DenoiseTrace> run;
          {
            py::gil_scoped_release release;
            run = joint_denoise(PredictorEnsemble::from_raw(members, {0}), cfg);
          }
          return py::make_tuple(run.first.restored(0).values(), run.second.warnings);
        },
        py::arg("target"), py::arg("references"), py::arg("algo") = "npc", py::arg("sigma_sq") = 0.1,
        py::arg("sigma_k_sq") = 1.0, py::arg("lambda_j") = 1.0, py::arg("iters") = 20,
        py::arg("basis") = 300, py::arg("joint") = false, py::arg("use_ard") = false,
        py::arg("opc_sigma_sq") = 1.0, py::arg("opc_lambda") = 1.0,
        "Denoises the target (in its original scale); returns (values, warnings).");

  m.def("kendall_x100", [](const Vector& a, const Vector& b) { return kendall_x100(a, b); });
  m.def("classification_accuracy", [](const std::vector<Vector>& cols, const std::vector<int>& labels) {
    return classification_accuracy(cols, labels);
  }, py::arg("columns"), py::arg("labels"));

  m.def("gen_toy", [](Eigen::Index n, double noise, const std::string& mode, std::uint64_t seed) {
        if (mode != "difference" && mode != "xor") throw InvalidArgument("mode must be difference or xor");
        return dataset_dict(gen_toy(ToySpec{n, noise, mode == "xor" ? ToyMode::xor_ : ToyMode::difference, seed}));
      }, py::arg("n") = 100, py::arg("noise") = 1.0, py::arg("mode") = "difference", py::arg("seed") = 0);
  m.def("gen_attribute_benchmark", [](Eigen::Index n, int classes, int informative, int random,
                                      double noise, std::uint64_t seed) {
        return dataset_dict(gen_attribute_benchmark(n, classes, informative, random, noise, seed));
      }, py::arg("n") = 200, py::arg("classes") = 8, py::arg("informative") = 5, py::arg("random") = 8,
      py::arg("noise") = 0.15, py::arg("seed") = 0);

  m.def("bench", [](const std::string& scenario, int seeds, std::uint64_t seed_base,
                    std::optional<std::string> ablate) {
        ScenarioOptions opt;
        opt.scenario = parse_scenario(scenario);
        opt.ablate = ablate;
        std::vector<SeedResult> results;
        {
          py::gil_scoped_release release;
          results = run_scenario(opt, seed_base, seeds);
        }
        py::list out;
        for (const auto& r : results) {
          py::dict row;
          row["seed"] = r.seed;
          row["baseline"] = r.baseline_test;
          for (const auto& v : r.variants) row[py::str(v.name)] = v.test_accuracy;
          out.append(row);
        }
        return out;
      }, py::arg("scenario"), py::arg("seeds") = 10, py::arg("seed_base") = 0, py::arg("ablate") = py::none(),
      "Per-seed test accuracies of baseline and each tuned variant.");
}
