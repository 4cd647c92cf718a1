#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dlroc/classifier.hpp"
#include "dlroc/dataset.hpp"
#include "dlroc/error.hpp"
#include "dlroc/eval.hpp"
#include "dlroc/learning.hpp"
#include "dlroc/norms.hpp"
#include "dlroc/sparse_coding.hpp"

namespace py = pybind11;
using namespace dlroc;

namespace {

CoderStop make_stop(double residual_tol, int max_sweeps, int refine_max_iter) {
  CoderStop s;
  s.residual_threshold = residual_tol;
  s.max_sweeps = max_sweeps;
  s.refine_max_iter = refine_max_iter;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust dictionary-learning sparse representation classifier";

  static py::exception<Error> error(m, "DlrocError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object instance = exc(e.what());
      instance.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  m.def("lpq_norm", &lpq_norm, py::arg("m"), py::arg("p"), py::arg("q"));
  m.def("hybrid_norm", &hybrid_norm, py::arg("m"), py::arg("alpha"));
  m.def("gram", &gram, py::arg("m"));
  m.def("mutual_coherence", &mutual_coherence, py::arg("m"));
  m.def("avg_mutual_coherence", &avg_mutual_coherence, py::arg("m"));
  m.def("cross_block_coherence", &cross_block_coherence, py::arg("dk"), py::arg("dj"));

  m.def("solve_scalar_subproblem", &solve_scalar_subproblem, py::arg("residual"), py::arg("atom"), py::arg("alpha"),
        py::arg("gamma"));
  m.def("hybrid_objective", &hybrid_objective, py::arg("y"), py::arg("dict"), py::arg("x"), py::arg("alpha"),
        py::arg("gamma"));
  m.def(
      "sparse_code_hybrid",
      [](const RealVector& y, const RealMatrix& d, double alpha, double gamma, double residual_tol, int max_sweeps,
         int refine_max_iter) {
        return sparse_code_hybrid(y, d, alpha, gamma, make_stop(residual_tol, max_sweeps, refine_max_iter));
      },
      py::arg("y"), py::arg("dict"), py::arg("alpha"), py::arg("gamma"), py::arg("residual_tol") = 0.01,
      py::arg("max_sweeps") = 200, py::arg("refine_max_iter") = 5000);
  m.def(
      "sparse_code_omp",
      [](const RealVector& y, const RealMatrix& d, double residual_tol, int max_atoms) {
        const OmpCode c = sparse_code_omp(y, d, residual_tol, max_atoms);
        return py::make_tuple(c.x, c.support, c.residual_norm);
      },
      py::arg("y"), py::arg("dict"), py::arg("residual_tol") = 0.01, py::arg("max_atoms") = 1 << 30);

  m.def("normalize_columns", &normalize_columns, py::arg("m"));
  m.def(
      "energy_ratios",
      [](const RealVector& x, const std::vector<Eigen::Index>& sizes) { return energy_ratios(x, sizes); },
      py::arg("x"), py::arg("block_sizes"));

  m.def(
      "learn",
      [](const std::vector<RealMatrix>& blocks, const std::vector<Eigen::Index>& sizes, double alpha, double gamma,
         double eta, int t_max, std::uint64_t seed) {
        LearnParams p;
        p.alpha = alpha;
        p.gamma = gamma;
        p.eta = eta;
        p.t_max = t_max;
        p.seed = seed;
        LabeledTrainingSet train{blocks};
        const LearnResult r = learn(train, sizes, p);
        std::vector<RealMatrix> out;
        for (std::size_t k = 0; k < r.dictionary.num_blocks(); ++k) out.emplace_back(r.dictionary.block(k));
        return py::make_tuple(out, r.trace.objective, r.trace.avg_cross_coherence);
      },
      py::arg("blocks"), py::arg("sizes"), py::arg("alpha") = 0.7, py::arg("gamma") = 0.5, py::arg("eta") = 1.0,
      py::arg("t_max") = 10, py::arg("seed") = 0);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const RealMatrix& samples, std::vector<int> labels, std::vector<int> groups,
                       std::vector<std::string> names) {
             Dataset d{samples, std::move(labels), std::move(groups), std::move(names)};
             d.validate();
             return d;
           }),
           py::arg("samples"), py::arg("labels"), py::arg("groups"), py::arg("label_names"))
      .def_readonly("samples", &Dataset::samples)
      .def_readonly("labels", &Dataset::labels)
      .def_readonly("groups", &Dataset::groups)
      .def_readonly("label_names", &Dataset::label_names)
      .def("__len__", &Dataset::size)
      .def("__eq__", &Dataset::operator==);

  m.def(
      "generate_synthetic",
      [](int dim, int labels, int atoms_per_label, int samples_per_label, int sparsity, double gaussian_sigma,
         double outlier_fraction, double outlier_magnitude, int groups, std::uint64_t seed) {
        SynthSpec s{dim, labels, atoms_per_label, samples_per_label, sparsity, gaussian_sigma,
                    outlier_fraction, outlier_magnitude, groups, seed};
        return generate_synthetic(s);
      },
      py::arg("m") = 32, py::arg("labels") = 4, py::arg("atoms_per_label") = 8, py::arg("samples_per_label") = 600,
      py::arg("sparsity") = 3, py::arg("gaussian_sigma") = 0.01, py::arg("outlier_fraction") = 0.1,
      py::arg("outlier_magnitude") = 5.0, py::arg("groups") = 10, py::arg("seed") = 0);
  m.def("load_csv", &load_csv, py::arg("path"));
  m.def("save_csv", &save_csv, py::arg("data"), py::arg("path"));

  py::class_<ClassificationResult>(m, "ClassificationResult")
      .def_readonly("label", &ClassificationResult::label)
      .def_readonly("code", &ClassificationResult::code)
      .def_readonly("energy_ratios", &ClassificationResult::energy_ratios)
      .def_readonly("residual_norm", &ClassificationResult::residual_norm);

  py::class_<ClassifierModel>(m, "Model")
      .def_property_readonly("num_labels", &ClassifierModel::num_labels)
      .def_property_readonly("label_names", &ClassifierModel::label_names)
      .def_property_readonly("atoms", [](const ClassifierModel& mdl) { return mdl.dictionary().atoms(); })
      .def_property_readonly("block_sizes", [](const ClassifierModel& mdl) { return mdl.dictionary().block_sizes(); })
      .def("classify", [](const ClassifierModel& mdl, const RealVector& y) { return classify(y, mdl); }, py::arg("y"))
      .def(
          "predict",
          [](const ClassifierModel& mdl, const RealMatrix& ys) {
            std::vector<int> out;
            for (const auto& r : classify_batch(ys, mdl)) out.push_back(r.label.value_or(0));
            return out;
          },
          py::arg("samples"))
      .def("save", [](const ClassifierModel& mdl, const std::string& path) { save_model(mdl, path); })
      .def(py::pickle([](const ClassifierModel& mdl) { return py::bytes(serialize_model(mdl)); },
                      [](const py::bytes& b) { return deserialize_model(std::string(b)); }));

  m.def("load_model", &load_model, py::arg("path"));
  m.def(
      "fit",
      [](const Dataset& train, const std::string& coder, int lk, double alpha, double gamma, double eta, int t_max,
         double residual_tol, std::uint64_t seed) {
        LearnParams p;
        p.alpha = alpha;
        p.gamma = gamma;
        p.eta = eta;
        p.t_max = t_max;
        p.seed = seed;
        const MethodConfig method =
            parse_coder_kind(coder) == CoderKind::Omp ? src_omp_method(residual_tol) : dl_roc_method(p, lk, residual_tol);
        const std::vector<Eigen::Index> sizes(static_cast<std::size_t>(train.num_labels()), lk);
        return fit(train.by_label(), sizes, method.fit, train.label_names);
      },
      py::arg("train"), py::arg("coder") = "hybrid", py::arg("lk") = 8, py::arg("alpha") = 0.7, py::arg("gamma") = 0.5,
      py::arg("eta") = 1.0, py::arg("t_max") = 10, py::arg("residual_tol") = 0.01, py::arg("seed") = 0);
}
