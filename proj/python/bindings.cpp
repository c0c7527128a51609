#include "speclab/alignment.hpp"
#include "speclab/experiments.hpp"
#include "speclab/invariant_subspace.hpp"
#include "speclab/kpca.hpp"
#include "speclab/laplacian.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace speclab;

namespace {

DomainBox make_box(const std::vector<double>& lo, const std::vector<double>& hi) {
  if (lo.size() != hi.size()) throw ConfigError("domain bounds differ in dimension");
  DomainBox b{Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size())),
              Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()))};
  b.validate();
  return b;
}

std::shared_ptr<const SampleSet> as_samples(const PointMatrix& points) {
  return std::make_shared<const SampleSet>(SampleSet{points, 0});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral embeddings, Nystrom extension and perturbation certificates";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<KernelSpec>(m, "Kernel")
      .def_property_readonly("kappa_l", &KernelSpec::kappa_l)
      .def_property_readonly("kappa_u", &KernelSpec::kappa_u)
      .def("matrix", [](const KernelSpec& k, const PointMatrix& a, const PointMatrix& b) { return k.cross(a, b); },
           py::arg("a"), py::arg("b"));

  m.def(
      "gaussian_kernel",
      [](double bandwidth, double offset, std::vector<double> lo, std::vector<double> hi) {
        KernelParams p;
        p.bandwidth = bandwidth;
        p.offset = offset;
        p.domain = make_box(lo, hi);
        return make_kernel(p);
      },
      py::arg("bandwidth") = 0.3, py::arg("offset") = 0.1, py::arg("lo") = std::vector<double>{0.0},
      py::arg("hi") = std::vector<double>{1.0});
  m.def(
      "constant_kernel",
      [](double value, std::vector<double> lo, std::vector<double> hi) {
        KernelParams p;
        p.family = KernelFamily::Constant;
        p.value = value;
        p.domain = make_box(lo, hi);
        return make_kernel(p);
      },
      py::arg("value") = 1.0, py::arg("lo") = std::vector<double>{0.0}, py::arg("hi") = std::vector<double>{1.0});
  m.def(
      "linear_kernel",
      [](std::vector<double> lo, std::vector<double> hi) {
        KernelParams p;
        p.family = KernelFamily::Linear;
        p.domain = make_box(lo, hi);
        p.require_positive_lower_bound = false;
        return make_kernel(p);
      },
      py::arg("lo"), py::arg("hi"));

  m.def(
      "sample_uniform",
      [](Eigen::Index n, std::uint64_t seed, std::vector<double> lo, std::vector<double> hi) {
        return DensitySpec::uniform(make_box(lo, hi)).sample(n, seed).points;
      },
      py::arg("n"), py::arg("seed"), py::arg("lo") = std::vector<double>{0.0},
      py::arg("hi") = std::vector<double>{1.0});

  py::class_<LaplacianFit>(m, "LaplacianEmbedding")
      .def_property_readonly("laplacian", [](const LaplacianFit& f) { return f.laplacian.L; })
      .def_property_readonly("degrees", [](const LaplacianFit& f) { return f.laplacian.degrees; })
      .def_property_readonly("eigvals", [](const LaplacianFit& f) { return f.eigensystem.eigvals; })
      .def_property_readonly("eigvecs", [](const LaplacianFit& f) { return f.eigensystem.eigvecs; })
      .def_property_readonly("eigengap", [](const LaplacianFit& f) { return f.eigensystem.eigengap; })
      .def("evaluate", [](const LaplacianFit& f, const PointMatrix& x) { return f.embedding.evaluate(x); },
           py::arg("points"));
  m.def(
      "laplacian_embedding",
      [](const PointMatrix& points, const KernelSpec& kernel, Eigen::Index K) {
        return fit_laplacian_embedding(as_samples(points), kernel, K);
      },
      py::arg("points"), py::arg("kernel"), py::arg("K"));

  py::class_<KpcaSystem>(m, "Kpca")
      .def_property_readonly("eigvals", &KpcaSystem::eigvals)
      .def_property_readonly("eigvecs", &KpcaSystem::eigvecs)
      .def_property_readonly("eigengap", &KpcaSystem::eigengap)
      .def("evaluate", &KpcaSystem::evaluate, py::arg("points"));
  m.def(
      "kpca",
      [](const PointMatrix& points, const KernelSpec& kernel, Eigen::Index K) {
        return kpca_fit(as_samples(points), kernel, K);
      },
      py::arg("points"), py::arg("kernel"), py::arg("K"));
  m.def(
      "second_moment_spectrum", [](const PointMatrix& points) { return second_moment_spectrum(SampleSet{points, 0}); },
      py::arg("points"));

  py::class_<PopulationOracle>(m, "PopulationOracle")
      .def_property_readonly("eigvals", &PopulationOracle::eigvals)
      .def_property_readonly("eigengap", &PopulationOracle::eigengap)
      .def_property_readonly("nodes", [](const PopulationOracle& o) { return o.grid().nodes; })
      .def_property_readonly("weights", [](const PopulationOracle& o) { return o.grid().weights; })
      .def_property_readonly("node_values", &PopulationOracle::node_values)
      .def("evaluate", &PopulationOracle::evaluate, py::arg("points"));
  m.def(
      "population_oracle",
      [](const KernelSpec& kernel, Eigen::Index m_nodes, Eigen::Index K, const std::string& kind) {
        OracleOptions opt;
        if (kind == "covariance") {
          opt.kind = OperatorKind::Covariance;
        } else if (kind != "normalized_laplacian") {
          throw ConfigError("unknown operator kind '" + kind + "'");
        }
        return build_oracle(kernel, DensitySpec::uniform(kernel.domain()), m_nodes, K, opt);
      },
      py::arg("kernel"), py::arg("m") = 2000, py::arg("K") = 2, py::arg("kind") = "normalized_laplacian");

  m.def(
      "procrustes",
      [](const Matrix& gram) {
        const AlignmentResult r = procrustes_align(gram);
        return py::make_tuple(r.Q, r.singular_values, r.frobenius_gap);
      },
      py::arg("gram"), "Returns (Q, singular values, |Q - gram|_2).");
  m.def("uniform_error", &uniform_error, py::arg("pop_values"), py::arg("sample_values"), py::arg("Q"));
  m.def("sep", &nk::sep, py::arg("T11"), py::arg("T22"));
  m.def(
      "newton_solve",
      [](const Matrix& T, const Matrix& E, Eigen::Index K) {
        const nk::BlockOperator b = nk::block_partition(T, E, K);
        const nk::NewtonResult r = nk::newton_solve(b);
        py::dict out;
        out["passes"] = r.certificate.passes();
        out["delta"] = r.certificate.delta;
        out["y_bound"] = r.certificate.y_bound();
        if (r.Y) {
          out["Y"] = *r.Y;
          out["iterations"] = r.iterations;
          out["residual"] = r.residual;
          out["invariance_residual"] = nk::verify_invariance(b, *r.Y);
        } else {
          out["Y"] = py::none();
        }
        return out;
      },
      py::arg("T"), py::arg("E"), py::arg("K"));

  m.def(
      "rate_study",
      [](const std::string& config_text) {
        const RateStudyConfig cfg = rate_study_config_from(Config::parse(config_text));
        cfg.validate();
        RateStudyResult r;
        {
          py::gil_scoped_release release;
          r = run_rate_study(cfg);
        }
        py::list rows;
        for (const auto& row : r.rows) {
          rows.append(py::make_tuple(row.n, row.trial, row.seed, row.error, row.status));
        }
        py::dict out;
        out["rows"] = rows;
        out["slope"] = r.fit ? py::cast(r.fit->slope) : py::none();
        out["fit_note"] = r.fit_note;
        out["fitted_C"] = r.fitted_C;
        out["oracle_eigengap"] = r.oracle_eigengap;
        return out;
      },
      py::arg("config_text") = "");

  m.def(
      "nk_demo",
      [](Eigen::Index n, Eigen::Index k, double eps, std::uint64_t seed) {
        return run_nk_demo({n, k, eps, seed});
      },
      py::arg("n") = 8, py::arg("k") = 2, py::arg("eps") = 1e-3, py::arg("seed") = 1);
}
