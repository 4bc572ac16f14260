#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lrno/bounds.hpp"
#include "lrno/cli.hpp"
#include "lrno/io.hpp"
#include "lrno/verify.hpp"

namespace py = pybind11;
using namespace lrno;

namespace {

py::dict trace_dict(const Trace& t) {
  std::vector<long> iter;
  std::vector<double> obj, grad, dist;
  for (const auto& r : t.records) {
    iter.push_back(r.iter);
    obj.push_back(r.objective);
    grad.push_back(r.grad_norm);
    dist.push_back(r.dist_ref_fro);
  }
  py::dict d;
  d["iter"] = iter;
  d["objective"] = obj;
  d["grad_norm"] = grad;
  d["dist_ref_fro"] = dist;
  d["terminal"] = t.terminal;
  d["termination"] = std::string(to_string(t.termination));
  d["iterations"] = t.iterations;
  d["perturbations"] = t.perturbations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lrno, m) {
  m.doc() = "Noisy low-rank matrix optimization: instances, solvers, bounds and certificates";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Instance>(m, "Instance")
      .def_readonly("n", &Instance::n)
      .def_readonly("r", &Instance::r)
      .def_readonly("m", &Instance::m)
      .def_property_readonly("m_star", [](const Instance& i) { return i.m_star.mat(); })
      .def_property_readonly("b_tilde", [](const Instance& i) { return i.b_tilde; })
      .def_property_readonly("noise", [](const Instance& i) { return i.noise.values; })
      .def_property_readonly("noise_norm", [](const Instance& i) { return i.noise.q; })
      .def_property_readonly("delta_hat", [](const Instance& i) { return i.meta.delta_hat; })
      .def_property_readonly("delta_certified", [](const Instance& i) { return i.meta.delta_certified; })
      .def_property_readonly("zeta1", [](const Instance& i) { return i.op->zeta1(); })
      .def_property_readonly("rho", [](const Instance& i) { return i.op->rho(); })
      .def("fingerprint", &Instance::fingerprint)
      .def("objective_value", [](const Instance& i, const Factor& x) { return factored_value(*i.objective(), x); })
      .def("gradient", [](const Instance& i, const Factor& x) { return factored_grad(*i.objective(), x); })
      .def("save", [](const Instance& i, const std::string& path) { save_instance(i, path); });

  m.def(
      "generate_instance",
      [](Index n, Index r, std::optional<Index> m_count, double sigma, const std::string& family, std::uint64_t seed,
         double lambda1, double lambda_r, std::optional<double> certified_delta, int rip_samples, int rip_refine) {
        InstanceConfig cfg;
        cfg.n = n;
        cfg.r = r;
        cfg.m = m_count;
        cfg.sigma = sigma;
        cfg.family = parse_noise_family(family);
        cfg.seed = seed;
        cfg.lambda1 = lambda1;
        cfg.lambda_r = lambda_r;
        cfg.certified_delta = certified_delta;
        cfg.rip_samples = rip_samples;
        cfg.rip_refine = rip_refine;
        return generate_instance(cfg);
      },
      py::arg("n"), py::arg("r"), py::arg("m") = py::none(), py::arg("sigma") = 0.0, py::arg("family") = "gaussian",
      py::arg("seed") = 1, py::arg("lambda1") = 1.5, py::arg("lambda_r") = 1.0,
      py::arg("certified_delta") = py::none(), py::arg("rip_samples") = 64, py::arg("rip_refine") = 20);
  m.def("load_instance", [](const std::string& path) { return load_instance(path); });

  m.def(
      "project_psd_rank_r", [](const Matrix& a, Index r) { return project_psd_rank_r(SymMatrix(a), r).mat(); },
      py::arg("m"), py::arg("r"));
  m.def(
      "dist_factor", [](const Factor& x, const Matrix& a) { return dist_factor(x, SymMatrix(a)); }, py::arg("x"),
      py::arg("m"));
  m.def("noise_tail_epsilon", &noise_tail_epsilon, py::arg("p"), py::arg("m"), py::arg("sigma"));

  m.def(
      "gradient_descent",
      [](const Instance& inst, const Factor& x0, double eta, long max_iters, double grad_tol, long record_every,
         bool perturbed, std::uint64_t seed) {
        GdConfig cfg;
        cfg.eta = eta;
        cfg.max_iters = max_iters;
        cfg.grad_tol = grad_tol;
        cfg.record_every = record_every;
        const auto obj = inst.objective();
        Trace t;
        {
          py::gil_scoped_release release;
          t = perturbed ? perturbed_gd(*obj, x0, default_perturb_config(cfg, inst.n, inst.r, seed), inst.m_star)
                        : gradient_descent(*obj, x0, cfg, inst.m_star);
        }
        return trace_dict(t);
      },
      py::arg("instance"), py::arg("x0"), py::arg("eta") = 1e-3, py::arg("max_iters") = 10000,
      py::arg("grad_tol") = 1e-8, py::arg("record_every") = 1, py::arg("perturbed") = false, py::arg("seed") = 0);
  m.def("random_init", &random_init, py::arg("n"), py::arg("r"), py::arg("init_scale"), py::arg("seed"),
        py::arg("index") = 0);
  m.def(
      "classify_point",
      [](const Instance& inst, const Factor& x, double tol, double tol_hess) {
        const CriticalPoint p = classify_point(*inst.objective(), x, tol, tol_hess, inst.m_star);
        py::dict d;
        d["order"] = std::string(to_string(p.order));
        d["grad_norm"] = p.grad_norm;
        d["hess_min_eig"] = p.hess_min_eig;
        d["dist_to_mstar_fro"] = p.dist_to_mstar_fro;
        d["sigma_r_of_m_hat"] = p.sigma_r_of_m_hat;
        return d;
      },
      py::arg("instance"), py::arg("x"), py::arg("tol") = 1e-8, py::arg("tol_hess") = 1e-6);

  m.def(
      "dual_certificate",
      [](const Factor& x, const Matrix& m_star, std::optional<Vector> y, double zeta1, double q) {
        const SymMatrix ms(m_star);
        const Vector yy = y ? *y : least_squares_dual_y(x, ms);
        const DualCertificate c = dual_certificate(x, ms, yy, zeta1, q);
        py::dict d;
        d["value"] = c.value;
        d["cos_theta"] = c.cos_theta;
        d["trace_plus"] = c.trace_plus;
        d["trace_minus"] = c.trace_minus;
        d["y"] = c.y;
        return d;
      },
      py::arg("x"), py::arg("m_star"), py::arg("y") = py::none(), py::arg("zeta1") = 1.0, py::arg("q") = 0.0);

  py::module_ b = m.def_submodule("bounds", "closed-form guarantees and their inversions");
  b.def("global_bound", &bounds::global_bound, py::arg("delta"), py::arg("zeta1"), py::arg("zeta2"),
        py::arg("epsilon"));
  b.def("local_bound", &bounds::local_bound, py::arg("delta"), py::arg("zeta1"), py::arg("zeta2"),
        py::arg("epsilon"), py::arg("tau"), py::arg("lambda1"), py::arg("lambda_r"));
  b.def("convergence_radius", &bounds::convergence_radius, py::arg("delta"), py::arg("zeta2"), py::arg("epsilon"),
        py::arg("sigma_r_mw"), py::arg("d_r"));
  b.def("max_step", &bounds::max_step, py::arg("rho"), py::arg("r"), py::arg("delta"), py::arg("zeta2"),
        py::arg("epsilon"), py::arg("mw_frob"));
  b.def("strict_saddle_noise_cap", &bounds::strict_saddle_noise_cap, py::arg("delta"), py::arg("zeta1"),
        py::arg("zeta2"), py::arg("alpha"), py::arg("sigma_r_mstar"));
  b.def(
      "max_delta_global",
      [](double xi, double eps, double zeta1, double zeta2) { return bounds::max_delta_global(xi, eps, zeta1, zeta2).delta; },
      py::arg("xi"), py::arg("epsilon"), py::arg("zeta1") = 1.0, py::arg("zeta2") = 0.0);
  b.def(
      "max_delta_local",
      [](double xi, double eps, double zeta1, double zeta2, double tau, double lambda1, double lambda_r) {
        return bounds::max_delta_local(xi, eps, zeta1, zeta2, tau, lambda1, lambda_r).delta;
      },
      py::arg("xi"), py::arg("epsilon"), py::arg("zeta1") = 1.0, py::arg("zeta2") = 0.0, py::arg("tau") = 0.5,
      py::arg("lambda1") = 1.5, py::arg("lambda_r") = 1.0);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run one lrno subcommand; returns (exit_code, stdout, stderr).");
}
