#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "atlas/dynamics.hpp"
#include "atlas/errors.hpp"
#include "atlas/measure.hpp"
#include "atlas/model.hpp"
#include "atlas/stefan_analytic.hpp"
#include "atlas/stefan_fd.hpp"

namespace py = pybind11;

namespace {

std::vector<double> simulate_ranked(double lambda, std::size_t n, double dt, double horizon, std::uint64_t seed) {
  auto state = atlas::sample_ppp_half_line(lambda, n, seed);
  atlas::StepConfig cfg;
  cfg.dt = dt;
  atlas::run(state, atlas::DriftSpec::atlas(), cfg, horizon, nullptr, atlas::ParticleStreams(seed));
  return state.ranked_positions();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Infinite Atlas model and its Stefan hydrodynamic limit";

  py::register_exception<atlas::ParameterError>(m, "ParameterError", PyExc_ValueError);

  py::class_<atlas::stefan::StefanSolution>(m, "StefanSolution")
      .def_readonly("lam", &atlas::stefan::StefanSolution::lambda)
      .def_readonly("kappa", &atlas::stefan::StefanSolution::kappa)
      .def_readonly("c1", &atlas::stefan::StefanSolution::c1)
      .def_readonly("c2", &atlas::stefan::StefanSolution::c2);

  m.def("phi_cdf", &atlas::stefan::phi_cdf, py::arg("x"));
  m.def("g", &atlas::stefan::g, py::arg("kappa"));
  m.def("solve_kappa", &atlas::stefan::solve_kappa, py::arg("lam"));
  m.def("u_star", &atlas::stefan::u_star, py::arg("sol"), py::arg("t"), py::arg("x"));
  m.def("y_star", &atlas::stefan::y_star, py::arg("sol"), py::arg("t"));
  m.def("integrated_profile", &atlas::stefan::integrated_profile, py::arg("sol"), py::arg("t"), py::arg("x"));

  m.def(
      "sample_ppp_half_line",
      [](double lambda, std::size_t n, std::uint64_t seed) {
        return atlas::sample_ppp_half_line(lambda, n, seed).ranked_positions();
      },
      py::arg("lam"), py::arg("n"), py::arg("seed"), "Ranked positions of a Poisson start anchored at 0.");
  m.def("simulate", &simulate_ranked, py::arg("lam"), py::arg("n"), py::arg("dt"), py::arg("horizon"),
        py::arg("seed"), "Ranked positions after running the Atlas model from a Poisson start.");

  m.def(
      "fd_solve",
      [](double lambda, double dxi, double length, double t_end) {
        auto s = atlas::stefan_fd::fd_init(lambda, dxi, length);
        atlas::stefan_fd::fd_advance(s, t_end);
        return py::make_tuple(s.y, s.xi, s.u);
      },
      py::arg("lam"), py::arg("dxi") = 0.02, py::arg("length") = 50.0, py::arg("t_end") = 1.0,
      "Front position, grid (relative to the front) and density at t_end.");

  m.def(
      "dstar",
      [](std::vector<double> a, std::vector<double> b, double mass, int r_max) {
        return atlas::dstar_surrogate(atlas::make_measure(std::move(a), mass),
                                      atlas::make_measure(std::move(b), mass), r_max);
      },
      py::arg("a"), py::arg("b"), py::arg("mass_per_atom"), py::arg("r_max") = 10);
}
