#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gaslab/config.hpp"
#include "gaslab/estimator.hpp"
#include "gaslab/experiment.hpp"
#include "gaslab/model.hpp"
#include "gaslab/sampler.hpp"
#include "gaslab/transport.hpp"

namespace py = pybind11;
using namespace gaslab;

namespace {

Configuration make_config(const std::vector<Point>& positions) { return Configuration(positions); }

FrozenExterior make_exterior(const std::vector<std::pair<Point, double>>& atoms) {
    FrozenExterior mu;
    for (const auto& [x, w] : atoms) mu.add(x, w);
    return mu;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "coulomb/riesz gas energies, transport operators, and experiment driver";

    py::class_<KernelSpec>(m, "KernelSpec")
        .def_static("coulomb", &KernelSpec::coulomb, py::arg("d"))
        .def_static("riesz", &KernelSpec::riesz, py::arg("s"))
        .def("__repr__", [](const KernelSpec& k) { return "KernelSpec(" + k.to_text() + ")"; });

    py::class_<PotentialSpec>(m, "PotentialSpec")
        .def_static("zero", &PotentialSpec::zero)
        .def_static("quadratic", &PotentialSpec::quadratic, py::arg("a"))
        .def("value", &PotentialSpec::value, py::arg("x"))
        .def("__repr__", [](const PotentialSpec& w) { return "PotentialSpec(" + w.to_text() + ")"; });

    py::class_<GasParams>(m, "GasParams")
        .def_static("make", &GasParams::make, py::arg("d"), py::arg("n_particles"), py::arg("beta"))
        .def_readwrite("d", &GasParams::d)
        .def_readwrite("n_particles", &GasParams::n_particles)
        .def_readwrite("beta", &GasParams::beta)
        .def_readwrite("kernel", &GasParams::kernel)
        .def_readwrite("potential", &GasParams::potential)
        .def_readwrite("delta", &GasParams::delta)
        .def("validate", &GasParams::validate);

    py::class_<Configuration>(m, "Configuration")
        .def(py::init(&make_config), py::arg("positions"))
        .def("positions", &Configuration::positions)
        .def("__len__", &Configuration::size);

    py::class_<FrozenExterior>(m, "FrozenExterior")
        .def(py::init(&make_exterior), py::arg("atoms") = std::vector<std::pair<Point, double>>{})
        .def("total_mass", &FrozenExterior::total_mass);

    py::class_<Region>(m, "Region")
        .def_static("ball", &Region::ball, py::arg("center"), py::arg("radius"))
        .def_static("annulus", &Region::annulus, py::arg("center"), py::arg("r_in"),
                    py::arg("r_out"))
        .def_static("complement", &Region::complement, py::arg("inner"))
        .def_static("unite", &Region::unite, py::arg("a"), py::arg("b"))
        .def_static("all", &Region::all)
        .def_static("parse", &Region::parse, py::arg("text"))
        .def("contains", &Region::contains, py::arg("x"))
        .def("volume", &Region::volume, py::arg("dim"))
        .def("__repr__", [](const Region& r) { return r.to_text(); });

    m.def("kernel_eval", &kernel_eval, py::arg("kernel"), py::arg("x"));
    m.def("hamiltonian", &hamiltonian, py::arg("params"), py::arg("config"));
    m.def("conditional_hamiltonian", &conditional_hamiltonian, py::arg("params"),
          py::arg("config"), py::arg("exterior"));
    m.def("energy_delta_move", &energy_delta_move, py::arg("params"), py::arg("config"),
          py::arg("exterior"), py::arg("i"), py::arg("new_pos"));

    py::class_<BallAverageOracle>(m, "BallAverageOracle")
        .def_static("closed_form", &BallAverageOracle::closed_form, py::arg("radius"))
        .def_static("quadrature", &BallAverageOracle::quadrature, py::arg("radius"),
                    py::arg("node_count") = 128);

    py::enum_<MimDirection>(m, "MimDirection")
        .value("i_to_j", MimDirection::i_to_j)
        .value("j_to_i", MimDirection::j_to_i);

    py::class_<MimResult>(m, "MimResult")
        .def_readonly("mim_ij", &MimResult::mim_ij)
        .def_readonly("mim_ji", &MimResult::mim_ji)
        .def_readonly("favorable", &MimResult::favorable)
        .def_readonly("slack", &MimResult::slack);

    m.def("ball_average_kernel", &ball_average_kernel, py::arg("oracle"), py::arg("kernel"),
          py::arg("d"), py::arg("dist"));
    m.def("ball_average_potential", &ball_average_potential, py::arg("potential"), py::arg("d"),
          py::arg("r"), py::arg("y"));
    m.def("w_gap", &w_gap, py::arg("potential"), py::arg("d"), py::arg("r"));
    m.def("c_bound", &c_bound, py::arg("params"), py::arg("oracle"));
    m.def("mim_energy", &mim_energy, py::arg("params"), py::arg("config"), py::arg("exterior"),
          py::arg("i"), py::arg("j"), py::arg("oracle"));
    m.def("favorability", &favorability, py::arg("params"), py::arg("config"),
          py::arg("exterior"), py::arg("i"), py::arg("j"), py::arg("oracle"));
    m.def("iso_energy_bound_check", &iso_energy_bound_check, py::arg("params"),
          py::arg("config"), py::arg("exterior"), py::arg("r"), py::arg("oracle"));

    m.def(
        "validate_config",
        [](const std::string& text) { return parse_config(text).to_text(); },
        py::arg("text"), "parse config text and return its canonical echo");

    m.def(
        "run_config",
        [](const std::string& text, const std::string& out_dir) {
            ExperimentConfig cfg = parse_config(text);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            ExperimentResult res = run_experiment(cfg);
            write_artifacts(res);
            std::string summary = render_summary(res.cfg, res.meta, res.checks, res.chains_ok);
            return py::make_tuple(res.exit_status(), summary);
        },
        py::arg("text"), py::arg("out_dir") = std::string(),
        "run an experiment config; returns (exit_status, summary)");

    m.def(
        "report_dir",
        [](const std::string& dir) {
            int status = 0;
            std::string summary = report_from_dir(dir, &status);
            return py::make_tuple(status, summary);
        },
        py::arg("dir"), "re-render the summary of a finished run; returns (exit_status, summary)");
}
