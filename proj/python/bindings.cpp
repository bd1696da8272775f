#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hetpol/config.hpp"
#include "hetpol/errors.hpp"
#include "hetpol/partition.hpp"
#include "hetpol/path_sampler.hpp"
#include "hetpol/phase.hpp"
#include "hetpol/run.hpp"
#include "hetpol/verify.hpp"
#include "hetpol/walk_kernel.hpp"

namespace py = pybind11;
using namespace hetpol;

namespace {

ModelParams params_of(double lambda, double h, double p, int d, int n) {
    ModelParams m;
    m.lambda = lambda;
    m.h = h;
    m.p = p;
    m.d = d;
    m.n = n;
    m.validate();
    return m;
}

}  // namespace

PYBIND11_MODULE(_hetpol, m) {
    m.doc() = "Directed polymer in a random droplet medium";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    py::class_<WalkKernel>(m, "WalkKernel")
        .def_readonly("d", &WalkKernel::d)
        .def_readonly("n_max", &WalkKernel::n_max)
        .def_readonly("p", &WalkKernel::p)
        .def_readonly("b", &WalkKernel::b)
        .def_readonly("a", &WalkKernel::a)
        .def_property_readonly("alpha", &WalkKernel::alpha);
    m.def("build_kernel", &build_kernel, py::arg("d"), py::arg("n_max"));

    py::class_<PartitionTables>(m, "PartitionTables")
        .def_readonly("n", &PartitionTables::n)
        .def_readonly("log_z", &PartitionTables::log_z)
        .def_readonly("log_zhat", &PartitionTables::log_zhat)
        .def_readonly("log_psi", &PartitionTables::log_psi)
        .def_readonly("cum_field", &PartitionTables::cum_field);
    m.def(
        "partition_tables",
        [](double lambda, double h, double p, int d, int n, std::uint64_t seed) {
            const auto params = params_of(lambda, h, p, d, n);
            return compute_tables(sample_disorder(params, seed), params, kernel_for_horizon(d, n));
        },
        py::arg("lambda_"), py::arg("h"), py::arg("p"), py::arg("d"), py::arg("n"), py::arg("seed"));
    m.def(
        "brute_force_log_z",
        [](double lambda, double h, double p, int d, int n, std::uint64_t seed) {
            const auto params = params_of(lambda, h, p, d, n);
            return brute_force_partition(sample_disorder(params, seed), params, n).log_z;
        },
        py::arg("lambda_"), py::arg("h"), py::arg("p"), py::arg("d"), py::arg("n"), py::arg("seed"));

    py::class_<FreeEnergyEstimate>(m, "FreeEnergyEstimate")
        .def_readonly("phi_hat", &FreeEnergyEstimate::phi_hat)
        .def_readonly("std_err", &FreeEnergyEstimate::std_err)
        .def_readonly("psi_p_hat", &FreeEnergyEstimate::psi_p_hat)
        .def_readonly("excess_hat", &FreeEnergyEstimate::excess_hat)
        .def_readonly("excess_std_err", &FreeEnergyEstimate::excess_std_err)
        .def_readonly("per_replica", &FreeEnergyEstimate::per_replica);
    m.def(
        "free_energy",
        [](double lambda, double h, double p, int d, int n, int replicas, std::uint64_t seed, int workers) {
            return free_energy_estimate(params_of(lambda, h, p, d, n), replicas, seed, workers);
        },
        py::arg("lambda_"), py::arg("h"), py::arg("p"), py::arg("d"), py::arg("n"), py::arg("replicas"), py::arg("seed"),
        py::arg("workers") = 1);

    m.def("bound_localized", &bound_localized, py::arg("lambda_"), py::arg("p"), py::arg("d"));
    m.def(
        "bound_delocalized", [](double lambda) { return bound_delocalized(lambda); }, py::arg("lambda_"));
    m.def(
        "classify",
        [](double lambda, double h, double p, int d, int n, int replicas, std::uint64_t seed, int workers) {
            return to_string(classify_point(params_of(lambda, h, p, d, n), n, replicas, seed, {}, workers).verdict);
        },
        py::arg("lambda_"), py::arg("h"), py::arg("p"), py::arg("d"), py::arg("n"), py::arg("replicas"), py::arg("seed"),
        py::arg("workers") = 1);

    m.def(
        "endpoint_law_1d",
        [](double lambda, double h, double p, int n, std::uint64_t seed) {
            const auto params = params_of(lambda, h, p, 1, n);
            return exact_endpoint_law_1d(sample_disorder(params, seed), params, n);
        },
        py::arg("lambda_"), py::arg("h"), py::arg("p"), py::arg("n"), py::arg("seed"));
    m.def(
        "sample_endpoints",
        [](double lambda, double h, double p, int d, int n, int samples, std::uint64_t seed) {
            const auto params = params_of(lambda, h, p, d, n);
            const auto disorder = sample_disorder(params, seed);
            const GibbsSampler sampler(disorder, params);
            Rng rng(seed, 0, StreamTag::skeleton);
            std::vector<std::vector<std::int32_t>> out;
            out.reserve(static_cast<std::size_t>(samples));
            for (int i = 0; i < samples; ++i) out.push_back(sampler.sample_endpoint(rng).endpoint);
            return out;
        },
        py::arg("lambda_"), py::arg("h"), py::arg("p"), py::arg("d"), py::arg("n"), py::arg("samples"), py::arg("seed"));

    m.def(
        "verify",
        [](std::uint64_t seed) {
            py::list out;
            for (const auto& r : verify_all(seed)) out.append(py::make_tuple(r.name, r.passed, r.detail));
            return out;
        },
        py::arg("seed") = kDefaultVerifySeed);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) -> py::tuple {
            RunConfig config;
            try {
                config = parse_config(args);
            } catch (const ConfigError& e) {
                return py::make_tuple(2, std::string(e.what()));
            }
            std::ostringstream log;
            const int rc = run(config, log);
            return py::make_tuple(rc, log.str());
        },
        py::arg("args"), "Runs a command as the command-line tool would; returns (exit_code, log).");

    m.attr("__version__") = "0.1.0";
}
