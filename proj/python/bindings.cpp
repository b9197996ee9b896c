#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wsqaoa/experiment.hpp"
#include "wsqaoa/instance_lab.hpp"
#include "wsqaoa/io.hpp"
#include "wsqaoa/metrics.hpp"
#include "wsqaoa/preprocessing.hpp"
#include "wsqaoa/qaoa.hpp"
#include "wsqaoa/relaxation.hpp"
#include "wsqaoa/verify.hpp"

namespace py = pybind11;
using namespace wsqaoa;

namespace {

Bitstring as_bits(const std::vector<int>& v) {
  Bitstring b;
  for (int x : v) {
    if (x != 0 && x != 1) throw InputError("bitstring entries must be 0 or 1");
    b.push_back(static_cast<std::uint8_t>(x));
  }
  return b;
}

std::vector<int> as_list(const Bitstring& b) { return {b.begin(), b.end()}; }

}  // namespace

PYBIND11_MODULE(wsqaoa, m) {
  m.doc() = "Standard, warm-start and preprocessed QAOA for portfolio QUBOs";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<PortfolioInstance>(m, "PortfolioInstance")
      .def(py::init([](Eigen::VectorXd mu, Eigen::MatrixXd sigma, double q, int budget,
                       std::optional<double> penalty, std::vector<std::string> labels) {
             PortfolioInstance inst;
             inst.mu = std::move(mu);
             inst.sigma = std::move(sigma);
             inst.q = q;
             inst.budget = budget;
             inst.labels = std::move(labels);
             inst.penalty = penalty ? *penalty : choose_penalty(inst);
             inst.validate();
             return inst;
           }),
           py::arg("mu"), py::arg("sigma"), py::arg("q") = 0.5, py::arg("budget"),
           py::arg("penalty") = py::none(), py::arg("labels") = std::vector<std::string>{})
      .def_readwrite("mu", &PortfolioInstance::mu)
      .def_readwrite("sigma", &PortfolioInstance::sigma)
      .def_readwrite("q", &PortfolioInstance::q)
      .def_readwrite("budget", &PortfolioInstance::budget)
      .def_readwrite("penalty", &PortfolioInstance::penalty)
      .def_readwrite("labels", &PortfolioInstance::labels)
      .def_property_readonly("n_assets", &PortfolioInstance::n_assets)
      .def("validate", &PortfolioInstance::validate);

  py::class_<QuboProblem>(m, "QuboProblem")
      .def(py::init([](Eigen::MatrixXd quad, Eigen::VectorXd lin, double offset) {
             QuboProblem q{std::move(quad), std::move(lin), offset};
             q.validate();
             return q;
           }),
           py::arg("quad"), py::arg("lin"), py::arg("offset") = 0.0)
      .def_readwrite("quad", &QuboProblem::quad)
      .def_readwrite("lin", &QuboProblem::lin)
      .def_readwrite("offset", &QuboProblem::offset)
      .def_property_readonly("size", &QuboProblem::size)
      .def("evaluate", [](const QuboProblem& q, const std::vector<int>& bits) { return q.evaluate(as_bits(bits)); })
      .def("evaluate_index", [](const QuboProblem& q, BasisIndex z) { return q.evaluate(z); })
      .def("evaluate_relaxed", [](const QuboProblem& q, const Eigen::VectorXd& x) { return q.evaluate(x); });

  m.def("portfolio_cost", [](const PortfolioInstance& i, const std::vector<int>& b) {
    return portfolio_cost(i, as_bits(b));
  });
  m.def("penalized_cost", [](const PortfolioInstance& i, const std::vector<int>& b) {
    return penalized_cost(i, as_bits(b));
  });
  m.def("to_qubo", &to_qubo);
  m.def("choose_penalty", &choose_penalty);
  m.def("cost_table", &cost_table);

  m.def("appendix_instance", &appendix_instance);
  m.def("load_instance", [](const std::string& path) { return load_instance(path); });
  m.def("save_instance", [](const std::string& path, const PortfolioInstance& i) { save_instance(path, i); });
  m.def(
      "generate_instance",
      [](std::uint64_t seed, int n_assets, std::optional<int> budget, double q, int t_samples) {
        GeneratorOptions o;
        o.n_assets = n_assets;
        o.budget = budget ? *budget : n_assets / 2;
        o.q = q;
        o.t_samples = t_samples;
        return generate_instance(seed, o);
      },
      py::arg("seed"), py::arg("n_assets") = 10, py::arg("budget") = py::none(), py::arg("q") = 0.5,
      py::arg("t_samples") = 5000);

  py::class_<RelaxedSolution>(m, "RelaxedSolution")
      .def_readonly("x_star", &RelaxedSolution::x_star)
      .def_readonly("objective", &RelaxedSolution::objective)
      .def_readonly("iterations", &RelaxedSolution::iterations)
      .def_readonly("converged", &RelaxedSolution::converged)
      .def_readonly("grad_norm_final", &RelaxedSolution::grad_norm_final)
      .def_readonly("non_unique", &RelaxedSolution::non_unique);
  m.def("convexify", &convexify);
  m.def(
      "solve_box_qp",
      [](const QuboProblem& q, double tol, int max_iter) { return solve_box_qp(q, {tol, max_iter}); },
      py::arg("problem"), py::arg("tol") = 1e-9, py::arg("max_iter") = 100000);
  m.def("relax_instance", [](const PortfolioInstance& i) { return relax_instance(i); });
  m.def("warmstart_angles", [](const std::vector<double>& x) { return warmstart_angles(x); });

  py::class_<Statevector>(m, "Statevector")
      .def_property_readonly("n_qubits", &Statevector::n_qubits)
      .def_property_readonly("amplitudes",
                             [](const Statevector& s) {
                               auto a = s.amplitudes();
                               return py::array_t<Amplitude>(static_cast<py::ssize_t>(a.size()), a.data());
                             })
      .def("norm_squared", &Statevector::norm_squared)
      .def("probabilities", [](const Statevector& s) { return measure_probabilities(s); });
  m.def("init_plus", &init_plus);
  m.def("init_warmstart", [](const std::vector<double>& t) { return init_warmstart(t); });
  m.def("apply_cost_phase", [](Statevector& s, std::vector<double> values, double gamma) {
    apply_cost_phase(s, DiagonalCost{std::move(values)}, gamma);
  });
  m.def("apply_standard_mixer", &apply_standard_mixer);
  m.def("apply_warmstart_mixer",
        [](Statevector& s, double beta, const std::vector<double>& t) { apply_warmstart_mixer(s, beta, t); });
  m.def(
      "sample_shots",
      [](const Statevector& s, std::uint64_t shots, std::uint64_t seed) { return sample_shots(s, shots, seed); },
      py::arg("state"), py::arg("shots"), py::arg("seed"));

  py::enum_<MixerKind>(m, "MixerKind").value("standard", MixerKind::standard).value("warmstart", MixerKind::warmstart);
  py::class_<AnsatzSpec>(m, "AnsatzSpec")
      .def_static("standard", &AnsatzSpec::standard, py::arg("problem"), py::arg("depth"))
      .def_static("warmstart", &AnsatzSpec::warmstart, py::arg("problem"), py::arg("thetas"), py::arg("depth"))
      .def_readonly("mixer", &AnsatzSpec::mixer)
      .def_readonly("depth", &AnsatzSpec::depth)
      .def_readonly("thetas", &AnsatzSpec::thetas)
      .def_property_readonly("n_qubits", &AnsatzSpec::n_qubits);
  m.def("build_state", [](const AnsatzSpec& s, const std::vector<double>& g, const std::vector<double>& b) {
    return build_state(s, g, b);
  });
  m.def(
      "expectation",
      [](const AnsatzSpec& s, const std::vector<double>& g, const std::vector<double>& b, std::uint64_t shots,
         std::uint64_t seed) { return expectation(s, g, b, ExpectationMode{shots, seed}); },
      py::arg("spec"), py::arg("gammas"), py::arg("betas"), py::arg("shots") = 0, py::arg("seed") = 0);

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init<>())
      .def_readwrite("restarts", &OptimizerConfig::restarts)
      .def_readwrite("max_evals_per_layer", &OptimizerConfig::max_evals_per_layer)
      .def_readwrite("simplex_tol", &OptimizerConfig::simplex_tol)
      .def_readwrite("initial_step", &OptimizerConfig::initial_step)
      .def_readwrite("seed", &OptimizerConfig::seed);
  py::class_<OptimizationResult>(m, "OptimizationResult")
      .def_readonly("best_gammas", &OptimizationResult::best_gammas)
      .def_readonly("best_betas", &OptimizationResult::best_betas)
      .def_readonly("best_expectation", &OptimizationResult::best_expectation)
      .def_readonly("evaluations", &OptimizationResult::evaluations)
      .def_readonly("restarts_used", &OptimizationResult::restarts_used)
      .def_readonly("final_state", &OptimizationResult::final_state);
  m.def(
      "optimize",
      [](const AnsatzSpec& s, const OptimizerConfig& c, std::optional<std::pair<std::vector<double>, std::vector<double>>> seed) {
        std::optional<ParameterSeed> ps;
        if (seed) ps = ParameterSeed{seed->first, seed->second};
        return optimize(s, c, ps);
      },
      py::arg("spec"), py::arg("config") = OptimizerConfig{}, py::arg("seed_start") = py::none());

  py::class_<FeasibleSpectrum>(m, "FeasibleSpectrum")
      .def_readonly("fc_min", &FeasibleSpectrum::fc_min)
      .def_readonly("fc_max", &FeasibleSpectrum::fc_max)
      .def_readonly("argmin", &FeasibleSpectrum::argmin)
      .def_readonly("feasible_count", &FeasibleSpectrum::feasible_count)
      .def_readonly("optimal_set", &FeasibleSpectrum::optimal_set)
      .def("degenerate", &FeasibleSpectrum::degenerate);
  m.def("brute_force_spectrum", &brute_force_spectrum);
  m.def("approx_ratio", [](const std::vector<int>& b, const PortfolioInstance& i, const FeasibleSpectrum& s) {
    return approx_ratio(as_bits(b), i, s);
  });
  m.def("mean_approx_ratio", [](const std::vector<double>& p, const PortfolioInstance& i,
                                const FeasibleSpectrum& s) { return mean_approx_ratio(p, i, s); });
  m.def("ground_state_probability",
        [](const std::vector<double>& p, const FeasibleSpectrum& s) { return ground_state_probability(p, s); });

  m.def(
      "round_relaxed",
      [](const std::vector<double>& x, double d0, double d1) {
        const RoundingResult r = round_relaxed(x, RoundingBounds{d0, d1});
        return py::make_tuple(r.fixed, r.free);
      },
      py::arg("x_star"), py::arg("delta0"), py::arg("delta1"));
  py::class_<ReducedProblem>(m, "ReducedProblem")
      .def_readonly("qubo", &ReducedProblem::qubo)
      .def_readonly("fixed", &ReducedProblem::fixed)
      .def_readonly("free_index_map", &ReducedProblem::free_index_map)
      .def_readonly("offset_accumulated", &ReducedProblem::offset_accumulated)
      .def_property_readonly("n_free", &ReducedProblem::n_free);
  m.def("eliminate", &eliminate);
  m.def("lift", [](const ReducedProblem& r, const std::vector<int>& y) { return as_list(lift(r, as_bits(y))); });
  m.def("classical_baseline", [](const PortfolioInstance& i, const std::vector<double>& x) {
    const BaselineResult b = classical_baseline(i, x);
    return py::make_tuple(as_list(b.bits), b.r, b.P);
  });

  m.def("epsilon_measure", [](const std::vector<double>& x, const std::vector<int>& b) {
    return epsilon_measure(x, as_bits(b));
  });
  m.def("sigma_measure", [](const std::vector<double>& x, const std::vector<int>& b) {
    return sigma_measure(x, as_bits(b));
  });

  m.def(
      "verify_instance",
      [](const PortfolioInstance& i, std::uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : verify_instance(i, seed)) out.emplace_back(c.name, c.passed, c.detail);
        return out;
      },
      py::arg("instance"), py::arg("seed") = 1);

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const ExperimentConfig cfg = config_from_json(Json::parse(config_json));
        py::gil_scoped_release release;
        return record_to_json(run_experiment(cfg)).dump();
      },
      py::arg("config_json"), "Runs an experiment described by a JSON string; returns the record as JSON.");
}
