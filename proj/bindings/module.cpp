#include "smdp/exponential.hpp"
#include "smdp/model_io.hpp"
#include "smdp/simulate.hpp"
#include "smdp/solver_finite.hpp"
#include "smdp/solver_infinite.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace smdp;

namespace {

py::array_t<double> table_array(const ValueTable& t) {
    py::array_t<double> a({t.n_states, t.grid.W(), t.grid.L()});
    std::copy(t.values.begin(), t.values.end(), a.mutable_data());
    return a;
}

py::array_t<int> policy_array(const PolicyTable& p) {
    py::array_t<int> a({p.n_states, p.grid.W(), p.grid.L()});
    std::copy(p.choice.begin(), p.choice.end(), a.mutable_data());
    return a;
}

py::array_t<double> htable_array(const HTable& h) {
    py::array_t<double> a({h.n_states, static_cast<int>(h.w_nodes.size())});
    std::copy(h.values.begin(), h.values.end(), a.mutable_data());
    return a;
}

std::vector<PolicyTable> as_policy_seq(const std::vector<PolicyTable>& seq) { return seq; }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Risk-sensitive semi-Markov decision process solver";

    py::register_exception<ParseError>(m, "ModelParseError", PyExc_ValueError);
    py::register_exception<NoCertificateError>(m, "NoCertificateError", PyExc_ValueError);
    py::register_exception<NonConvergenceError>(m, "NonConvergenceError", PyExc_RuntimeError);

    py::class_<Utility>(m, "Utility")
        .def_static("linear", &Utility::linear)
        .def_static("exponential", &Utility::exponential, py::arg("gamma"))
        .def_static("power", &Utility::power, py::arg("p"), py::arg("eta") = 1e-3)
        .def_static("log1p", &Utility::log1p)
        .def("__call__", &Utility::eval, py::arg("lam"))
        .def("eval", &Utility::eval, py::arg("lam"))
        .def("deriv_left", &Utility::deriv_left, py::arg("lam"))
        .def("deriv_right", &Utility::deriv_right, py::arg("lam"))
        .def_property_readonly("concave", &Utility::is_concave)
        .def_property_readonly("convex", &Utility::is_convex)
        .def("__repr__", &Utility::describe);

    py::class_<Assumption1Certificate>(m, "Certificate")
        .def_readonly("delta", &Assumption1Certificate::delta)
        .def_readonly("epsilon", &Assumption1Certificate::epsilon)
        .def("__repr__", [](const Assumption1Certificate& c) {
            return "Certificate(delta=" + std::to_string(c.delta) +
                   ", epsilon=" + std::to_string(c.epsilon) + ")";
        });

    py::class_<ModelFile>(m, "Model")
        .def_static("load", &load_model_file, py::arg("path"))
        .def_static("from_json", &parse_model_json, py::arg("text"),
                    py::arg("origin") = "<string>")
        .def_property_readonly("states", [](const ModelFile& f) { return f.model.states; })
        .def_property_readonly("actions", [](const ModelFile& f) { return f.model.actions; })
        .def_property_readonly("alpha", [](const ModelFile& f) { return f.model.alpha; })
        .def_property_readonly("c_bar", [](const ModelFile& f) { return f.model.c_bar; })
        .def_property_readonly("lambda_max",
                               [](const ModelFile& f) { return f.model.lambda_max(); })
        .def_property_readonly("utility", [](const ModelFile& f) { return f.utility; })
        .def("validate", [](const ModelFile& f) { return validate(f.model).violations; })
        .def(
            "certify",
            [](const ModelFile& f, std::optional<double> delta) {
                return certify_assumption1(
                    f.model, delta ? *delta : default_certificate_delta(f.model));
            },
            py::arg("delta") = std::nullopt)
        .def("contraction_base",
             [](const ModelFile& f, const Assumption1Certificate& cert) {
                 return contraction_base(cert, f.model.alpha);
             })
        .def("hash", [](const ModelFile& f) { return model_hash(f.model, std::nullopt); })
        .def("to_json", [](const ModelFile& f) { return model_to_json(f.model, f.utility); });

    py::class_<AugGrid>(m, "Grid")
        .def_property_readonly("w_nodes", [](const AugGrid& g) { return g.w_nodes; })
        .def_property_readonly("lam_nodes", [](const AugGrid& g) { return g.lam_nodes; })
        .def("__repr__", [](const AugGrid& g) {
            return "Grid(W=" + std::to_string(g.W()) + ", L=" + std::to_string(g.L()) + ")";
        });

    py::class_<QuadratureRule>(m, "Quadrature")
        .def_readonly("M", &QuadratureRule::M)
        .def_readonly("weight", &QuadratureRule::weight);

    py::class_<PolicyTable>(m, "Policy")
        .def_static(
            "constant",
            [](const AugGrid& g, const ModelFile& f, const std::vector<int>& actions) {
                return constant_policy(g, f.model, actions);
            },
            py::arg("grid"), py::arg("model"), py::arg("actions"))
        .def_property_readonly("choice", &policy_array)
        .def_property_readonly("grid", [](const PolicyTable& p) { return p.grid; });

    py::class_<ValueTable>(m, "Values")
        .def_property_readonly("array", &table_array)
        .def_property_readonly("grid", [](const ValueTable& t) { return t.grid; })
        .def("at_origin", [](const ValueTable& t, int i) { return t.at(i, 0, 0); }, py::arg("state"))
        .def(
            "interpolate",
            [](const ValueTable& t, int i, double w, double lam) {
                return interpolate(t, i, w, lam);
            },
            py::arg("state"), py::arg("w"), py::arg("lam"));

    py::class_<GridBudget>(m, "GridBudget")
        .def_readonly("interp", &GridBudget::interp)
        .def_readonly("clamp", &GridBudget::clamp)
        .def_property_readonly("total", &GridBudget::total);

    py::class_<SandwichResult>(m, "SolveResult")
        .def_readonly("lower", &SandwichResult::lower)
        .def_readonly("upper", &SandwichResult::upper)
        .def_readonly("policy", &SandwichResult::policy)
        .def_readonly("n_iters", &SandwichResult::n_iters)
        .def_readonly("gap", &SandwichResult::gap)
        .def_readonly("budget", &SandwichResult::budget)
        .def("j", &SandwichResult::j_value, py::arg("state"))
        .def("j_interval",
             [](const SandwichResult& r, int i) {
                 return std::pair(r.lower_at_origin(i), r.upper_at_origin(i));
             })
        .def_property_readonly("history", [](const SandwichResult& r) {
            std::vector<std::tuple<int, double, double>> h;
            for (const auto& rec : r.history) h.emplace_back(rec.n, rec.gap, rec.bound);
            return h;
        });

    py::class_<FiniteSolution>(m, "FiniteResult")
        .def_property_readonly("values",
                               [](const FiniteSolution& s) { return s.values; })
        .def_property_readonly("policies",
                               [](const FiniteSolution& s) { return s.policies; })
        .def("j", &FiniteSolution::j_value, py::arg("state"))
        .def("decision_order_policies", &FiniteSolution::decision_order_policies);

    py::class_<ExponentialResult>(m, "ExponentialResult")
        .def_property_readonly("h", [](const ExponentialResult& r) { return htable_array(r.h); })
        .def_property_readonly("w_nodes",
                               [](const ExponentialResult& r) { return r.h.w_nodes; })
        .def_readonly("n_iters", &ExponentialResult::n_iters)
        .def_readonly("gap", &ExponentialResult::gap)
        .def_readonly("log_domain", &ExponentialResult::log_domain)
        .def("j", &ExponentialResult::j_value, py::arg("state"))
        .def("policy_table", [](const ExponentialResult& r, const AugGrid& g) {
            return broadcast_policy(r.policy, g);
        });

    py::class_<ValueEstimate>(m, "Estimate")
        .def_readonly("mean", &ValueEstimate::mean)
        .def_readonly("se", &ValueEstimate::se)
        .def_property_readonly("ci",
                               [](const ValueEstimate& e) { return std::pair(e.ci_lo, e.ci_hi); })
        .def_property_readonly(
            "bracket", [](const ValueEstimate& e) { return std::pair(e.bracket_lo, e.bracket_hi); })
        .def_property_readonly("outer", [](const ValueEstimate& e) {
            return std::pair(e.outer_lo(), e.outer_hi());
        })
        .def_readonly("n_jumps", &ValueEstimate::n_jumps)
        .def_readonly("n_traj", &ValueEstimate::n_traj);

    py::class_<TrajectorySample>(m, "Trajectory")
        .def_readonly("jump_times", &TrajectorySample::jump_times)
        .def_readonly("states", &TrajectorySample::states)
        .def_readonly("actions", &TrajectorySample::actions)
        .def_readonly("accum_cost", &TrajectorySample::accum_cost);

    m.def(
        "build_grid",
        [](const ModelFile& f, int W, int L, double w_min) {
            return build_grid(f.model, W, L, w_min);
        },
        py::arg("model"), py::arg("W") = 64, py::arg("L") = 64, py::arg("w_min") = 1e-3);
    m.def(
        "build_quadrature",
        [](const ModelFile& f, int M) { return build_quadrature(f.model, M); },
        py::arg("model"), py::arg("M") = 64);

    m.def(
        "solve_finite",
        [](const ModelFile& f, const Utility& u, const AugGrid& g, const QuadratureRule& q,
           int n_jumps, int threads) {
            return solve_finite(f.model, u, g, q, n_jumps, threads);
        },
        py::arg("model"), py::arg("utility"), py::arg("grid"), py::arg("quadrature"),
        py::arg("n_jumps"), py::arg("threads") = 1);

    m.def(
        "solve_infinite",
        [](const ModelFile& f, const Utility& u, const AugGrid& g, const QuadratureRule& q,
           const Assumption1Certificate& cert, double tol, int max_iter, int threads) {
            return solve_infinite(f.model, u, g, q, cert, tol, max_iter, threads);
        },
        py::arg("model"), py::arg("utility"), py::arg("grid"), py::arg("quadrature"),
        py::arg("certificate"), py::arg("tol") = 1e-4, py::arg("max_iter") = 10000,
        py::arg("threads") = 1);

    m.def(
        "solve_exponential",
        [](const ModelFile& f, double gamma, const AugGrid& g, const QuadratureRule& q,
           const Assumption1Certificate& cert, double tol, int max_iter, int threads) {
            ExponentialOptions opts;
            opts.tol = tol;
            opts.max_iter = max_iter;
            opts.threads = threads;
            return solve_exponential(f.model, gamma, g, q, cert, opts);
        },
        py::arg("model"), py::arg("gamma"), py::arg("grid"), py::arg("quadrature"),
        py::arg("certificate"), py::arg("tol") = 1e-4, py::arg("max_iter") = 10000,
        py::arg("threads") = 1);

    m.def(
        "evaluate_stationary",
        [](const ModelFile& f, const Utility& u, const AugGrid& g, const QuadratureRule& q,
           const PolicyTable& policy, double tol, int max_iter, int threads) {
            return evaluate_stationary(f.model, u, g, q, policy, tol, max_iter, threads);
        },
        py::arg("model"), py::arg("utility"), py::arg("grid"), py::arg("quadrature"),
        py::arg("policy"), py::arg("tol") = 1e-4, py::arg("max_iter") = 10000,
        py::arg("threads") = 1);

    m.def(
        "evaluate_markov_policy",
        [](const ModelFile& f, const Utility& u, const AugGrid& g, const QuadratureRule& q,
           const std::vector<PolicyTable>& seq, int threads) {
            return evaluate_markov_policy(f.model, u, g, q, seq, threads);
        },
        py::arg("model"), py::arg("utility"), py::arg("grid"), py::arg("quadrature"),
        py::arg("policies"), py::arg("threads") = 1);

    m.def(
        "improve_policy",
        [](const ModelFile& f, const Utility& u, const AugGrid& g, const QuadratureRule& q,
           const PolicyTable& policy, double tol, int max_iter, int threads, double margin) {
            auto res = improve_policy(f.model, u, g, q, policy, tol, max_iter, threads, margin);
            return std::tuple(res.policy, res.improved, res.value);
        },
        py::arg("model"), py::arg("utility"), py::arg("grid"), py::arg("quadrature"),
        py::arg("policy"), py::arg("tol") = 1e-4, py::arg("max_iter") = 10000,
        py::arg("threads") = 1, py::arg("margin") = -1.0);

    m.def(
        "sample_trajectory",
        [](const ModelFile& f, const std::vector<PolicyTable>& seq, int initial_state,
           int n_jumps, std::uint64_t seed, std::uint64_t traj_index) {
            return sample_trajectory(f.model, as_policy_seq(seq), initial_state, n_jumps, seed,
                                     traj_index);
        },
        py::arg("model"), py::arg("policies"), py::arg("initial_state"), py::arg("n_jumps"),
        py::arg("seed") = 0, py::arg("traj_index") = 0);

    m.def(
        "estimate_value",
        [](const ModelFile& f, const Utility& u, const std::vector<PolicyTable>& seq,
           int initial_state, int n_jumps, bool infinite_bracket, long n_traj,
           std::uint64_t seed, int threads) {
            return estimate_value(f.model, u, as_policy_seq(seq), initial_state, n_jumps,
                                  infinite_bracket, n_traj, seed, threads);
        },
        py::arg("model"), py::arg("utility"), py::arg("policies"), py::arg("initial_state"),
        py::arg("n_jumps"), py::arg("infinite_bracket") = false, py::arg("n_traj") = 10000,
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "default_truncation_depth",
        [](const ModelFile& f, const Utility& u, const Assumption1Certificate& cert, double tol) {
            return default_truncation_depth(u, f.model, cert, tol);
        },
        py::arg("model"), py::arg("utility"), py::arg("certificate"), py::arg("tol"));

    m.def(
        "error_bound",
        [](const ModelFile& f, const Utility& u, const Assumption1Certificate& cert, int n,
           double w, double lam) { return error_bound(u, f.model, cert, n, w, lam); },
        py::arg("model"), py::arg("utility"), py::arg("certificate"), py::arg("n"),
        py::arg("w") = 1.0, py::arg("lam") = 0.0);

    m.def(
        "splitting_residual",
        [](const ValueTable& v, const ExponentialResult& r) {
            return splitting_residual(v, r.h);
        },
        py::arg("values"), py::arg("exponential_result"));
}
