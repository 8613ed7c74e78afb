#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "grpflow/cases.hpp"

namespace py = pybind11;
using namespace grpflow;
using gas::GasModel;
using gas::PrimitiveState;

namespace {

PrimitiveState make_state(double rho, double u, double p) { return {rho, u, p}; }

py::dict fan_to_dict(const riemann::RiemannFan& fan) {
    auto wave = [](const riemann::WaveKind& w) {
        py::dict d;
        d["type"] = w.type == riemann::WaveType::shock
                        ? "shock"
                        : (w.type == riemann::WaveType::contact ? "contact" : "rarefaction");
        d["degenerate"] = w.degenerate;
        d["head"] = w.head;
        d["tail"] = w.tail;
        d["sigma"] = w.sigma;
        return d;
    };
    py::dict d;
    d["p_star"] = fan.p_star;
    d["u_star"] = fan.u_star;
    d["rho_star_left"] = fan.star_left.rho;
    d["rho_star_right"] = fan.star_right.rho;
    d["left_wave"] = wave(fan.wave_minus);
    d["right_wave"] = wave(fan.wave_plus);
    return d;
}

solver::GRPInput make_input(py::tuple qL, py::tuple qR, py::object dqL, py::object dqR,
                            py::object d2qL, py::object d2qR, double gamma, double a0,
                            double a1) {
    solver::GRPInput in;
    in.gas = GasModel(gamma);
    in.qL = make_state(qL[0].cast<double>(), qL[1].cast<double>(), qL[2].cast<double>());
    in.qR = make_state(qR[0].cast<double>(), qR[1].cast<double>(), qR[2].cast<double>());
    auto vec = [](py::object o) -> Vec3 {
        if (o.is_none())
            return {};
        auto t = o.cast<std::vector<double>>();
        return {t[0], t[1], t[2]};
    };
    in.dqL = vec(dqL);
    in.dqR = vec(dqR);
    if (!d2qL.is_none())
        in.d2qL = vec(d2qL);
    if (!d2qR.is_none())
        in.d2qR = vec(d2qR);
    in.a0 = a0;
    in.a1 = a1;
    return in;
}

solver::Mode parse_mode(const std::string& m) {
    if (m == "exact") return solver::Mode::exact;
    if (m == "acoustic") return solver::Mode::acoustic;
    return solver::Mode::automatic;
}

} // namespace

PYBIND11_MODULE(_grpflow, m) {
    m.doc() = "Generalized Riemann problem solvers and duct-flow schemes";

    py::register_exception<Error>(m, "GrpError");

    m.def(
        "solve_riemann",
        [](py::tuple qL, py::tuple qR, double gamma) {
            const auto fan = riemann::solve(
                make_state(qL[0].cast<double>(), qL[1].cast<double>(), qL[2].cast<double>()),
                make_state(qR[0].cast<double>(), qR[1].cast<double>(), qR[2].cast<double>()),
                GasModel(gamma));
            return fan_to_dict(fan);
        },
        py::arg("left"), py::arg("right"), py::arg("gamma") = 1.4,
        "Exact Riemann solution of a (rho, u, p) state pair");

    m.def(
        "sample_riemann",
        [](py::tuple qL, py::tuple qR, double theta, double gamma) {
            const auto fan = riemann::solve(
                make_state(qL[0].cast<double>(), qL[1].cast<double>(), qL[2].cast<double>()),
                make_state(qR[0].cast<double>(), qR[1].cast<double>(), qR[2].cast<double>()),
                GasModel(gamma));
            const auto q = riemann::sample(fan, theta);
            return py::make_tuple(q.rho, q.u, q.p);
        },
        py::arg("left"), py::arg("right"), py::arg("theta"), py::arg("gamma") = 1.4,
        "Self-similar solution sampled along x/t = theta");

    py::class_<solver::GRPSolution>(m, "GrpSolution")
        .def_property_readonly("state",
                               [](const solver::GRPSolution& s) {
                                   return py::make_tuple(s.q0.rho, s.q0.u, s.q0.p);
                               })
        .def_property_readonly("dt",
                               [](const solver::GRPSolution& s) {
                                   return py::make_tuple(s.dtQ[0], s.dtQ[1], s.dtQ[2]);
                               })
        .def_property_readonly("dt2",
                               [](const solver::GRPSolution& s) -> py::object {
                                   if (!s.dt2Q)
                                       return py::none();
                                   return py::make_tuple((*s.dt2Q)[0], (*s.dt2Q)[1],
                                                         (*s.dt2Q)[2]);
                               })
        .def_property_readonly("sonic",
                               [](const solver::GRPSolution& s) { return s.sonic.has_value(); })
        .def("eval",
             [](const solver::GRPSolution& s, double t) {
                 const auto q = solver::taylor_eval(s, t);
                 return py::make_tuple(q.rho, q.u, q.p);
             },
             py::arg("t"), "Evaluate the interface expansion at time t");

    m.def(
        "solve_grp",
        [](py::tuple qL, py::tuple qR, py::object dqL, py::object dqR, py::object d2qL,
           py::object d2qR, double gamma, double a0, double a1, int order,
           const std::string& mode) {
            const auto in = make_input(qL, qR, dqL, dqR, d2qL, d2qR, gamma, a0, a1);
            return order >= 3 ? solver::solve_qgrp(in, parse_mode(mode))
                              : solver::solve_lgrp(in, parse_mode(mode));
        },
        py::arg("left"), py::arg("right"), py::arg("dleft") = py::none(),
        py::arg("dright") = py::none(), py::arg("d2left") = py::none(),
        py::arg("d2right") = py::none(), py::arg("gamma") = 1.4, py::arg("a0") = 0.0,
        py::arg("a1") = 0.0, py::arg("order") = 2, py::arg("mode") = "exact",
        "Resolve a generalized Riemann problem at a cell interface");

    m.def("case_names", []() {
        std::vector<std::string> names;
        for (const auto& c : cases::catalog())
            names.push_back(c.name);
        return names;
    });

    m.def(
        "run_case",
        [](const std::string& name, int order, int cells, double t_end, double cfl,
           const std::string& mode) {
            const auto& spec = cases::find_case(name);
            fv::SchemeConfig cfg;
            cfg.order = order;
            cfg.n_cells = cells > 0 ? cells : spec.default_cells;
            cfg.t_end = t_end > 0.0 ? t_end : spec.t_end;
            cfg.cfl = cfl;
            cfg.grp_mode = parse_mode(mode);
            const auto res = fv::run(spec.problem, cfg);
            py::dict d;
            std::vector<double> x, rho, u, p;
            for (int i = 0; i < res.grid.n_cells; ++i) {
                x.push_back(res.grid.center(i));
                rho.push_back(res.prim[i].rho);
                u.push_back(res.prim[i].u);
                p.push_back(res.prim[i].p);
            }
            d["x"] = x;
            d["rho"] = rho;
            d["u"] = u;
            d["p"] = p;
            d["t"] = res.t_final;
            d["steps"] = res.steps;
            const Vec3 tot0 = res.diag.totals.front(), tot1 = res.diag.totals.back();
            d["mass_drift"] = std::fabs(tot1[0] - tot0[0]) / std::max(1.0, std::fabs(tot0[0]));
            return d;
        },
        py::arg("name"), py::arg("order") = 2, py::arg("cells") = 0, py::arg("t_end") = -1.0,
        py::arg("cfl") = 0.5, py::arg("mode") = "auto",
        "Advance a registered benchmark case and return the final profile");

    m.def(
        "nozzle_steady",
        [](double x, const std::string& branch, double gamma) {
            cases::NozzleBranch b = cases::NozzleBranch::transonic;
            if (branch == "subsonic") b = cases::NozzleBranch::subsonic;
            if (branch == "supersonic") b = cases::NozzleBranch::supersonic;
            const auto q = cases::nozzle_steady(x, b, GasModel(gamma));
            return py::make_tuple(q.rho, q.u, q.p);
        },
        py::arg("x"), py::arg("branch") = "transonic", py::arg("gamma") = 1.4);

    m.def(
        "sod_exact",
        [](double x, double t) {
            const auto q = cases::sod_exact(x, t, GasModel(1.4));
            return py::make_tuple(q.rho, q.u, q.p);
        },
        py::arg("x"), py::arg("t"));

    m.def(
        "invariants",
        [](py::tuple q, double gamma) {
            const auto inv = gas::riemann_invariants(
                make_state(q[0].cast<double>(), q[1].cast<double>(), q[2].cast<double>()),
                GasModel(gamma));
            return py::make_tuple(inv.S, inv.psi, inv.phi);
        },
        py::arg("state"), py::arg("gamma") = 1.4);
}
