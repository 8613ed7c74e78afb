#include "grpflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace grpflow::cli {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

solver::Mode parse_mode(const std::string& m) {
    if (m == "exact") return solver::Mode::exact;
    if (m == "acoustic") return solver::Mode::acoustic;
    return solver::Mode::automatic;
}

Vec3 phi_vector(const gas::PrimitiveState& q, const gas::GasModel& g) {
    const gas::Invariants inv = gas::riemann_invariants(q, g);
    return {inv.S, inv.psi, inv.phi};
}

} // namespace

std::string RunManifest::line() const {
    std::string s = "# manifest: command=" + command + " case=" + case_name;
    for (const auto& [k, v] : params)
        s += " " + k + "=" + v;
    s += " deterministic=yes";
    return s;
}

void apply_config(Options& opt) {
    if (opt.config_file.empty())
        return;
    std::ifstream in(opt.config_file);
    if (!in)
        throw Error("cannot open config " + opt.config_file);
    std::string line, section;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos)
                return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        if (!section.empty() && section != opt.case_name)
            continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "cells") opt.cells = std::stoi(val);
        else if (key == "order") opt.order = std::stoi(val);
        else if (key == "cfl") opt.cfl = std::stod(val);
        else if (key == "t_end") opt.t_end = std::stod(val);
        else if (key == "mode") opt.mode = val;
        else if (key == "ref_cells") opt.ref_cells = std::stoi(val);
        else if (key == "solver") opt.solver = val;
        else if (key == "levels") opt.levels = std::stoi(val);
    }
}

std::vector<double> default_times(const cases::CaseSpec& spec) {
    const double t0 = spec.t0 > 0.0 ? spec.t0 : spec.t_end;
    if (spec.name == "sonic")
        return {t0, 2.0 * t0 / 3.0, 0.5 * t0, t0 / 3.0};
    return {t0, 0.5 * t0, 0.25 * t0, 0.125 * t0};
}

std::vector<SolverErrorRow> solver_error_table(const cases::CaseSpec& spec,
                                               const std::string& solver_name,
                                               const std::vector<double>& times,
                                               const cases::ReferenceSeries& ref) {
    const solver::GRPInput in = spec.grp_input();
    const bool quadratic = solver_name.rfind("qgrp", 0) == 0;
    const bool acoustic = solver_name == "lgrp1" || solver_name == "qgrp1";
    const solver::Mode mode = acoustic ? solver::Mode::acoustic : solver::Mode::exact;
    const solver::GRPSolution sol =
        quadratic ? solver::solve_qgrp(in, mode) : solver::solve_lgrp(in, mode);

    const bool phi_norm = spec.name == "sonic";
    std::vector<SolverErrorRow> rows;
    for (const double t : times) {
        const gas::PrimitiveState qt = solver::taylor_eval(sol, t);
        const gas::PrimitiveState qr = ref.eval(t);
        double err;
        if (phi_norm) {
            err = norm_inf(phi_vector(qt, in.gas) - phi_vector(qr, in.gas));
        } else {
            err = norm_inf(gas::to_vec(gas::prim_to_cons(qt, in.gas)) -
                           gas::to_vec(gas::prim_to_cons(qr, in.gas)));
        }
        rows.push_back({t, err, std::nan("")});
    }
    for (std::size_t i = 1; i < rows.size(); ++i)
        rows[i].order = std::log(rows[i - 1].error / rows[i].error) /
                        std::log(rows[i - 1].t / rows[i].t);
    return rows;
}

cases::ReferenceSeries get_reference(const cases::CaseSpec& spec, int n_cells,
                                     const std::string& cache_dir, double t_max) {
    std::filesystem::create_directories(cache_dir);
    if (t_max <= 0.0)
        t_max = (spec.t0 > 0.0 ? spec.t0 : spec.t_end) * 1.02;
    char tag[48];
    std::snprintf(tag, sizeof tag, "%d_t%.6g", n_cells, t_max);
    const std::string path = cache_dir + "/ref_" + spec.name + "_" + tag + ".csv";
    if (auto cached = cases::load_reference(path)) {
        if (cached->case_name == spec.name && cached->n_cells >= n_cells &&
            cached->times.back() >= t_max * 0.999)
            return *cached;
    }
    cases::ReferenceSeries ref = cases::godunov_reference(spec, n_cells, t_max);
    cases::save_reference(ref, path);
    return ref;
}

int cmd_solver_test(const Options& opt) {
    const cases::CaseSpec& spec = cases::find_case(opt.case_name);
    if (spec.category != cases::Category::solver_accuracy) {
        std::cerr << "case '" << opt.case_name << "' is not a solver-accuracy case\n";
        return 2;
    }
    const cases::ReferenceSeries ref = get_reference(spec, opt.ref_cells, opt.out_dir);
    const std::vector<double> times = default_times(spec);
    const auto rows = solver_error_table(spec, opt.solver, times, ref);

    std::filesystem::create_directories(opt.out_dir);
    const std::string path = opt.out_dir + "/solver_" + spec.name + "_" + opt.solver + ".csv";
    std::ofstream out(path);
    RunManifest man{"solver-test", spec.name,
                    {{"solver", opt.solver}, {"ref_cells", std::to_string(ref.n_cells)}}};
    out << "# grpflow solver-test v1\n" << man.line() << "\n";
    out << "t,linf_error,order\n";
    for (const auto& r : rows)
        out << fmt(r.t) << "," << fmt(r.error) << ","
            << (std::isnan(r.order) ? std::string("--") : fmt(r.order)) << "\n";
    std::cout << "wrote " << path << "\n";
    for (const auto& r : rows)
        std::printf("t=%-10.5g  err=%-12.5g  order=%s\n", r.t, r.error,
                    std::isnan(r.order) ? "--" : fmt(r.order).c_str());
    return 0;
}

int cmd_run(const Options& opt) {
    const cases::CaseSpec& spec = cases::find_case(opt.case_name);
    fv::SchemeConfig cfg;
    cfg.order = opt.order;
    cfg.cfl = opt.cfl;
    cfg.grp_mode = parse_mode(opt.mode);
    cfg.n_cells = opt.cells > 0 ? opt.cells : spec.default_cells;
    cfg.t_end = opt.t_end > 0.0 ? opt.t_end : spec.t_end;

    const fv::RunResult res = fv::run(spec.problem, cfg);

    std::filesystem::create_directories(opt.out_dir);
    const std::string tag = spec.name + "_o" + std::to_string(cfg.order);
    const std::string path = opt.out_dir + "/" + tag + "_profile.csv";
    std::ofstream out(path);
    RunManifest man{"run", spec.name,
                    {{"order", std::to_string(cfg.order)},
                     {"cells", std::to_string(cfg.n_cells)},
                     {"cfl", fmt(cfg.cfl)},
                     {"t_end", fmt(cfg.t_end)},
                     {"mode", opt.mode}}};
    out << "# grpflow profile v1\n" << man.line() << "\n";

    const bool has_exact = spec.name == "sod" || spec.name == "problem123" ||
                           spec.name == "smoothwave" || spec.name == "nozzleA";
    auto exact_at = [&](double x) -> gas::PrimitiveState {
        if (spec.name == "sod" || spec.name == "problem123") {
            const riemann::RiemannFan fan = riemann::solve(spec.problem.initial(-1.0),
                                                           spec.problem.initial(1.0),
                                                           spec.problem.gas);
            return riemann::sample(fan, x / res.t_final);
        }
        if (spec.name == "smoothwave")
            return {1.0 + 0.2 * std::sin(M_PI * (x - res.t_final)), 1.0, 1.0};
        return cases::nozzle_steady(x, cases::NozzleBranch::transonic, spec.problem.gas);
    };

    out << (has_exact ? "x,rho,u,p,e,rho_exact,u_exact,p_exact,e_exact\n" : "x,rho,u,p,e\n");
    for (int i = 0; i < res.grid.n_cells; ++i) {
        const double x = res.grid.center(i);
        const auto& q = res.prim[i];
        out << fmt(x) << "," << fmt(q.rho) << "," << fmt(q.u) << "," << fmt(q.p) << ","
            << fmt(gas::internal_energy(q, spec.problem.gas));
        if (has_exact) {
            const auto qe = exact_at(x);
            out << "," << fmt(qe.rho) << "," << fmt(qe.u) << "," << fmt(qe.p) << ","
                << fmt(gas::internal_energy(qe, spec.problem.gas));
        }
        out << "\n";
    }

    const std::string cpath = opt.out_dir + "/" + tag + "_conservation.csv";
    std::ofstream cout_(cpath);
    cout_ << "# grpflow conservation v1\n" << man.line() << "\n";
    cout_ << "t,dt,mass,momentum,energy,residual\n";
    for (std::size_t i = 0; i < res.diag.time.size(); ++i)
        cout_ << fmt(res.diag.time[i]) << "," << fmt(res.diag.dt[i]) << ","
              << fmt(res.diag.totals[i][0]) << "," << fmt(res.diag.totals[i][1]) << ","
              << fmt(res.diag.totals[i][2]) << "," << fmt(res.diag.residual[i]) << "\n";
    std::cout << "wrote " << path << " and " << cpath << " (steps=" << res.steps
              << ", t=" << res.t_final << ")\n";
    return 0;
}

int cmd_convergence(const Options& opt) {
    std::filesystem::create_directories(opt.out_dir);
    if (opt.test == "solver") {
        Options o = opt;
        o.command = "solver-test";
        return cmd_solver_test(o);
    }
    const cases::CaseSpec& spec = cases::find_case("smoothwave");
    std::ofstream out(opt.out_dir + "/convergence_order" + std::to_string(opt.order) + ".csv");
    RunManifest man{"convergence", "smoothwave", {{"order", std::to_string(opt.order)}}};
    out << "# grpflow convergence v1\n" << man.line() << "\n";
    out << "cells,l1_error,order\n";
    double prev_err = 0.0;
    int cells = 25;
    std::printf("smooth convergence, order %d\n", opt.order);
    for (int lev = 0; lev < opt.levels; ++lev, cells *= 2) {
        fv::SchemeConfig cfg;
        cfg.order = opt.order;
        cfg.cfl = opt.cfl;
        cfg.n_cells = cells;
        cfg.t_end = spec.t_end;
        const fv::RunResult res = fv::run(spec.problem, cfg);
        double l1 = 0.0;
        for (int i = 0; i < cells; ++i) {
            // compare against the exact cell average of the advected wave
            const double a = res.grid.iface(i) - res.t_final;
            const double b = a + res.grid.dx;
            const double exact_avg =
                1.0 - 0.2 * (std::cos(M_PI * b) - std::cos(M_PI * a)) / (M_PI * res.grid.dx);
            l1 += std::fabs(res.cons[i].rho - exact_avg) * res.grid.dx;
        }
        const double order = lev > 0 ? std::log2(prev_err / l1) : std::nan("");
        out << cells << "," << fmt(l1) << ","
            << (lev > 0 ? fmt(order) : std::string("--")) << "\n";
        std::printf("cells=%-6d l1=%-12.5g order=%s\n", cells, l1,
                    lev > 0 ? fmt(order).c_str() : "--");
        prev_err = l1;
    }
    return 0;
}

int cmd_reference(const Options& opt) {
    const cases::CaseSpec& spec = cases::find_case(opt.case_name);
    const cases::ReferenceSeries ref = get_reference(spec, opt.ref_cells, opt.out_dir);
    std::cout << "reference for " << spec.name << ": " << ref.n_cells << " cells, "
              << ref.times.size() << " samples\n";
    return 0;
}

int dispatch(const Options& opt) {
    if (opt.command == "run") return cmd_run(opt);
    if (opt.command == "solver-test") return cmd_solver_test(opt);
    if (opt.command == "convergence") return cmd_convergence(opt);
    if (opt.command == "reference") return cmd_reference(opt);
    std::cerr << "unknown command '" << opt.command << "'\n";
    return 2;
}

} // namespace grpflow::cli
