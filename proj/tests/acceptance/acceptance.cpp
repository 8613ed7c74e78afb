// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
// Fine-mesh references are cached under ./acceptance_cache.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <random>
#include <string>
#include <vector>

#include "grpflow/cli.hpp"

using namespace grpflow;
using gas::GasModel;
using gas::PrimitiveState;

namespace {

const std::string cache_dir = "acceptance_cache";
int failures = 0;

void report(int num, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] %d. %-38s %s (%.1fs)\n", pass ? "PASS" : "FAIL", num, name.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

template <typename F>
void criterion(int num, const std::string& name, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(num, name, pass, detail, secs);
}

struct OrderWindow {
    std::vector<double> centers;
    double width;
};

bool orders_within(const std::vector<cli::SolverErrorRow>& rows, const OrderWindow& win,
                   std::string& detail) {
    bool ok = true;
    char buf[64];
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::snprintf(buf, sizeof buf, " %.2f", rows[i].order);
        detail += buf;
        const double c = win.centers[i - 1];
        if (!(std::fabs(rows[i].order - c) <= win.width))
            ok = false;
    }
    return ok;
}

PrimitiveState random_state(std::mt19937& rng) {
    std::uniform_real_distribution<double> rho(0.1, 5.0), u(-2.0, 2.0), p(0.05, 8.0);
    return {rho(rng), u(rng), p(rng)};
}

} // namespace

// 1. self-similarity of piecewise-constant planar data
static bool c1(std::string& detail) {
    std::mt19937 rng(2024);
    const GasModel g(1.4);
    double worst1 = 0.0, worst2 = 0.0;
    int done = 0;
    while (done < 200) {
        solver::GRPInput in;
        in.gas = g;
        in.qL = random_state(rng);
        in.qR = random_state(rng);
        in.d2qL = Vec3{};
        in.d2qR = Vec3{};
        solver::GRPSolution s1, s2;
        try {
            s1 = solver::solve_lgrp(in, solver::Mode::exact);
            s2 = solver::solve_qgrp(in, solver::Mode::exact);
        } catch (const VacuumFormation&) {
            continue;
        }
        ++done;
        const double sc = std::fabs(s1.q0.u) + gas::sound_speed(s1.q0, g);
        worst1 = std::max(worst1, norm_inf(s1.dtQ) / (1e-9 * sc));
        if (s2.dt2Q)
            worst2 = std::max(worst2, norm_inf(*s2.dt2Q) / (1e-6 * sc * sc));
        else
            worst2 = std::max(worst2, norm_inf(s2.dtQ) / (1e-9 * sc));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max dtQ ratio %.2e, dt2Q ratio %.2e", worst1, worst2);
    detail = buf;
    return worst1 <= 1.0 && worst2 <= 1.0;
}

// 2. closed forms against the adaptive-RK integration of the transport ODEs
static bool c2(std::string& detail) {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_fan = [&](double gamma, bool duct) {
        fan::FanSetup s;
        s.gas = GasModel(gamma);
        s.qL = random_state(rng);
        s.dqL = {2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0};
        s.d2qL = {4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0};
        s.a0 = duct ? unit(rng) - 0.5 : 0.0;
        s.a1 = duct ? unit(rng) - 0.5 : 0.0;
        const gas::Invariants inv = gas::riemann_invariants(s.qL, s.gas);
        s.beta_L = s.qL.u - gas::sound_speed(s.qL, s.gas);
        s.beta_R = s.beta_L + (0.05 + 0.55 * unit(rng)) * ((inv.psi - 1e-6) - s.beta_L);
        return s;
    };
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const double gamma = trial < 30 ? 1.4 : (trial < 40 ? 5.0 / 3.0 : 3.0);
        const bool qlevel = trial < 30;
        const fan::FanSetup s = random_fan(gamma, trial % 2 == 1);
        const auto head = fan::head_directional_derivs(s);
        const auto co = fan::build_coefficients(s, head, qlevel);
        std::vector<double> grid;
        for (int i = 0; i <= 32; ++i)
            grid.push_back(s.beta_L + (s.beta_R - s.beta_L) * i / 32.0);
        const auto oracle = cases::rk_lq_oracle(s, head, grid);
        double sc1 = 1e-12, sc2 = 1e-12;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            sc1 = std::max({sc1, std::fabs(oracle.dw[i][0]), std::fabs(oracle.dw[i][1])});
            sc2 = std::max({sc2, std::fabs(oracle.d2w[i][0]), std::fabs(oracle.d2w[i][1])});
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Vec2 dw = fan::dlam_w(co, grid[i]);
            worst = std::max({worst, std::fabs(dw[0] - oracle.dw[i][0]) / sc1,
                              std::fabs(dw[1] - oracle.dw[i][1]) / sc1});
            if (qlevel) {
                const Vec2 d2w = fan::dlam2_w(co, grid[i]);
                worst = std::max({worst, std::fabs(d2w[0] - oracle.d2w[i][0]) / sc2,
                                  std::fabs(d2w[1] - oracle.d2w[i][1]) / sc2});
            }
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max relative deviation %.2e", worst);
    detail = buf;
    return worst <= 1e-7;
}

// 3. acoustic-case convergence table
static bool c3(std::string& detail) {
    const auto& spec = cases::find_case("acoustic");
    const auto ref = cli::get_reference(spec, 40000, cache_dir);
    const auto times = cli::default_times(spec);
    bool ok = true;
    const std::vector<double> lerr = {2.420, 4.407e-1, 9.592e-2, 2.251e-2};
    const std::vector<double> qerr = {1.011, 9.861e-2, 1.127e-2, 1.439e-3};
    const auto lrows = cli::solver_error_table(spec, "lgrp1", times, ref);
    const auto qrows = cli::solver_error_table(spec, "qgrp1", times, ref);
    detail = "orders";
    ok &= orders_within(lrows, {{2.46, 2.20, 2.09}, 0.35}, detail);
    detail += " /";
    ok &= orders_within(qrows, {{3.36, 3.13, 2.97}, 0.35}, detail);
    for (std::size_t i = 0; i < times.size(); ++i) {
        ok &= lrows[i].error <= 2.0 * lerr[i] && lrows[i].error >= 0.5 * lerr[i];
        ok &= qrows[i].error <= 2.0 * qerr[i] && qrows[i].error >= 0.5 * qerr[i];
    }
    return ok;
}

// 4. pressure-jump cases at dp = 0.01, 1, 100
static bool c4(std::string& detail) {
    bool ok = true;
    for (const std::string name : {"dp0.01", "dp1", "dp100"}) {
        const auto& spec = cases::find_case(name);
        const auto times = cli::default_times(spec);
        std::vector<cases::ReferenceSeries> refs;
        if (name == "dp100") {
            // per-time ladder: finer meshes resolve the early star region
            const int ns[4] = {40000, 80000, 160000, 320000};
            for (int i = 0; i < 4; ++i)
                refs.push_back(cli::get_reference(spec, ns[i], cache_dir, times[i] * 1.05));
        } else {
            const auto ref = cli::get_reference(spec, 20000, cache_dir);
            refs.assign(4, ref);
        }
        for (const std::string sv : {"lgrp_inf", "qgrp_inf"}) {
            std::vector<cli::SolverErrorRow> rows;
            for (std::size_t i = 0; i < times.size(); ++i) {
                auto r = cli::solver_error_table(spec, sv, {times[i]}, refs[i]);
                rows.push_back(r[0]);
            }
            for (std::size_t i = 1; i < rows.size(); ++i)
                rows[i].order = std::log(rows[i - 1].error / rows[i].error) /
                                std::log(rows[i - 1].t / rows[i].t);
            detail += " " + name + "/" + (sv == "lgrp_inf" ? "L" : "Q") + ":";
            char buf[32];
            for (std::size_t i = 2; i < rows.size(); ++i) {
                std::snprintf(buf, sizeof buf, " %.2f", rows[i].order);
                detail += buf;
                const double center = sv == "lgrp_inf" ? 2.0 : 3.0;
                const double width = sv == "lgrp_inf" ? 0.35 : 0.4;
                if (!(std::fabs(rows[i].order - center) <= width))
                    ok = false;
            }
        }
    }
    return ok;
}

// 5. sonic case: Phi-norm orders and the Newton iteration budget
static bool c5(std::string& detail) {
    const auto& spec = cases::find_case("sonic");
    const auto times = cli::default_times(spec);
    const auto ref = cli::get_reference(spec, 80000, cache_dir, times[0] * 1.05);
    bool ok = true;
    const auto lrows = cli::solver_error_table(spec, "lgrp_inf", times, ref);
    const auto qrows = cli::solver_error_table(spec, "qgrp_inf", times, ref);
    detail = "orders";
    ok &= orders_within(lrows, {{2.06, 2.06, 2.05}, 0.4}, detail);
    detail += " /";
    ok &= orders_within(qrows, {{3.13, 3.13, 2.91}, 0.4}, detail);

    const auto in = spec.grp_input();
    const auto fan_ = riemann::solve(in.qL, in.qR, in.gas);
    int iter_max = 0;
    for (const double t : times)
        for (const int order : {1, 2}) {
            const auto sol = solver::solve_sonic(in, fan_, -1, t, order);
            iter_max = std::max(iter_max, sol.sonic->newton_iters);
        }
    char buf[40];
    std::snprintf(buf, sizeof buf, ", newton<=%d", iter_max);
    detail += buf;
    return ok && iter_max <= 3;
}

// 6. scheme benchmark suite
static bool c6(std::string& detail) {
    bool ok = true;
    const GasModel g(1.4);

    // sod: L1 density error against the frozen first-validated baseline
    const double sod_baseline[2] = {0.0480, 0.0481};
    auto sod_run = [&](int order) {
        const auto& spec = cases::find_case("sod");
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 100;
        cfg.t_end = spec.t_end;
        const auto res = fv::run(spec.problem, cfg);
        const auto fan = riemann::solve({1.0, 0.0, 1.0}, {0.125, 0.0, 0.1}, g);
        const double drho = fan.star_left.rho - fan.star_right.rho;  // contact jump
        double l1 = 0.0, overshoot = 0.0;
        for (int i = 0; i < cfg.n_cells; ++i) {
            const double x = res.grid.center(i);
            const auto ex = cases::sod_exact(x, res.t_final, g);
            l1 += std::fabs(res.prim[i].rho - ex.rho) * res.grid.dx;
            // star region away from the smeared edge waves
            if (x > fan.wave_minus.tail * res.t_final + 5.0 * res.grid.dx &&
                x < fan.wave_plus.sigma * res.t_final - 5.0 * res.grid.dx) {
                overshoot = std::max({overshoot, res.prim[i].rho - fan.star_left.rho,
                                      fan.star_right.rho - res.prim[i].rho,
                                      std::fabs(res.prim[i].u - fan.u_star)});
            }
        }
        const bool pass = l1 <= sod_baseline[order - 2] && overshoot <= 0.05 * drho;
        char buf[80];
        std::snprintf(buf, sizeof buf, " sod_o%d L1=%.4f os=%.4f", order, l1, overshoot);
        detail += buf;
        return pass;
    };
    ok &= sod_run(2);
    ok &= sod_run(3);

    // 123: strict positivity throughout
    for (int order : {2, 3}) {
        const auto& spec = cases::find_case("problem123");
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 100;
        fv::Stepper st(spec.problem, cfg);
        bool positive = true;
        while (st.time() < spec.t_end) {
            st.step(spec.t_end - st.time());
            for (const auto& q : st.primitives())
                positive = positive && q.rho > 0.0 && q.p > 0.0 &&
                           gas::internal_energy(q, g) > 0.0;
        }
        detail += positive ? "" : " 123-neg!";
        ok &= positive;
    }

    // blast wave completes with positive pressure; run in parallel with the
    // shock-density pair below
    auto blast_task = std::async(std::launch::async, [&]() {
        const auto& spec = cases::find_case("blast");
        fv::SchemeConfig cfg;
        cfg.order = 3;
        cfg.n_cells = 400;
        cfg.t_end = spec.t_end;
        const auto res = fv::run(spec.problem, cfg);
        bool good = res.t_final >= spec.t_end - 1e-10;
        for (const auto& q : res.prim)
            good = good && std::isfinite(q.rho) && std::isfinite(q.u) && q.p > 0.0;
        return good;
    });
    auto sd_run = [&](int order) {
        const auto& spec = cases::find_case("shockdensity");
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 400;
        cfg.t_end = spec.t_end;
        return fv::run(spec.problem, cfg);
    };
    auto sd2_task = std::async(std::launch::async, sd_run, 2);
    const auto sd3 = sd_run(3);
    const auto sd2 = sd2_task.get();
    double max2 = 0.0, max3 = 0.0, tv3 = 0.0;
    for (int i = 0; i < 400; ++i) {
        max2 = std::max(max2, sd2.prim[i].rho);
        max3 = std::max(max3, sd3.prim[i].rho);
        if (i > 0)
            tv3 += std::fabs(sd3.prim[i].rho - sd3.prim[i - 1].rho);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, " sd max_rho %.3f>%.3f tv=%.1f", max3, max2, tv3);
    detail += buf;
    ok &= max3 > max2 && tv3 < 40.0;
    const bool blast_ok = blast_task.get();
    detail += blast_ok ? " blast-ok" : " blast-FAILED";
    ok &= blast_ok;
    return ok;
}

// 7. conservation and rest-state equilibrium
static bool c7(std::string& detail) {
    bool ok = true;
    for (int order : {2, 3}) {
        const auto& spec = cases::find_case("smoothwave");
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 50;
        fv::Stepper st(spec.problem, cfg);
        const Vec3 t0v = st.totals();
        for (int s = 0; s < 1000; ++s)
            st.step();
        const Vec3 t1v = st.totals();
        double drift = 0.0;
        for (int k = 0; k < 3; ++k)
            drift = std::max(drift, std::fabs(t1v[k] - t0v[k]) / std::max(1.0, std::fabs(t0v[k])));
        ok &= drift <= 1e-12;
        char buf[48];
        std::snprintf(buf, sizeof buf, " drift_o%d=%.1e", order, drift);
        detail += buf;
    }
    for (int order : {2, 3}) {
        const auto& spec = cases::find_case("ductrest");
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 50;
        fv::Stepper st(spec.problem, cfg);
        double umax = 0.0;
        for (int s = 0; s < 100; ++s) {
            st.step();
            for (const auto& q : st.primitives())
                umax = std::max(umax, std::fabs(q.u));
        }
        ok &= umax <= 1e-11;
        char buf[48];
        std::snprintf(buf, sizeof buf, " |u|_o%d=%.1e", order, umax);
        detail += buf;
    }
    return ok;
}

// 8. nozzle steady states
static bool c8(std::string& detail) {
    bool ok = true;
    const GasModel g(1.4);
    double dev[2] = {0.0, 0.0};
    for (int order : {2, 3}) {
        const auto& spec = cases::find_case("nozzleA");
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 22;
        cfg.t_end = 15.5;
        const auto res = fv::run(spec.problem, cfg);
        // residual drop; the clamped final step (tiny dt) is excluded since
        // |dU|/dt there amplifies roundoff
        double r0 = 0.0, rmin = 1e300;
        for (std::size_t i = 1; i < res.diag.residual.size(); ++i) {
            if (i <= 20)
                r0 = std::max(r0, res.diag.residual[i]);
            if (res.diag.time[i] > 7.75 && res.diag.dt[i] >= 0.5 * res.diag.dt[i - 1])
                rmin = std::min(rmin, res.diag.residual[i]);
        }
        const double drop = r0 / std::max(rmin, 1e-300);
        // exit Mach and deviation from the analytic transonic profile
        const auto& qe = res.prim.back();
        const double M = qe.u / gas::sound_speed(qe, g);
        for (int i = 0; i < 22; ++i) {
            const auto ex = cases::nozzle_steady(res.grid.center(i),
                                                 cases::NozzleBranch::transonic, g);
            dev[order - 2] = std::max(dev[order - 2], std::fabs(res.prim[i].rho - ex.rho));
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, " A_o%d drop=%.0e M=%.3f", order, drop, M);
        detail += buf;
        ok &= drop >= 1e6 && std::fabs(M - 3.0) <= 0.09;
    }
    ok &= dev[1] < dev[0];
    char buf[64];
    std::snprintf(buf, sizeof buf, " dev3 %.4f < dev2 %.4f", dev[1], dev[0]);
    detail += buf;

    {
        const auto& spec = cases::find_case("nozzleB");
        fv::SchemeConfig cfg;
        cfg.order = 2;
        cfg.n_cells = 22;
        cfg.t_end = 2.5;
        const auto res = fv::run(spec.problem, cfg);
        double r0 = 0.0;
        for (std::size_t i = 1; i < std::min<std::size_t>(21, res.diag.residual.size()); ++i)
            r0 = std::max(r0, res.diag.residual[i]);
        // residual near t = 2.5 from unclamped steps
        double rend = 1e300;
        for (std::size_t i = 1; i < res.diag.residual.size(); ++i)
            if (res.diag.time[i] >= 2.2 && res.diag.dt[i] >= 0.5 * res.diag.dt[i - 1])
                rend = std::min(rend, res.diag.residual[i]);
        const double ratio = rend / r0;
        char b2[48];
        std::snprintf(b2, sizeof b2, " B ratio=%.1e", ratio);
        detail += b2;
        ok &= ratio <= std::pow(10.0, -1.5);
    }
    return ok;
}

// 9. mirror equivariance and smooth-data consistency
static bool c9(std::string& detail) {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const GasModel g(1.4);
    int done = 0;
    double worst = 0.0;
    while (done < 200) {
        solver::GRPInput in;
        in.gas = g;
        in.qL = random_state(rng);
        in.qR = random_state(rng);
        in.dqL = {unit(rng), unit(rng), unit(rng)};
        in.dqR = {unit(rng), unit(rng), unit(rng)};
        in.d2qL = Vec3{2.0 * unit(rng), 2.0 * unit(rng), 2.0 * unit(rng)};
        in.d2qR = Vec3{2.0 * unit(rng), 2.0 * unit(rng), 2.0 * unit(rng)};
        if (done % 3 == 0) {
            in.a0 = 0.5 * unit(rng);
            in.a1 = 0.5 * unit(rng);
        }
        solver::GRPSolution sol, msol;
        try {
            sol = solver::solve_qgrp(in, solver::Mode::exact);
            msol = solver::solve_qgrp(solver::mirror(in), solver::Mode::exact);
        } catch (const VacuumFormation&) {
            continue;
        }
        if (sol.sonic || msol.sonic)
            continue;
        ++done;
        const auto back = solver::unmirror(msol);
        const double s1 = std::max(1.0, norm_inf(sol.dtQ));
        worst = std::max(worst, norm_inf(back.dtQ - sol.dtQ) / s1);
        if (sol.dt2Q && back.dt2Q) {
            const double s2 = std::max(1.0, norm_inf(*sol.dt2Q));
            worst = std::max(worst, norm_inf(*back.dt2Q - *sol.dt2Q) / (100.0 * s2));
        }
    }
    bool ok = worst <= 1e-9;

    double worst_sm = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        solver::GRPInput in;
        in.gas = g;
        in.qL = in.qR = random_state(rng);
        in.dqL = in.dqR = Vec3{unit(rng), unit(rng), unit(rng)};
        in.d2qL = in.d2qR = Vec3{2.0 * unit(rng), 2.0 * unit(rng), 2.0 * unit(rng)};
        if (trial % 2 == 0) {
            in.a0 = 0.5 * unit(rng);
            in.a1 = 0.5 * unit(rng);
        }
        const auto sol = solver::solve_qgrp(in, solver::Mode::exact);
        const Vec3 expect = solver::time_deriv(in.qL, in.dqL, in.a0, g);
        const Vec3 expect2 = solver::time_deriv2(in.qL, in.dqL, *in.d2qL, in.a0, in.a1, g);
        worst_sm = std::max(worst_sm,
                            norm_inf(sol.dtQ - expect) / std::max(1.0, norm_inf(expect)));
        if (sol.dt2Q)
            worst_sm = std::max(worst_sm, norm_inf(*sol.dt2Q - expect2) /
                                              (100.0 * std::max(1.0, norm_inf(expect2))));
    }
    ok &= worst_sm <= 1e-12;
    char buf[96];
    std::snprintf(buf, sizeof buf, "mirror %.1e, smooth %.1e", worst, worst_sm);
    detail = buf;
    return ok;
}

int main() {
    criterion(1, "self-similarity", c1);
    criterion(2, "L/Q closed forms vs RK oracle", c2);
    criterion(3, "acoustic convergence table", c3);
    criterion(4, "pressure-jump convergence tables", c4);
    criterion(5, "sonic convergence table + newton", c5);
    criterion(6, "scheme benchmark suite", c6);
    criterion(7, "conservation and equilibrium", c7);
    criterion(8, "nozzle steady states", c8);
    criterion(9, "mirror and smooth-data invariants", c9);
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
