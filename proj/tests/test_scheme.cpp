#include <doctest.h>

#include "grpflow/cases.hpp"
#include "grpflow/scheme.hpp"

using namespace grpflow;
using gas::GasModel;
using gas::PrimitiveState;

TEST_SUITE_BEGIN("scheme");

TEST_CASE("uniform state is an exact equilibrium") {
    fv::Problem prob;
    prob.x_min = 0.0;
    prob.x_max = 1.0;
    prob.bc_left = prob.bc_right = fv::BCKind::periodic;
    prob.initial = [](double) -> PrimitiveState { return {1.3, 0.4, 2.1}; };
    fv::SchemeConfig cfg;
    cfg.n_cells = 16;
    for (int order : {2, 3}) {
        cfg.order = order;
        fv::Stepper st(prob, cfg);
        for (int s = 0; s < 5; ++s)
            st.step();
        for (const auto& q : st.primitives()) {
            CHECK(q.rho == doctest::Approx(1.3).epsilon(1e-14));
            CHECK(q.u == doctest::Approx(0.4).epsilon(1e-14));
            CHECK(q.p == doctest::Approx(2.1).epsilon(1e-14));
        }
    }
}

TEST_CASE("van leer reconstruction properties") {
    std::vector<Vec3> prim(7);
    for (int i = 0; i < 7; ++i)
        prim[i] = {2.0, 0.0, 1.0};  // constant
    auto poly = fv::reconstruct_muscl(prim, 2);
    CHECK(poly[3].c1[0] == 0.0);

    for (int i = 0; i < 7; ++i)
        prim[i] = {1.0 + 0.25 * i, 0.0, 1.0};  // linear: exact slope
    poly = fv::reconstruct_muscl(prim, 2);
    CHECK(poly[3].c1[0] == doctest::Approx(0.25).epsilon(1e-14));

    prim[3] = {3.0, 0.0, 1.0};  // local extremum: zero slope
    poly = fv::reconstruct_muscl(prim, 2);
    CHECK(poly[3].c1[0] == 0.0);
}

TEST_CASE("weno reconstruction: quadratic reproduction and smooth order") {
    const GasModel g(1.4);
    // quadratic conservative data is reproduced exactly by the subcell poly
    {
        const int n = 12, ng = 4;
        const double dx = 0.1;
        std::vector<Vec3> cons(n + 2 * ng);
        auto avg = [&](double a, double b) {
            // averages of 2 + 0.3 x + 0.1 x^2 and friends
            auto I = [](double x) { return 2.0 * x + 0.15 * x * x + 0.1 * x * x * x / 3.0; };
            return (I(b) - I(a)) / (b - a);
        };
        for (int i = 0; i < n + 2 * ng; ++i) {
            const double a = (i - ng) * dx, b = a + dx;
            const double v = avg(a, b);
            cons[i] = {v, 0.4 * v, 4.0 + 0.2 * v};
        }
        const auto poly = fv::reconstruct_weno3(cons, ng, g);
        for (int i = ng; i < ng + n; ++i) {
            const double xc = (i - ng) * dx + 0.5 * dx;
            const double exact = 2.0 + 0.3 * xc + 0.1 * xc * xc;
            const double got = poly[i].c0[0] + 0.5 * poly[i].c1[0] + 0.25 * poly[i].c2[0];
            const double exact_face = 2.0 + 0.3 * (xc + 0.5 * dx) + 0.1 * std::pow(xc + 0.5 * dx, 2);
            CHECK(got == doctest::Approx(exact_face).epsilon(1e-12));
            (void)exact;
        }
    }
    // interface values of a smooth sine converge at high order
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        const int ng = 4;
        const double dx = 2.0 / n;
        std::vector<Vec3> cons(n + 2 * ng);
        for (int i = 0; i < n + 2 * ng; ++i) {
            const double a = (i - ng) * dx, b = a + dx;
            const double ravg = 1.0 - 0.2 * (std::cos(M_PI * b) - std::cos(M_PI * a)) / (M_PI * dx);
            cons[i] = gas::to_vec(gas::prim_to_cons({ravg, 1.0, 1.0}, g));
        }
        const auto poly = fv::reconstruct_weno3(cons, ng, g);
        double emax = 0.0;
        for (int i = ng; i < ng + n; ++i) {
            const double xr = (i - ng + 1) * dx;
            const double got = poly[i].c0[0] + 0.5 * poly[i].c1[0] + 0.25 * poly[i].c2[0];
            emax = std::max(emax, std::fabs(got - (1.0 + 0.2 * std::sin(M_PI * xr))));
        }
        if (prev > 0.0)
            CHECK(std::log2(prev / emax) >= 4.5);
        prev = emax;
    }
}

TEST_CASE("compute_dt") {
    const GasModel g(1.4);
    std::vector<PrimitiveState> states = {{1.0, 0.0, 1.0}};
    const fv::Grid grid(0.0, 1.0, 10);
    const double dt = fv::compute_dt(states, grid, 0.5, g);
    CHECK(dt == doctest::Approx(0.05 / std::sqrt(1.4)).epsilon(1e-13));
    CHECK(fv::compute_dt(states, grid, 1.0, g) == doctest::Approx(2.0 * dt).epsilon(1e-13));
}

TEST_CASE("boundary fills") {
    fv::Problem prob;
    prob.x_min = 0.0;
    prob.x_max = 1.0;
    const fv::Grid grid(0.0, 1.0, 8);
    const int ng = 4;
    std::vector<Vec3> cons(8 + 2 * ng);
    const GasModel g(1.4);
    for (int i = 0; i < 8; ++i)
        cons[ng + i] = gas::to_vec(gas::prim_to_cons({1.0 + 0.1 * i, 0.3, 2.0}, g));

    prob.bc_left = prob.bc_right = fv::BCKind::transmissive;
    fv::apply_bc(cons, ng, prob, grid);
    CHECK(cons[0][0] == doctest::Approx(cons[ng][0]));
    CHECK(cons[ng + 8 + 2][0] == doctest::Approx(cons[ng + 7][0]));

    prob.bc_left = prob.bc_right = fv::BCKind::reflective;
    fv::apply_bc(cons, ng, prob, grid);
    CHECK(cons[ng - 1][0] == doctest::Approx(cons[ng][0]));
    CHECK(cons[ng - 1][1] == doctest::Approx(-cons[ng][1]));
    CHECK(cons[ng - 1][2] == doctest::Approx(cons[ng][2]));

    prob.bc_left = prob.bc_right = fv::BCKind::periodic;
    fv::apply_bc(cons, ng, prob, grid);
    CHECK(cons[ng - 1][0] == doctest::Approx(cons[ng + 7][0]));
    CHECK(cons[ng + 8][0] == doctest::Approx(cons[ng][0]));

    // supersonic exit: pure extrapolation
    for (int i = 0; i < 8; ++i)
        cons[ng + i] = gas::to_vec(gas::prim_to_cons({0.2, 3.0, 0.05}, g));
    prob.bc_left = fv::BCKind::transmissive;
    prob.bc_right = fv::BCKind::nozzle_outflow;
    prob.outflow_p = 0.4;
    fv::apply_bc(cons, ng, prob, grid);
    CHECK(cons[ng + 8][0] == doctest::Approx(cons[ng + 7][0]));
    CHECK(cons[ng + 8][1] == doctest::Approx(cons[ng + 7][1]));

    // subsonic exit imposes the back pressure
    for (int i = 0; i < 8; ++i)
        cons[ng + i] = gas::to_vec(gas::prim_to_cons({1.0, 0.3, 1.0}, g));
    fv::apply_bc(cons, ng, prob, grid);
    const PrimitiveState ghost = gas::cons_to_prim(
        {cons[ng + 8][0], cons[ng + 8][1], cons[ng + 8][2]}, g);
    CHECK(ghost.p == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("conservation on a planar periodic run") {
    const auto& spec = cases::find_case("smoothwave");
    for (int order : {2, 3}) {
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 50;
        fv::Stepper st(spec.problem, cfg);
        const Vec3 t0v = st.totals();
        for (int s = 0; s < 1000; ++s)
            st.step();
        const Vec3 t1v = st.totals();
        for (int k = 0; k < 3; ++k)
            CHECK(std::fabs(t1v[k] - t0v[k]) <= 1e-12 * std::max(1.0, std::fabs(t0v[k])));
    }
}

TEST_CASE("duct rest state stays at rest") {
    const auto& spec = cases::find_case("ductrest");
    for (int order : {2, 3}) {
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 50;
        fv::Stepper st(spec.problem, cfg);
        for (int s = 0; s < 100; ++s)
            st.step();
        for (const auto& q : st.primitives())
            CHECK(std::fabs(q.u) <= 1e-11);
    }
}

TEST_CASE("sod runs with snapshots") {
    const auto& spec = cases::find_case("sod");
    fv::SchemeConfig cfg;
    cfg.order = 2;
    cfg.n_cells = 50;
    cfg.t_end = 1.0;
    cfg.snapshot_times = {0.5};
    const auto res = fv::run(spec.problem, cfg);
    CHECK(res.t_final == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(res.snapshots.size() == 1);
    CHECK(res.snapshots[0].t == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(static_cast<int>(res.snapshots[0].prim.size()) == 50);
}

TEST_CASE("low-density double rarefaction keeps positivity") {
    const auto& spec = cases::find_case("problem123");
    for (int order : {2, 3}) {
        fv::SchemeConfig cfg;
        cfg.order = order;
        cfg.n_cells = 100;
        cfg.t_end = spec.t_end;
        fv::Stepper st(spec.problem, cfg);
        while (st.time() < cfg.t_end) {
            st.step(cfg.t_end - st.time());
            for (const auto& q : st.primitives()) {
                REQUIRE(q.rho > 0.0);
                REQUIRE(q.p > 0.0);
            }
        }
    }
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("scheme");

TEST_CASE("smooth grid-convergence orders") {
    const auto& spec = cases::find_case("smoothwave");
    for (int order : {2, 3}) {
        double prev = 0.0, measured = 0.0;
        for (int n : {25, 50, 100}) {
            fv::SchemeConfig cfg;
            cfg.order = order;
            cfg.n_cells = n;
            cfg.t_end = spec.t_end;
            const auto res = fv::run(spec.problem, cfg);
            double l1 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double a = res.grid.iface(i) - res.t_final;
                const double b = a + res.grid.dx;
                const double exact_avg =
                    1.0 - 0.2 * (std::cos(M_PI * b) - std::cos(M_PI * a)) / (M_PI * res.grid.dx);
                l1 += std::fabs(res.cons[i].rho - exact_avg) * res.grid.dx;
            }
            if (prev > 0.0)
                measured = std::log2(prev / l1);
            prev = l1;
        }
        CHECK(measured >= (order == 2 ? 1.8 : 2.5));
    }
}

TEST_SUITE_END();
