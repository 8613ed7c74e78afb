#include "grpflow/cases.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "grpflow/riemann.hpp"

namespace grpflow::cases {

solver::GRPInput CaseSpec::grp_input() const {
    if (!left_poly || !right_poly)
        throw Error("case '" + name + "' has no derivative data");
    solver::GRPInput in;
    in.gas = problem.gas;
    in.qL = left_poly->at(0.0);
    in.qR = right_poly->at(0.0);
    in.dqL = left_poly->d1(0.0);
    in.dqR = right_poly->d1(0.0);
    in.d2qL = left_poly->d2();
    in.d2qR = right_poly->d2();
    in.a0 = 0.0;
    in.a1 = 0.0;
    return in;
}

namespace {

constexpr double nozzle_a_in = 4.8643;
constexpr double nozzle_a_ex = 4.2346;
constexpr double nozzle_exit_p_a = 0.0272237;

CaseSpec make_solver_case(const std::string& name, double dp, double du, double t0) {
    CaseSpec c;
    c.name = name;
    c.category = Category::solver_accuracy;
    c.reference = ReferenceKind::fine_mesh;
    c.t0 = t0;
    c.t_end = t0;
    SidePoly L, R;
    L.c0 = {1.0, 0.03125 + du, 10.0 + 10.0 * dp};
    L.c1 = {0.56431, -1.024, -0.216};
    L.c2 = {2.62896, 1.92, 1.08};
    R.c0 = {1.0, 0.03125 + du, 10.0};
    R.c1 = {2.04204, -0.25, 0.0};
    R.c2 = {0.0, 0.75, 0.0};
    c.left_poly = L;
    c.right_poly = R;
    c.problem.x_min = -1.0;
    c.problem.x_max = 1.0;
    c.problem.gas = GasModel(1.4);
    c.problem.initial = [L, R](double x) { return x < 0.0 ? L.at(x) : R.at(x); };
    c.problem.bc_left = fv::BCKind::transmissive;
    c.problem.bc_right = fv::BCKind::transmissive;
    c.default_cells = 20000;
    return c;
}

gas::DuctGeometry nozzle_geometry() {
    auto area = [](double x) { return nozzle_area(x); };
    auto dlog = [](double x) {
        if (x < 0.25)
            return -2.0 * M_PI * std::log(nozzle_a_in) * std::sin(4.0 * M_PI * x);
        return 2.0 * M_PI / 3.0 * std::log(nozzle_a_ex) * std::sin(4.0 * M_PI * (1.0 - x) / 3.0);
    };
    auto ddlog = [](double x) {
        if (x < 0.25)
            return -8.0 * M_PI * M_PI * std::log(nozzle_a_in) * std::cos(4.0 * M_PI * x);
        return -8.0 * M_PI * M_PI / 9.0 * std::log(nozzle_a_ex) *
               std::cos(4.0 * M_PI * (1.0 - x) / 3.0);
    };
    return gas::DuctGeometry::from_closed_form(area, dlog, ddlog);
}

CaseSpec make_nozzle_case(const std::string& name, double pb) {
    CaseSpec c;
    c.name = name;
    c.category = Category::scheme;
    c.reference = ReferenceKind::steady;
    c.t_end = 15.5;
    c.default_cells = 22;
    c.problem.x_min = 0.0;
    c.problem.x_max = 1.0;
    c.problem.gas = GasModel(1.4);
    c.problem.geometry = nozzle_geometry();
    const double gam = 1.4;
    c.problem.initial = [pb, gam](double x) -> PrimitiveState {
        if (x < 0.25)
            return {1.0, 0.0, pb};
        return {std::pow(pb, 1.0 / gam), 0.0, pb};
    };
    c.problem.bc_left = fv::BCKind::nozzle_inflow;
    c.problem.bc_right = fv::BCKind::nozzle_outflow;
    c.problem.inflow_rho0 = 1.0;
    c.problem.inflow_p0 = 1.0;
    c.problem.outflow_p = pb;
    return c;
}

std::vector<CaseSpec> build_catalog() {
    std::vector<CaseSpec> out;

    out.push_back(make_solver_case("acoustic", 0.0, 0.0, 0.1));
    out.push_back(make_solver_case("dp0.01", 0.01, 0.0, 0.1));
    out.push_back(make_solver_case("dp0.1", 0.1, 0.0, 0.1));
    out.push_back(make_solver_case("dp1", 1.0, 0.0, 0.1));
    out.push_back(make_solver_case("dp10", 10.0, 0.0, 0.05));
    out.push_back(make_solver_case("dp100", 100.0, 0.0, 0.01));
    out.push_back(make_solver_case("dp1000", 1000.0, 0.0, 0.005));
    out.push_back(make_solver_case("sonic", 100.0, 28.0, 0.002));

    {
        CaseSpec c;
        c.name = "sod";
        c.reference = ReferenceKind::exact;
        c.t_end = 2.0;
        c.default_cells = 100;
        c.problem.x_min = -5.0;
        c.problem.x_max = 5.0;
        c.problem.initial = [](double x) -> PrimitiveState {
            return x < 0.0 ? PrimitiveState{1.0, 0.0, 1.0} : PrimitiveState{0.125, 0.0, 0.1};
        };
        out.push_back(c);
    }
    {
        // the low-density double-rarefaction test; left velocity sign corrected
        CaseSpec c;
        c.name = "problem123";
        c.reference = ReferenceKind::exact;
        c.t_end = 1.2;
        c.default_cells = 100;
        c.problem.x_min = -5.0;
        c.problem.x_max = 5.0;
        c.problem.initial = [](double x) -> PrimitiveState {
            return x < 0.0 ? PrimitiveState{1.0, -2.0, 0.4} : PrimitiveState{1.0, 2.0, 0.4};
        };
        out.push_back(c);
    }
    {
        CaseSpec c;
        c.name = "blast";
        c.reference = ReferenceKind::none;
        c.t_end = 3.8;
        c.default_cells = 400;
        c.problem.x_min = 0.0;
        c.problem.x_max = 100.0;
        c.problem.bc_left = fv::BCKind::reflective;
        c.problem.bc_right = fv::BCKind::reflective;
        c.problem.initial = [](double x) -> PrimitiveState {
            double p = 0.01;
            if (x < 10.0) p = 1000.0;
            else if (x >= 90.0) p = 100.0;
            return {1.0, 0.0, p};
        };
        out.push_back(c);
    }
    {
        CaseSpec c;
        c.name = "shockdensity";
        c.reference = ReferenceKind::none;
        c.t_end = 2.0;
        c.default_cells = 400;
        c.problem.x_min = 0.0;
        c.problem.x_max = 10.0;
        c.problem.initial = [](double x) -> PrimitiveState {
            if (x < 1.0)
                return {3.57134, 2.629369, 10.33333};
            return {1.0 + 0.2 * std::sin(5.0 * x), 0.0, 1.0};
        };
        out.push_back(c);
    }
    out.push_back(make_nozzle_case("nozzleA", nozzle_exit_p_a));
    out.push_back(make_nozzle_case("nozzleB", 0.4));
    {
        CaseSpec c;
        c.name = "smoothwave";
        c.reference = ReferenceKind::exact;
        c.t_end = 2.0;
        c.default_cells = 100;
        c.problem.x_min = 0.0;
        c.problem.x_max = 2.0;
        c.problem.bc_left = fv::BCKind::periodic;
        c.problem.bc_right = fv::BCKind::periodic;
        c.problem.initial = [](double x) -> PrimitiveState {
            return {1.0 + 0.2 * std::sin(M_PI * x), 1.0, 1.0};
        };
        out.push_back(c);
    }
    {
        CaseSpec c;
        c.name = "ductrest";
        c.reference = ReferenceKind::none;
        c.t_end = 1.0;
        c.default_cells = 50;
        c.problem.x_min = 0.0;
        c.problem.x_max = 1.0;
        c.problem.geometry = nozzle_geometry();
        c.problem.initial = [](double) -> PrimitiveState { return {1.0, 0.0, 1.0}; };
        out.push_back(c);
    }
    return out;
}

} // namespace

const std::vector<CaseSpec>& catalog() {
    static const std::vector<CaseSpec> cat = build_catalog();
    return cat;
}

const CaseSpec& find_case(const std::string& name) {
    for (const auto& c : catalog())
        if (c.name == name)
            return c;
    throw Error("unknown case '" + name + "'");
}

PrimitiveState sod_exact(double x, double t, const GasModel& g) {
    static const riemann::RiemannFan fan =
        riemann::solve({1.0, 0.0, 1.0}, {0.125, 0.0, 0.1}, GasModel(1.4));
    (void)g;
    if (t <= 0.0)
        return x < 0.0 ? fan.left : fan.right;
    return riemann::sample(fan, x / t);
}

double nozzle_area(double x) {
    if (x < 0.25)
        return nozzle_a_in * std::exp(-std::log(nozzle_a_in) * std::pow(std::sin(2.0 * M_PI * x), 2));
    return nozzle_a_ex *
           std::exp(-std::log(nozzle_a_ex) * std::pow(std::sin(2.0 * M_PI * (1.0 - x) / 3.0), 2));
}

double nozzle_mach(double area, NozzleBranch branch, const GasModel& g) {
    const double gam = g.gamma;
    const double A2 = area * area;
    auto f = [&](double M) {
        const double t = 2.0 / (gam + 1.0) * (1.0 + 0.5 * (gam - 1.0) * M * M);
        return std::pow(t, (gam + 1.0) / (gam - 1.0)) / (M * M) - A2;
    };
    if (area < 1.0 - 1e-12)
        throw NoRoot("area below the sonic throat value");
    double lo, hi;
    if (branch == NozzleBranch::subsonic) {
        lo = 1e-8;
        hi = 1.0;
    } else {
        lo = 1.0;
        hi = 2.0;
        while (f(hi) < 0.0) {
            hi *= 2.0;
            if (hi > 1e6)
                throw NoRoot("no supersonic root");
        }
    }
    // f decreases in M on (0,1] and increases on [1, inf)
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        const bool go_right = branch == NozzleBranch::subsonic ? fm > 0.0 : fm < 0.0;
        (go_right ? lo : hi) = mid;
        if (hi - lo < 1e-13 * std::max(1.0, hi))
            break;
    }
    return 0.5 * (lo + hi);
}

PrimitiveState nozzle_steady(double x, NozzleBranch branch, const GasModel& g) {
    NozzleBranch b = branch;
    if (branch == NozzleBranch::transonic)
        b = x < 0.25 ? NozzleBranch::subsonic : NozzleBranch::supersonic;
    const double M = nozzle_mach(nozzle_area(x), b, g);
    const double gam = g.gamma;
    const double t = 1.0 + 0.5 * (gam - 1.0) * M * M;
    const double p = std::pow(t, -gam / (gam - 1.0));
    const double rho = std::pow(t, -1.0 / (gam - 1.0));
    const double u = M * std::sqrt(gam * p / rho);
    return {rho, u, p};
}

PrimitiveState ReferenceSeries::eval(double t) const {
    if (times.empty())
        throw Error("empty reference series");
    if (t <= times.front())
        return {states.front()[0], states.front()[1], states.front()[2]};
    if (t >= times.back())
        return {states.back()[0], states.back()[1], states.back()[2]};
    std::size_t lo = 0, hi = times.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (times[mid] <= t ? lo : hi) = mid;
    }
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    const Vec3 v = (1.0 - w) * states[lo] + w * states[hi];
    return {v[0], v[1], v[2]};
}

ReferenceSeries godunov_reference(const CaseSpec& spec, int n_cells, double t_max) {
    const GasModel g = spec.problem.gas;
    const double dx = (spec.problem.x_max - spec.problem.x_min) / n_cells;

    // only the domain of dependence of x = 0 matters; keep the prescribed cell
    // size but drop cells that cannot influence the axis before t_max
    double smax0 = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double x = spec.problem.x_min +
                         (spec.problem.x_max - spec.problem.x_min) * i / 400.0;
        const PrimitiveState q = spec.problem.initial(x);
        smax0 = std::max(smax0, std::fabs(q.u) + gas::sound_speed(q, g));
    }
    const double reach = 1.3 * smax0 * t_max + 0.02;
    int n_half = static_cast<int>(std::ceil(reach / dx)) + 8;
    n_half = std::min(n_half, n_cells / 2);
    const int n = 2 * n_half;
    const int mid = n_half;  // interface index of x = 0
    auto xl_of = [&](int i) { return -n_half * dx + i * dx; };

    std::vector<Vec3> U(n);
    for (int i = 0; i < n; ++i) {
        // Simpson's rule: the piecewise data are quadratics away from x = 0
        const double a = xl_of(i), b = xl_of(i + 1);
        const Vec3 va = gas::to_vec(gas::prim_to_cons(spec.problem.initial(a + 1e-14), g));
        const Vec3 vm = gas::to_vec(gas::prim_to_cons(spec.problem.initial(0.5 * (a + b)), g));
        const Vec3 vb = gas::to_vec(gas::prim_to_cons(spec.problem.initial(b - 1e-14), g));
        U[i] = (1.0 / 6.0) * (va + 4.0 * vm + vb);
    }

    ReferenceSeries ref;
    ref.case_name = spec.name;
    ref.n_cells = n_cells;
    ref.gamma = g.gamma;
    ref.correction_window = spec.t0 > 0.0 ? spec.t0 / 20.0 : 0.0;

    auto prim_of = [&](const Vec3& v) { return gas::cons_to_prim({v[0], v[1], v[2]}, g); };

    // t = 0 anchor: the associated Riemann solution on the t-axis
    const riemann::RiemannFan fan0 =
        riemann::solve(spec.problem.initial(-1e-14), spec.problem.initial(1e-14), g);
    const PrimitiveState anchor = riemann::sample(fan0, 0.0);
    ref.times.push_back(0.0);
    ref.states.push_back(gas::to_vec(anchor));

    // MUSCL-Hancock with the exact-Riemann Godunov flux; the axis value of the
    // sonic case is interpolated from cells clear of the stationary sonic-point
    // defect of Godunov-flux schemes
    const bool offcore = spec.name == "sonic";

    std::vector<PrimitiveState> prim(n), faceL(n), faceR(n);
    std::vector<Vec3> F(n + 1);
    double t = 0.0;
    const double cfl = 0.9;
    while (t < t_max) {
        double smax = 0.0;
        for (int i = 0; i < n; ++i) {
            prim[i] = prim_of(U[i]);
            smax = std::max(smax, std::fabs(prim[i].u) + gas::sound_speed(prim[i], g));
        }
        double dt = cfl * dx / smax;
        if (t + dt > t_max)
            dt = t_max - t + 1e-15;

        auto predict = [&](int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                Vec3 slope{};
                if (i > 0 && i < n - 1) {
                    const Vec3 dm = gas::to_vec(prim[i]) - gas::to_vec(prim[i - 1]);
                    const Vec3 dp = gas::to_vec(prim[i + 1]) - gas::to_vec(prim[i]);
                    for (int k = 0; k < 3; ++k) {
                        const double ab = dm[k] * dp[k];
                        slope[k] = ab > 0.0 ? 2.0 * ab / (dm[k] + dp[k]) : 0.0;
                    }
                }
                const Vec3 qc = gas::to_vec(prim[i]);
                Vec3 ql = qc - 0.5 * slope, qr = qc + 0.5 * slope;
                bool ok = ql[0] > gas::vacuum_floor && ql[2] > gas::vacuum_floor &&
                          qr[0] > gas::vacuum_floor && qr[2] > gas::vacuum_floor;
                if (ok) {
                    const Vec3 fl = gas::flux(gas::from_vec(ql), g);
                    const Vec3 fr = gas::flux(gas::from_vec(qr), g);
                    const Vec3 dU = (0.5 * dt / dx) * (fl - fr);
                    const Vec3 Ul = gas::to_vec(gas::prim_to_cons(gas::from_vec(ql), g)) + dU;
                    const Vec3 Ur = gas::to_vec(gas::prim_to_cons(gas::from_vec(qr), g)) + dU;
                    try {
                        faceL[i] = gas::cons_to_prim({Ul[0], Ul[1], Ul[2]}, g);
                        faceR[i] = gas::cons_to_prim({Ur[0], Ur[1], Ur[2]}, g);
                    } catch (const NonPhysicalState&) {
                        ok = false;
                    }
                }
                if (!ok)
                    faceL[i] = faceR[i] = prim[i];
            }
        };
        auto fluxes = [&](int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                const PrimitiveState& ql = faceR[i - 1];
                const PrimitiveState& qr = faceL[i];
                if (std::fabs(ql.rho - qr.rho) < 1e-15 && std::fabs(ql.u - qr.u) < 1e-15 &&
                    std::fabs(ql.p - qr.p) < 1e-15) {
                    F[i] = gas::flux(ql, g);
                } else {
                    const riemann::RiemannFan f = riemann::solve(ql, qr, g);
                    F[i] = gas::flux(riemann::sample(f, 0.0), g);
                }
            }
        };
        {
            std::thread th(predict, 0, n / 2);
            predict(n / 2, n);
            th.join();
        }
        {
            std::thread th(fluxes, 1, n / 2);
            fluxes(n / 2, n);
            th.join();
        }
        F[0] = F[1];
        F[n] = F[n - 1];

        PrimitiveState q_axis{};
        if (offcore) {
            // quintic through cell values at +-(6.5, 9.5, 12.5) dx
            const int off[3] = {6, 9, 12};
            double nodes[6];
            Vec3 vals[6];
            for (int k = 0; k < 3; ++k) {
                nodes[k] = -(off[2 - k] + 0.5) * dx;
                vals[k] = gas::to_vec(prim[mid - 1 - off[2 - k]]);
                nodes[3 + k] = (off[k] + 0.5) * dx;
                vals[3 + k] = gas::to_vec(prim[mid + off[k]]);
            }
            Vec3 acc{};
            for (int a = 0; a < 6; ++a) {
                double L = 1.0;
                for (int b = 0; b < 6; ++b)
                    if (b != a)
                        L *= (0.0 - nodes[b]) / (nodes[a] - nodes[b]);
                acc = acc + L * vals[a];
            }
            q_axis = gas::from_vec(acc);
        } else {
            const riemann::RiemannFan f = riemann::solve(faceR[mid - 1], faceL[mid], g);
            q_axis = riemann::sample(f, 0.0);
        }

        for (int i = 0; i < n; ++i)
            U[i] = U[i] - (dt / dx) * (F[i + 1] - F[i]);
        t += dt;
        ref.times.push_back(t);
        ref.states.push_back(gas::to_vec(q_axis));
    }

    // early-time correction: cubic through the exact anchor and samples in
    // [w, 2w], replacing the oscillatory initial transient
    const double w = ref.correction_window;
    if (w > 0.0 && ref.times.back() > 2.0 * w) {
        const double tn[3] = {w, 1.5 * w, 2.0 * w};
        Vec3 vn[3];
        for (int k = 0; k < 3; ++k)
            vn[k] = gas::to_vec(ref.eval(tn[k]));
        for (std::size_t i = 1; i < ref.times.size(); ++i) {
            const double tt = ref.times[i];
            if (tt >= w)
                break;
            // cubic Lagrange through (0, anchor), (tn, vn)
            Vec3 val{};
            const double nodes[4] = {0.0, tn[0], tn[1], tn[2]};
            const Vec3 vals[4] = {gas::to_vec(anchor), vn[0], vn[1], vn[2]};
            for (int a = 0; a < 4; ++a) {
                double L = 1.0;
                for (int b = 0; b < 4; ++b)
                    if (b != a)
                        L *= (tt - nodes[b]) / (nodes[a] - nodes[b]);
                val = val + L * vals[a];
            }
            ref.states[i] = val;
        }
    }
    return ref;
}

void save_reference(const ReferenceSeries& ref, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    char buf[256];
    out << "# grpflow reference v1\n";
    std::snprintf(buf, sizeof buf, "# case=%s cells=%d gamma=%.17g window=%.17g\n",
                  ref.case_name.c_str(), ref.n_cells, ref.gamma, ref.correction_window);
    out << buf;
    out << "t,rho,u,p\n";
    for (std::size_t i = 0; i < ref.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", ref.times[i],
                      ref.states[i][0], ref.states[i][1], ref.states[i][2]);
        out << buf;
    }
}

std::optional<ReferenceSeries> load_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# grpflow reference", 0) != 0)
        return std::nullopt;
    ReferenceSeries ref;
    if (!std::getline(in, line))
        return std::nullopt;
    {
        char name[128] = {0};
        if (std::sscanf(line.c_str(), "# case=%127s cells=%d gamma=%lg window=%lg", name,
                        &ref.n_cells, &ref.gamma, &ref.correction_window) != 4)
            return std::nullopt;
        ref.case_name = name;
    }
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        double t, r, u, p;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg", &t, &r, &u, &p) == 4) {
            ref.times.push_back(t);
            ref.states.push_back({r, u, p});
        }
    }
    if (ref.times.empty())
        return std::nullopt;
    return ref;
}

LQOracleValues rk_lq_oracle(const fan::FanSetup& setup, const fan::HeadDerivs& head,
                            const std::vector<double>& beta_grid, double tol) {
    const GasModel& g = setup.gas;
    const double gam = g.gamma;
    const gas::Invariants inv = gas::riemann_invariants(setup.qL, g);
    const double psiL = inv.psi, SL = inv.S;
    const double a0 = setup.a0, a1 = setup.a1;

    struct Y {
        double dS, dpsi, d2S, d2psi;
    };

    auto rhs = [&](double b, const Y& y) -> Y {
        const double s = psiL - b;
        const double c = (gam - 1.0) * s / (gam + 1.0);
        const double u = b + c;
        const double rho = std::pow(c * c / (gam * SL), 1.0 / (gam - 1.0));
        const PrimitiveState q{rho, u, SL * std::pow(rho, gam)};

        const Mat2 B = gas::wminus_matrix(q, g);
        Mat2 M;  // b I - B
        M[0][0] = b - B[0][0];
        M[0][1] = -B[0][1];
        M[1][0] = -B[1][0];
        M[1][1] = b - B[1][1];
        const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
        Mat2 Minv;
        Minv[0][0] = M[1][1] / det;
        Minv[0][1] = -M[0][1] / det;
        Minv[1][0] = -M[1][0] / det;
        Minv[1][1] = M[0][0] / det;

        const Vec2 Hm = gas::wminus_source(a0, q, g);
        const Vec2 dw = {y.dS, y.dpsi};
        const Vec2 L_rhs = mul(Minv, dw - Hm);

        // transversal relation for phi and the primitive material derivatives
        const double dphi = a0 * c * u - (1.0 / (gam * (gam - 1.0))) * (c / SL) * y.dS;
        const double du = 0.5 * (y.dpsi + dphi);
        const double dc = 0.25 * (gam - 1.0) * (y.dpsi - dphi);
        const double drho = rho * (2.0 * dc / ((gam - 1.0) * c) - y.dS / ((gam - 1.0) * SL));
        const double dp = c * c * drho + std::pow(rho, gam) * y.dS;
        const double dlam = du - dc;

        const Mat2 dB = gas::d_wminus_matrix(q, {drho, du, dp}, g);
        Mat2 DM;
        DM[0][0] = dlam - dB[0][0];
        DM[0][1] = -dB[0][1];
        DM[1][0] = -dB[1][0];
        DM[1][1] = dlam - dB[1][1];
        const Mat2 DMinv = -1.0 * mul(mul(Minv, DM), Minv);

        const Vec2 DHm = {0.0, -(b * a1 * c * u + a0 * (dc * u + c * du))};

        // d/dbeta of D lambda, assembled from the L-equation right-hand sides
        const double cp = -(gam - 1.0) / (gam + 1.0);  // dc/dbeta
        const double up = 2.0 / (gam + 1.0);           // du/dbeta
        const double dbeta_dphi = a0 * (cp * u + c * up)
                                - (1.0 / (gam * (gam - 1.0) * SL)) * (cp * y.dS + c * L_rhs[0]);
        const double ddb = 0.25 * (3.0 - gam) * L_rhs[1] + 0.25 * (1.0 + gam) * dbeta_dphi;

        const Vec2 d2w = {y.d2S, y.d2psi};
        const Vec2 Q_rhs = 2.0 * mul(Minv, d2w) + 2.0 * mul(DMinv, dw)
                         - 2.0 * (mul(DMinv, Hm) + mul(Minv, DHm)) + ddb * mul(Minv, dw - Hm);
        return {L_rhs[0], L_rhs[1], Q_rhs[0], Q_rhs[1]};
    };

    auto axpy = [](const Y& y, double h, const Y& k) -> Y {
        return {y.dS + h * k.dS, y.dpsi + h * k.dpsi, y.d2S + h * k.d2S, y.d2psi + h * k.d2psi};
    };

    LQOracleValues out;
    Y y = {head.dS, head.dpsi, head.d2S, head.d2psi};
    double b = setup.beta_L;
    for (double target : beta_grid) {
        if (target < setup.beta_L - 1e-12 || target > setup.beta_R + 1e-9)
            throw OutOfFan("oracle target beta outside the fan");
        double h = (target - b) / 4.0;
        int guard = 0;
        while (std::fabs(target - b) > 1e-14 * std::max(1.0, std::fabs(target))) {
            if ((h > 0 && b + h > target) || (h < 0 && b + h < target) || h == 0.0)
                h = target - b;
            const Y k1 = rhs(b, y);
            const Y k2 = rhs(b + 0.5 * h, axpy(y, 0.5 * h, k1));
            const Y k3 = rhs(b + 0.5 * h, axpy(y, 0.5 * h, k2));
            const Y k4 = rhs(b + h, axpy(y, h, k3));
            Y full = y;
            full.dS += h / 6.0 * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
            full.dpsi += h / 6.0 * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi);
            full.d2S += h / 6.0 * (k1.d2S + 2.0 * k2.d2S + 2.0 * k3.d2S + k4.d2S);
            full.d2psi += h / 6.0 * (k1.d2psi + 2.0 * k2.d2psi + 2.0 * k3.d2psi + k4.d2psi);
            // step doubling error control
            const double h2 = 0.5 * h;
            Y half = y;
            for (int rep = 0; rep < 2; ++rep) {
                const Y K1 = rhs(b + rep * h2, half);
                const Y K2 = rhs(b + rep * h2 + 0.5 * h2, axpy(half, 0.5 * h2, K1));
                const Y K3 = rhs(b + rep * h2 + 0.5 * h2, axpy(half, 0.5 * h2, K2));
                const Y K4 = rhs(b + rep * h2 + h2, axpy(half, h2, K3));
                half.dS += h2 / 6.0 * (K1.dS + 2.0 * K2.dS + 2.0 * K3.dS + K4.dS);
                half.dpsi += h2 / 6.0 * (K1.dpsi + 2.0 * K2.dpsi + 2.0 * K3.dpsi + K4.dpsi);
                half.d2S += h2 / 6.0 * (K1.d2S + 2.0 * K2.d2S + 2.0 * K3.d2S + K4.d2S);
                half.d2psi += h2 / 6.0 * (K1.d2psi + 2.0 * K2.d2psi + 2.0 * K3.d2psi + K4.d2psi);
            }
            const double err = std::max(
                std::max(std::fabs(full.dS - half.dS), std::fabs(full.dpsi - half.dpsi)),
                std::max(std::fabs(full.d2S - half.d2S), std::fabs(full.d2psi - half.d2psi)));
            const double scale = tol * std::max({1.0, std::fabs(half.dS), std::fabs(half.dpsi),
                                                 std::fabs(half.d2S), std::fabs(half.d2psi)});
            if (err <= scale) {
                b += h;
                y = half;  // the more accurate value
                h *= err > 0.0 ? std::min(2.0, 0.9 * std::pow(scale / err, 0.2)) : 2.0;
            } else {
                h *= std::max(0.2, 0.9 * std::pow(scale / err, 0.2));
            }
            if (++guard > 200000)
                throw StiffnessFailure("oracle integration stalled");
        }
        out.beta.push_back(target);
        out.dw.push_back({y.dS, y.dpsi});
        out.d2w.push_back({y.d2S, y.d2psi});
    }
    return out;
}

TimeDerivEstimate fd_time_derivs(const ReferenceSeries& series, double h) {
    TimeDerivEstimate est;
    auto sample = [&](double t) { return gas::to_vec(series.eval(t)); };
    auto d1 = [&](double hh) {
        return (1.0 / (2.0 * hh)) *
               ((-3.0) * sample(0.0) + 4.0 * sample(hh) - sample(2.0 * hh));
    };
    auto d2 = [&](double hh) {
        return (1.0 / (hh * hh)) * (2.0 * sample(0.0) - 5.0 * sample(hh) +
                                    4.0 * sample(2.0 * hh) - sample(3.0 * hh));
    };
    const Vec3 a1 = d1(h), b1 = d1(0.5 * h);
    const Vec3 a2 = d2(h), b2 = d2(0.5 * h);
    est.dtQ = (1.0 / 3.0) * (4.0 * b1 - a1);
    est.dt2Q = (1.0 / 3.0) * (4.0 * b2 - a2);
    for (int k = 0; k < 3; ++k) {
        est.err1[k] = std::fabs(b1[k] - a1[k]);
        est.err2[k] = std::fabs(b2[k] - a2[k]);
    }
    return est;
}

} // namespace grpflow::cases
