#include "grpflow/scheme.hpp"

#include <algorithm>
#include <cmath>

namespace grpflow::fv {

namespace {

double van_leer(double a, double b) {
    const double ab = a * b;
    if (ab <= 0.0)
        return 0.0;
    return 2.0 * ab / (a + b);
}

// scalar WENO5 value at the right interface of the centered cell
double weno5_right(double m2, double m1, double c0, double p1, double p2) {
    const double q0 = (2.0 * m2 - 7.0 * m1 + 11.0 * c0) / 6.0;
    const double q1 = (-m1 + 5.0 * c0 + 2.0 * p1) / 6.0;
    const double q2 = (2.0 * c0 + 5.0 * p1 - p2) / 6.0;
    const double b0 = 13.0 / 12.0 * (m2 - 2.0 * m1 + c0) * (m2 - 2.0 * m1 + c0) +
                      0.25 * (m2 - 4.0 * m1 + 3.0 * c0) * (m2 - 4.0 * m1 + 3.0 * c0);
    const double b1 = 13.0 / 12.0 * (m1 - 2.0 * c0 + p1) * (m1 - 2.0 * c0 + p1) +
                      0.25 * (m1 - p1) * (m1 - p1);
    const double b2 = 13.0 / 12.0 * (c0 - 2.0 * p1 + p2) * (c0 - 2.0 * p1 + p2) +
                      0.25 * (3.0 * c0 - 4.0 * p1 + p2) * (3.0 * c0 - 4.0 * p1 + p2);
    const double eps = 1e-6;
    double w0 = 0.1 / ((eps + b0) * (eps + b0));
    double w1 = 0.6 / ((eps + b1) * (eps + b1));
    double w2 = 0.3 / ((eps + b2) * (eps + b2));
    const double ws = w0 + w1 + w2;
    return (w0 * q0 + w1 * q1 + w2 * q2) / ws;
}

// conservative-variable eigenvectors at an arithmetic-average state
struct CharBasis {
    Vec3 left[3], right[3];
};

CharBasis char_basis(const Vec3& Ua, const Vec3& Ub, const GasModel& g) {
    const Vec3 Um = 0.5 * (Ua + Ub);
    const double rho = Um[0];
    const double u = Um[1] / rho;
    const double p = (g.gamma - 1.0) * (Um[2] - 0.5 * Um[1] * u);
    const double c = std::sqrt(g.gamma * std::max(p, 1e-300) / rho);
    const double H = (Um[2] + p) / rho;
    const double b1 = (g.gamma - 1.0) / (c * c);
    const double b2 = 0.5 * b1 * u * u;
    CharBasis cb;
    cb.right[0] = {1.0, u - c, H - u * c};
    cb.right[1] = {1.0, u, 0.5 * u * u};
    cb.right[2] = {1.0, u + c, H + u * c};
    cb.left[0] = {0.5 * (b2 + u / c), -0.5 * (b1 * u + 1.0 / c), 0.5 * b1};
    cb.left[1] = {1.0 - b2, b1 * u, -b1};
    cb.left[2] = {0.5 * (b2 - u / c), -0.5 * (b1 * u - 1.0 / c), 0.5 * b1};
    return cb;
}

} // namespace

std::vector<CellPoly> reconstruct_muscl(const std::vector<Vec3>& prim, int ng) {
    const int total = static_cast<int>(prim.size());
    std::vector<CellPoly> poly(total);
    for (int i = 1; i + 1 < total; ++i) {
        poly[i].c0 = prim[i];
        for (int k = 0; k < 3; ++k)
            poly[i].c1[k] = van_leer(prim[i][k] - prim[i - 1][k], prim[i + 1][k] - prim[i][k]);
    }
    (void)ng;
    return poly;
}

std::vector<CellPoly> reconstruct_weno3(const std::vector<Vec3>& cons, int ng, const GasModel& g) {
    const int total = static_cast<int>(cons.size());
    std::vector<CellPoly> poly(total);
    // interface point values from both sides, characteristic-wise
    std::vector<Vec3> vminus(total + 1), vplus(total + 1);  // at interface i (left cell i-1)
    for (int i = ng - 1; i <= total - ng + 1; ++i) {
        // interface between cells i-1 and i
        const CharBasis cb = char_basis(cons[i - 1], cons[i], g);
        double wm[3][5], wp[3][5];
        for (int k = 0; k < 3; ++k) {
            for (int s = 0; s < 5; ++s) {
                wm[k][s] = dot(cb.left[k], cons[i - 3 + s]);
                wp[k][s] = dot(cb.left[k], cons[i + 2 - s]);
            }
        }
        Vec3 vm{}, vp{};
        for (int k = 0; k < 3; ++k) {
            const double am = weno5_right(wm[k][0], wm[k][1], wm[k][2], wm[k][3], wm[k][4]);
            const double ap = weno5_right(wp[k][0], wp[k][1], wp[k][2], wp[k][3], wp[k][4]);
            vm = vm + am * cb.right[k];
            vp = vp + ap * cb.right[k];
        }
        vminus[i] = vm;
        vplus[i] = vp;
    }
    for (int i = ng - 1; i <= total - ng; ++i) {
        const Vec3& vl = vplus[i];       // value at the left face, from inside cell i
        const Vec3& vr = vminus[i + 1];  // value at the right face, from inside cell i
        for (int k = 0; k < 3; ++k) {
            const double cc = 3.0 * (vl[k] + vr[k]) - 6.0 * cons[i][k];
            poly[i].c2[k] = cc;
            poly[i].c1[k] = vr[k] - vl[k];
            poly[i].c0[k] = cons[i][k] - cc / 12.0;
        }

        // scale toward the cell average until density and pressure stay
        // positive at the faces and the interior extremum
        auto positive = [&](const CellPoly& P) {
            double chk[3] = {-0.5, 0.5, 0.0};
            int nchk = 2;
            if (std::fabs(P.c2[0]) > 0.0) {
                const double xe = -P.c1[0] / (2.0 * P.c2[0]);
                if (xe > -0.5 && xe < 0.5)
                    chk[nchk++] = xe;
            }
            for (int c = 0; c < nchk; ++c) {
                const double xi = chk[c];
                Vec3 v;
                for (int k = 0; k < 3; ++k)
                    v[k] = P.c0[k] + P.c1[k] * xi + P.c2[k] * xi * xi;
                if (!(v[0] > 1e-10))
                    return false;
                const double pr = (g.gamma - 1.0) * (v[2] - 0.5 * v[1] * v[1] / v[0]);
                if (!(pr > 1e-10))
                    return false;
            }
            return true;
        };
        if (!positive(poly[i])) {
            for (const double theta : {0.5, 0.25, 0.0}) {
                CellPoly scaled;
                for (int k = 0; k < 3; ++k) {
                    scaled.c1[k] = theta * poly[i].c1[k];
                    scaled.c2[k] = theta * poly[i].c2[k];
                    scaled.c0[k] = cons[i][k] - scaled.c2[k] / 12.0;
                }
                if (theta == 0.0 || positive(scaled)) {
                    poly[i] = scaled;
                    break;
                }
            }
        }
    }
    return poly;
}

double compute_dt(const std::vector<PrimitiveState>& states, const Grid& grid, double cfl,
                  const GasModel& g) {
    double smax = 0.0;
    for (const auto& q : states)
        smax = std::max(smax, std::fabs(q.u) + gas::sound_speed(q, g));
    return cfl * grid.dx / smax;
}

void apply_bc(std::vector<Vec3>& cons, int ng, const Problem& prob, const Grid& grid) {
    const int n = grid.n_cells;
    const GasModel& g = prob.gas;
    auto set = [&](int i, const Vec3& v) { cons[i] = v; };

    auto fill_side = [&](bool left_side, BCKind kind) {
        const int edge = left_side ? ng : ng + n - 1;
        for (int k = 1; k <= ng; ++k) {
            const int ghost = left_side ? ng - k : ng + n - 1 + k;
            switch (kind) {
                case BCKind::transmissive:
                    set(ghost, cons[edge]);
                    break;
                case BCKind::reflective: {
                    const int src = left_side ? ng + k - 1 : ng + n - k;
                    Vec3 v = cons[src];
                    v[1] = -v[1];
                    set(ghost, v);
                    break;
                }
                case BCKind::periodic: {
                    const int src = left_side ? ng + n - k : ng + k - 1;
                    set(ghost, cons[src]);
                    break;
                }
                case BCKind::nozzle_inflow: {
                    // stagnation reservoir feeding the duct; the outgoing
                    // invariant phi = u - 2c/(gamma-1) is taken from the interior
                    const PrimitiveState qi = gas::cons_to_prim(
                        {cons[edge][0], cons[edge][1], cons[edge][2]}, g);
                    const double gm1 = g.gamma - 1.0;
                    const double c0sq = g.gamma * prob.inflow_p0 / prob.inflow_rho0;
                    const double S0 = prob.inflow_p0 * std::pow(prob.inflow_rho0, -g.gamma);
                    const double phi = qi.u - 2.0 * gas::sound_speed(qi, g) / gm1;
                    // u = phi + 2c/gm1 with u^2/2 + c^2/gm1 = c0^2/gm1
                    const double A2 = 0.5 * (2.0 / gm1) * (2.0 / gm1) + 1.0 / gm1;
                    const double B2 = phi * 2.0 / gm1;
                    const double C2 = 0.5 * phi * phi - c0sq / gm1;
                    const double disc = B2 * B2 - 4.0 * A2 * C2;
                    const double c = disc > 0.0 ? (-B2 + std::sqrt(disc)) / (2.0 * A2) : 0.0;
                    const double u = phi + 2.0 * c / gm1;
                    const double rho = std::pow(c * c / (g.gamma * S0), 1.0 / gm1);
                    const double p = S0 * std::pow(rho, g.gamma);
                    set(ghost, gas::to_vec(gas::prim_to_cons({rho, u, p}, g)));
                    break;
                }
                case BCKind::nozzle_outflow: {
                    const PrimitiveState qi = gas::cons_to_prim(
                        {cons[edge][0], cons[edge][1], cons[edge][2]}, g);
                    const double c = gas::sound_speed(qi, g);
                    if (std::fabs(qi.u) >= c) {
                        set(ghost, cons[edge]);  // supersonic: full extrapolation
                    } else {
                        const double gm1 = g.gamma - 1.0;
                        const double S = qi.p * std::pow(qi.rho, -g.gamma);
                        const double psi = qi.u + 2.0 * c / gm1;
                        const double pb = prob.outflow_p;
                        const double rho = std::pow(pb / S, 1.0 / g.gamma);
                        const double cb = std::sqrt(g.gamma * pb / rho);
                        const double u = psi - 2.0 * cb / gm1;
                        set(ghost, gas::to_vec(gas::prim_to_cons({rho, u, pb}, g)));
                    }
                    break;
                }
            }
        }
    };
    fill_side(true, prob.bc_left);
    fill_side(false, prob.bc_right);
}

Stepper::Stepper(const Problem& prob, const SchemeConfig& config)
    : prob_(prob), cfg_(config), grid_(prob.x_min, prob.x_max, config.n_cells) {
    const int n = grid_.n_cells;
    cons_.assign(n + 2 * ng_, Vec3{});
    abar_.assign(n, 1.0);
    aif_.assign(n + 1, 1.0);

    // cell averages of the initial data by composite Gauss-Legendre (3 panels
    // of 5 points each, robust to an interior jump in the data)
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    for (int i = 0; i < n; ++i) {
        Vec3 acc{};
        double aacc = 0.0;
        const double xl = grid_.iface(i);
        for (int panel = 0; panel < 3; ++panel) {
            const double a = xl + panel * grid_.dx / 3.0;
            const double b = a + grid_.dx / 3.0;
            for (int q = 0; q < 5; ++q) {
                const double x = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
                const double w = 0.5 * (b - a) * gw[q];
                acc = acc + w * gas::to_vec(gas::prim_to_cons(prob_.initial(x), prob_.gas));
                aacc += w * prob_.geometry.area(x);
            }
        }
        cons_[ng_ + i] = (1.0 / grid_.dx) * acc;
        abar_[i] = aacc / grid_.dx;
    }
    for (int i = 0; i <= n; ++i)
        aif_[i] = prob_.geometry.area(grid_.iface(i));
    if (prob_.geometry.planar_flag) {
        std::fill(abar_.begin(), abar_.end(), 1.0);
        std::fill(aif_.begin(), aif_.end(), 1.0);
    }
}

void Stepper::fill_ghosts() { apply_bc(cons_, ng_, prob_, grid_); }

std::vector<PrimitiveState> Stepper::primitives() const {
    std::vector<PrimitiveState> out(grid_.n_cells);
    for (int i = 0; i < grid_.n_cells; ++i)
        out[i] = gas::cons_to_prim({cons_[ng_ + i][0], cons_[ng_ + i][1], cons_[ng_ + i][2]},
                                   prob_.gas);
    return out;
}

std::vector<ConservedState> Stepper::conserved() const {
    std::vector<ConservedState> out(grid_.n_cells);
    for (int i = 0; i < grid_.n_cells; ++i)
        out[i] = {cons_[ng_ + i][0], cons_[ng_ + i][1], cons_[ng_ + i][2]};
    return out;
}

double Stepper::max_wavespeed() const {
    double smax = 0.0;
    for (int i = 0; i < grid_.n_cells; ++i) {
        const PrimitiveState q = gas::cons_to_prim(
            {cons_[ng_ + i][0], cons_[ng_ + i][1], cons_[ng_ + i][2]}, prob_.gas);
        smax = std::max(smax, std::fabs(q.u) + gas::sound_speed(q, prob_.gas));
    }
    return smax;
}

Vec3 Stepper::totals() const {
    Vec3 acc{};
    for (int i = 0; i < grid_.n_cells; ++i)
        acc = acc + (abar_[i] * grid_.dx) * cons_[ng_ + i];
    return acc;
}

double Stepper::step() { return step(-1.0); }

double Stepper::step(double dt_cap) {
    const int n = grid_.n_cells;
    const GasModel& g = prob_.gas;
    fill_ghosts();

    double dt = compute_dt(primitives(), grid_, cfg_.cfl, g);
    if (dt_cap > 0.0)
        dt = std::min(dt, dt_cap);

    const bool planar = prob_.geometry.planar_flag;

    // reconstruct
    std::vector<CellPoly> poly;
    if (cfg_.order >= 3) {
        poly = reconstruct_weno3(cons_, ng_, g);
    } else {
        std::vector<Vec3> prim(cons_.size());
        for (std::size_t i = 0; i < cons_.size(); ++i) {
            const PrimitiveState q = gas::cons_to_prim({cons_[i][0], cons_[i][1], cons_[i][2]}, g);
            prim[i] = gas::to_vec(q);
        }
        poly = reconstruct_muscl(prim, ng_);
    }

    const double dx = grid_.dx;
    std::vector<Vec3> fhat(n + 1);   // transport flux at interfaces
    std::vector<double> phat(n + 1); // interface pressure (the G term)

    for (int i = 0; i <= n; ++i) {
        const int jl = ng_ + i - 1;
        const int jr = ng_ + i;
        const double xif = grid_.iface(i);
        solver::GRPInput in;
        in.gas = g;
        in.a0 = planar ? 0.0 : prob_.geometry.dlogA(xif);
        in.a1 = planar ? 0.0 : prob_.geometry.d_dlogA(xif);
        in.acoustic_threshold = cfg_.acoustic_threshold;

        auto side = [&](int j, double xi, PrimitiveState& q, Vec3& d1, Vec3& d2) {
            const CellPoly& P = poly[j];
            Vec3 v, vx, vxx;
            for (int k = 0; k < 3; ++k) {
                v[k] = P.c0[k] + P.c1[k] * xi + P.c2[k] * xi * xi;
                vx[k] = (P.c1[k] + 2.0 * P.c2[k] * xi) / dx;
                vxx[k] = 2.0 * P.c2[k] / (dx * dx);
            }
            if (cfg_.order >= 3) {
                Vec3 Q, Qx, Qxx;
                bool ok = v[0] > gas::vacuum_floor;
                if (ok) {
                    const double pr = (g.gamma - 1.0) * (v[2] - 0.5 * v[1] * v[1] / v[0]);
                    ok = pr > gas::vacuum_floor;
                }
                if (!ok) {  // fall back to the cell average, first order
                    v = cons_[j];
                    vx = Vec3{};
                    vxx = Vec3{};
                }
                gas::cons_derivs_to_prim2(v, vx, vxx, g, Q, Qx, Qxx);
                q = gas::from_vec(Q);
                d1 = Qx;
                d2 = Qxx;
            } else {
                if (!(v[0] > gas::vacuum_floor) || !(v[2] > gas::vacuum_floor)) {
                    const PrimitiveState qc =
                        gas::cons_to_prim({cons_[j][0], cons_[j][1], cons_[j][2]}, g);
                    v = gas::to_vec(qc);
                    vx = Vec3{};
                }
                q = {v[0], v[1], v[2]};
                d1 = vx;
                d2 = Vec3{};
            }
        };

        PrimitiveState qL, qR;
        Vec3 d1L, d2L, d1R, d2R;
        side(jl, 0.5, qL, d1L, d2L);
        side(jr, -0.5, qR, d1R, d2R);
        in.qL = qL;
        in.qR = qR;
        in.dqL = d1L;
        in.dqR = d1R;
        if (cfg_.order >= 3) {
            in.d2qL = d2L;
            in.d2qR = d2R;
        }

        // near vacuum the quadratic expansion can leave the physical region
        // within one time step; back off to the linear and then instantaneous
        // value at such interfaces
        auto eval_safe = [&](const solver::GRPSolution& sol, double t) -> PrimitiveState {
            try {
                const PrimitiveState q = solver::taylor_eval(sol, t);
                if (q.rho > gas::vacuum_floor && q.p > gas::vacuum_floor)
                    return q;
            } catch (const Error&) {
            }
            PrimitiveState lin = sol.q0;
            lin.rho += sol.dtQ[0] * t;
            lin.u += sol.dtQ[1] * t;
            lin.p += sol.dtQ[2] * t;
            if (lin.rho > gas::vacuum_floor && lin.p > gas::vacuum_floor)
                return lin;
            return sol.q0;
        };

        if (cfg_.order >= 3) {
            const solver::GRPSolution sol = solver::solve_qgrp(in, cfg_.grp_mode);
            // two-point Gauss-Legendre in time for third order
            const double t1 = dt * (0.5 - 0.5 / std::sqrt(3.0));
            const double t2 = dt * (0.5 + 0.5 / std::sqrt(3.0));
            const PrimitiveState s1 = eval_safe(sol, t1);
            const PrimitiveState s2 = eval_safe(sol, t2);
            fhat[i] = 0.5 * (gas::transport_flux(s1, g) + gas::transport_flux(s2, g));
            phat[i] = 0.5 * (s1.p + s2.p);
        } else {
            const solver::GRPSolution sol = solver::solve_lgrp(in, cfg_.grp_mode);
            const PrimitiveState mid = eval_safe(sol, 0.5 * dt);
            fhat[i] = gas::transport_flux(mid, g);
            phat[i] = mid.p;
        }
    }

    residual_ = 0.0;
    for (int i = 0; i < n; ++i) {
        Vec3 dU;
        for (int k = 0; k < 3; ++k)
            dU[k] = -(dt / dx) * ((aif_[i + 1] * fhat[i + 1][k] - aif_[i] * fhat[i][k]) / abar_[i]);
        dU[1] -= (dt / dx) * (phat[i + 1] - phat[i]);
        for (int k = 0; k < 3; ++k) {
            cons_[ng_ + i][k] += dU[k];
            residual_ = std::max(residual_, std::fabs(dU[k]) / dt);
        }
    }
    t_ += dt;
    return dt;
}

RunResult run(const Problem& prob, const SchemeConfig& config) {
    Stepper st(prob, config);
    RunResult res;
    res.grid = st.grid();

    std::vector<double> snaps = config.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    res.diag.time.push_back(0.0);
    res.diag.dt.push_back(0.0);
    res.diag.totals.push_back(st.totals());
    res.diag.residual.push_back(0.0);

    int steps = 0;
    while (st.time() < config.t_end - 1e-14 && steps < config.max_steps) {
        double cap = config.t_end - st.time();
        if (next_snap < snaps.size())
            cap = std::min(cap, snaps[next_snap] - st.time());
        const double dt = st.step(cap);
        ++steps;
        res.diag.time.push_back(st.time());
        res.diag.dt.push_back(dt);
        res.diag.totals.push_back(st.totals());
        res.diag.residual.push_back(st.last_residual());
        while (next_snap < snaps.size() && st.time() >= snaps[next_snap] - 1e-12) {
            res.snapshots.push_back({st.time(), st.primitives()});
            ++next_snap;
        }
    }
    res.steps = steps;
    res.t_final = st.time();
    res.prim = st.primitives();
    res.cons = st.conserved();
    return res;
}

} // namespace grpflow::fv
