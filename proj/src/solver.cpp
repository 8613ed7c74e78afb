#include "grpflow/solver.hpp"

#include <cmath>

#include "grpflow/linsolve.hpp"

namespace grpflow::solver {

namespace {

using gas::ConservedState;
using riemann::RiemannFan;
using riemann::TAxisRegion;
using riemann::WaveType;

const Vec3 mirror_d1 = {-1.0, 1.0, -1.0};  // first x-derivatives under x -> -x
const Vec3 mirror_d2 = {1.0, -1.0, 1.0};   // second x-derivatives

PrimitiveState mirror_state(const PrimitiveState& q) { return {q.rho, -q.u, q.p}; }

Vec3 hadamard(const Vec3& a, const Vec3& b) { return {a[0] * b[0], a[1] * b[1], a[2] * b[2]}; }

Mat3 fsu_matrix(const PrimitiveState& q, double sigma, const GasModel& g) {
    auto [dU, dF] = gas::conserved_jacobians(q, g);
    return dF - sigma * dU;
}

Mat3 sigI_minus_J(const PrimitiveState& q, double sigma, const GasModel& g) {
    Mat3 m = gas::primitive_jacobian(q, g);
    m = -1.0 * m;
    m[0][0] += sigma;
    m[1][1] += sigma;
    m[2][2] += sigma;
    return m;
}

// D_sigma(F - sigma U) for fully known data
Vec3 dsig1_value(const PrimitiveState& q, const Vec3& dq, double sigma, double dsig,
                 double a0, const GasModel& g) {
    const Vec3 H = gas::source_term_a(a0, q, g);
    const Vec3 DQ = mul(sigI_minus_J(q, sigma, g), dq) + H;
    const Vec3 U = gas::to_vec(gas::prim_to_cons(q, g));
    return mul(fsu_matrix(q, sigma, g), DQ) - dsig * U;
}

// D_sigma^2(F - sigma U) with d2sig dropped (it multiplies -U and is kept as a
// separate unknown column); pass d2q = 0 to obtain the inner-side known part
Vec3 dsig2_known(const PrimitiveState& q, const Vec3& dq, const Vec3& d2q, double sigma,
                 double dsig, double a0, double a1, const GasModel& g) {
    const Mat3 sJ = sigI_minus_J(q, sigma, g);
    const Mat3 fsu = fsu_matrix(q, sigma, g);
    const Vec3 H = gas::source_term_a(a0, q, g);
    const Mat3 gradH = gas::source_gradient_a(a0, q, g);
    const Vec3 Hx_expl = gas::source_x_explicit(a1, q, g);

    const Vec3 DQ = mul(sJ, dq) + H;
    const Vec3 Hx = mul(gradH, dq) + Hx_expl;
    const Vec3 DH = mul(gradH, DQ) + sigma * Hx_expl;
    const Mat3 dJ_dq = gas::d_primitive_jacobian(q, dq, g);
    const Vec3 DdxQ = mul(sJ, d2q) - mul(dJ_dq, dq) + Hx;
    const Mat3 dJ_DQ = gas::d_primitive_jacobian(q, DQ, g);
    Vec3 D2Q = mul(sJ, DdxQ) - mul(dJ_DQ, dq) + DH + dsig * dq;

    auto [dU, dF] = gas::conserved_jacobians(q, g);
    const Mat3 dFd = gas::d_cons_flux_jacobian(q, DQ, g);
    const Mat3 dUd = gas::d_cons_state_jacobian(q, DQ, g);
    Mat3 lead = dFd - (2.0 * dsig) * dU - sigma * dUd;
    return mul(lead, DQ) + mul(fsu, D2Q);
}

Mat3 shock_matrix_q2(const PrimitiveState& q, double sigma, const GasModel& g) {
    const Mat3 sJ = sigI_minus_J(q, sigma, g);
    return mul(fsu_matrix(q, sigma, g), mul(sJ, sJ));  // M_s
}

Mat2 contact_matrix(const PrimitiveState& q, const GasModel& g) {
    Mat2 C;  // u I - B_0
    C[0][1] = -1.0 / q.rho;
    C[1][0] = -g.gamma * q.p;
    return C;
}

Vec2 contact_bc(const PrimitiveState& q, const Vec3& dq, double a0, double a1,
                const GasModel& g) {
    const Mat3 J = gas::primitive_jacobian(q, g);
    Vec3 DQ = gas::source_term_a(a0, q, g);
    for (int i = 0; i < 3; ++i)
        DQ[i] += q.u * dq[i] - (J[i][0] * dq[0] + J[i][1] * dq[1] + J[i][2] * dq[2]);
    const double Dlam0 = DQ[1];
    const Mat2 DB0 = gas::d_wzero_matrix(q, DQ, g);
    const Mat2 dxB0 = gas::d_wzero_matrix(q, dq, g);
    const Mat2 C = contact_matrix(q, g);
    Mat2 bracket;
    bracket[0][0] = Dlam0 - DB0[0][0];
    bracket[0][1] = -DB0[0][1];
    bracket[1][0] = -DB0[1][0];
    bracket[1][1] = Dlam0 - DB0[1][1];
    bracket = bracket - mul(C, dxB0);
    const Vec2 dxw0 = {dq[1], dq[2]};

    // H_0 = (0, -a gamma p u)
    const Vec2 H0x_expl = {0.0, -a1 * g.gamma * q.p * q.u};
    const Vec2 gradH0_dq = {0.0, -a0 * g.gamma * (q.p * dq[1] + q.u * dq[2])};
    const Vec2 gradH0_DQ = {0.0, -a0 * g.gamma * (q.p * DQ[1] + q.u * DQ[2])};
    const Vec2 dxH0 = gradH0_dq + H0x_expl;
    const Vec2 DH0 = gradH0_DQ + q.u * H0x_expl;
    return mul(bracket, dxw0) + mul(C, dxH0) + DH0;
}

struct Layout {
    bool shockL = false, shockR = false;
    int n = 6;
    int iSigL = -1, iSigR = -1;
    int offL = 0, offR = 3;
};

// below this relative pressure jump a shock row set is numerically rank
// deficient (sigma approaches u + c and the Rankine-Hugoniot derivative rows
// vanish like the cube of the jump); such waves carry their derivative
// relations along the characteristic instead
constexpr double weak_shock_rel = 1e-5;

bool strong_shock(const riemann::WaveKind& w, double p_star, double p_outer) {
    return w.type == WaveType::shock && std::fabs(p_star - p_outer) > weak_shock_rel * p_outer;
}

Layout make_layout(const RiemannFan& fan) {
    Layout lay;
    lay.shockL = strong_shock(fan.wave_minus, fan.p_star, fan.left.p);
    lay.shockR = strong_shock(fan.wave_plus, fan.p_star, fan.right.p);
    lay.n = 6 + (lay.shockL ? 1 : 0) + (lay.shockR ? 1 : 0);
    int pos = 0;
    if (lay.shockL) lay.iSigL = pos++;
    lay.offL = pos;
    pos += 3;
    if (lay.shockR) lay.iSigR = pos++;
    lay.offR = pos;
    return lay;
}

fan::FanSetup left_fan_setup(const GRPInput& in, const RiemannFan& fan_) {
    fan::FanSetup s;
    s.qL = in.qL;
    s.dqL = in.dqL;
    s.d2qL = in.d2qL.value_or(Vec3{});
    if (fan_.wave_minus.type == WaveType::shock) {
        // weak shock handled as a characteristic wave
        s.beta_L = s.beta_R = in.qL.u - gas::sound_speed(in.qL, in.gas);
    } else {
        s.beta_L = fan_.wave_minus.head;
        s.beta_R = fan_.wave_minus.tail;
    }
    s.a0 = in.a0;
    s.a1 = in.a1;
    s.gas = in.gas;
    return s;
}

fan::FanSetup right_fan_setup_mirrored(const GRPInput& in, const RiemannFan& fan_) {
    fan::FanSetup s;
    s.qL = mirror_state(in.qR);
    s.dqL = hadamard(mirror_d1, in.dqR);
    s.d2qL = hadamard(mirror_d2, in.d2qR.value_or(Vec3{}));
    if (fan_.wave_plus.type == WaveType::shock) {
        s.beta_L = s.beta_R = -(in.qR.u + gas::sound_speed(in.qR, in.gas));
    } else {
        s.beta_L = -fan_.wave_plus.head;
        s.beta_R = -fan_.wave_plus.tail;
    }
    s.a0 = -in.a0;
    s.a1 = in.a1;
    s.gas = in.gas;
    return s;
}

} // namespace

Rows rarefaction_rows(const fan::LQCoefficients& co, const PrimitiveState& q_star,
                      double a0, const GasModel& g, bool mirrored) {
    Rows rows;
    rows.n = 2;
    const double c = gas::sound_speed(q_star, g);
    Mat2 M2;
    M2[0][0] = -c;
    M2[1][0] = std::pow(q_star.rho, g.gamma - 1.0) / (g.gamma - 1.0);
    M2[1][1] = -2.0 * c;
    const Mat23 lhs = mul(M2, gas::grad_wminus(q_star, g));
    const Vec2 dw = fan::dlam_w(co, co.beta_R);
    const Vec2 Hm = gas::wminus_source(a0, q_star, g);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j)
            rows.star[i][j] = lhs[i][j] * (mirrored ? mirror_d1[j] : 1.0);
        rows.rhs[i] = dw[i] - Hm[i];
    }
    return rows;
}

Rows contact_rows(const PrimitiveState& starL, const PrimitiveState& starR,
                  double a0, const GasModel& g) {
    Rows rows;
    rows.n = 2;
    const Mat2 CL = contact_matrix(starL, g);
    const Mat2 CR = contact_matrix(starR, g);
    const Vec2 H0L = gas::wzero_source(a0, starL, g);
    const Vec2 H0R = gas::wzero_source(a0, starR, g);
    for (int i = 0; i < 2; ++i) {
        rows.star[i][1] = CL[i][0];
        rows.star[i][2] = CL[i][1];
        rows.other[i][1] = -CR[i][0];
        rows.other[i][2] = -CR[i][1];
        rows.rhs[i] = -H0L[i] + H0R[i];
    }
    return rows;
}

Rows shock_rows(const PrimitiveState& q_outer, const Vec3& dq_outer,
                const PrimitiveState& q_star, double sigma,
                double a0, double a1, const GasModel& g) {
    (void)a1;
    Rows rows;
    rows.n = 3;
    const Mat3 W = mul(fsu_matrix(q_star, sigma, g), sigI_minus_J(q_star, sigma, g));
    const Vec3 Ustar = gas::to_vec(gas::prim_to_cons(q_star, g));
    const Vec3 Uout = gas::to_vec(gas::prim_to_cons(q_outer, g));
    const Vec3 h_star = mul(fsu_matrix(q_star, sigma, g), gas::source_term_a(a0, q_star, g));
    const Vec3 outer = dsig1_value(q_outer, dq_outer, sigma, 0.0, a0, g);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            rows.star[i][j] = W[i][j];
        rows.accel[i] = -(Ustar[i] - Uout[i]);
        rows.rhs[i] = outer[i] - h_star[i];
    }
    return rows;
}

Vec3 time_deriv(const PrimitiveState& q, const Vec3& dxQ, double a0, const GasModel& g) {
    const Mat3 J = gas::primitive_jacobian(q, g);
    return gas::source_term_a(a0, q, g) - mul(J, dxQ);
}

Vec3 time_deriv2(const PrimitiveState& q, const Vec3& dxQ, const Vec3& d2xQ,
                 double a0, double a1, const GasModel& g) {
    const Mat3 J = gas::primitive_jacobian(q, g);
    const Vec3 Qt = time_deriv(q, dxQ, a0, g);
    const Mat3 dJx = gas::d_primitive_jacobian(q, dxQ, g);
    const Vec3 Hx = mul(gas::source_gradient_a(a0, q, g), dxQ) + gas::source_x_explicit(a1, q, g);
    const Vec3 Qtx = Hx - mul(dJx, dxQ) - mul(J, d2xQ);
    const Vec3 Ht = mul(gas::source_gradient_a(a0, q, g), Qt);
    const Mat3 dJt = gas::d_primitive_jacobian(q, Qt, g);
    return Ht - mul(dJt, dxQ) - mul(J, Qtx);
}

GRPInput mirror(const GRPInput& in) {
    GRPInput m;
    m.qL = mirror_state(in.qR);
    m.qR = mirror_state(in.qL);
    m.dqL = hadamard(mirror_d1, in.dqR);
    m.dqR = hadamard(mirror_d1, in.dqL);
    if (in.d2qR) m.d2qL = hadamard(mirror_d2, *in.d2qR);
    if (in.d2qL) m.d2qR = hadamard(mirror_d2, *in.d2qL);
    m.a0 = -in.a0;
    m.a1 = in.a1;
    m.gas = in.gas;
    return m;
}

namespace {

riemann::WaveKind mirror_wave(const riemann::WaveKind& w) {
    riemann::WaveKind m = w;
    m.head = -w.head;
    m.tail = -w.tail;
    m.sigma = -w.sigma;
    return m;
}

RiemannFan mirror_fan(const RiemannFan& f) {
    RiemannFan m = f;
    m.left = mirror_state(f.right);
    m.right = mirror_state(f.left);
    m.star_left = mirror_state(f.star_right);
    m.star_right = mirror_state(f.star_left);
    m.u_star = -f.u_star;
    m.wave_minus = mirror_wave(f.wave_plus);
    m.wave_plus = mirror_wave(f.wave_minus);
    m.wave_contact = mirror_wave(f.wave_contact);
    return m;
}

const Vec3 mirror_dt = {1.0, -1.0, 1.0};  // time derivatives: only u flips

} // namespace

GRPSolution unmirror(GRPSolution s) {
    s.q0 = mirror_state(s.q0);
    s.dtQ = hadamard(mirror_dt, s.dtQ);
    if (s.dt2Q) s.dt2Q = hadamard(mirror_dt, *s.dt2Q);
    s.pattern = mirror_fan(s.pattern);
    const Vec3 dxL = s.dxQ_starL, dxR = s.dxQ_starR;
    s.dxQ_starL = hadamard(mirror_d1, dxR);
    s.dxQ_starR = hadamard(mirror_d1, dxL);
    if (s.d2xQ_starL || s.d2xQ_starR) {
        auto l = s.d2xQ_starL, r = s.d2xQ_starR;
        s.d2xQ_starL = r ? std::optional<Vec3>(hadamard(mirror_d2, *r)) : std::nullopt;
        s.d2xQ_starR = l ? std::optional<Vec3>(hadamard(mirror_d2, *l)) : std::nullopt;
    }
    for (auto& sh : s.shock_accels) {
        sh.family = -sh.family;
        sh.sigma = -sh.sigma;
        sh.dsig = -sh.dsig;
        sh.d2sig = -sh.d2sig;
    }
    if (s.sonic) s.sonic->family = -s.sonic->family;
    if (s.sonic_eval) s.sonic_eval->mirrored = !s.sonic_eval->mirrored;
    switch (s.region) {
        case TAxisRegion::left: s.region = TAxisRegion::right; break;
        case TAxisRegion::right: s.region = TAxisRegion::left; break;
        case TAxisRegion::star_left: s.region = TAxisRegion::star_right; break;
        case TAxisRegion::star_right: s.region = TAxisRegion::star_left; break;
    }
    return s;
}

namespace {

// Jacobian dQ/dPhi of the map (S, psi, phi) -> (rho, u, p)
Mat3 dQ_dPhi(const PrimitiveState& q, const GasModel& g) {
    const double c = gas::sound_speed(q, g);
    const double S = q.p * std::pow(q.rho, -g.gamma);
    const double gm1 = g.gamma - 1.0;
    Mat3 m;
    m[0][0] = -q.rho / (gm1 * S);
    m[0][1] = q.rho / (2.0 * c);
    m[0][2] = -q.rho / (2.0 * c);
    m[1][1] = 0.5;
    m[1][2] = 0.5;
    m[2][0] = -std::pow(q.rho, g.gamma) / gm1;
    m[2][1] = 0.5 * q.rho * c;
    m[2][2] = -0.5 * q.rho * c;
    return m;
}

struct BetaStar {
    double beta = 0.0;
    int iters = 0;
};

BetaStar solve_beta_star(const fan::LQCoefficients& co, double dt) {
    BetaStar bs;
    if (dt <= 0.0)
        return bs;
    double beta = 0.0;
    for (int it = 1; it <= 20; ++it) {
        const double gval = beta + 0.5 * dt * fan::dlam_lambda(co, beta);
        const double gp = 1.0 + 0.5 * dt * fan::ddbeta_dlam_lambda(co, beta);
        double next = beta - gval / gp;
        next = std::min(std::max(next, co.beta_L), co.beta_R);
        const bool done = std::fabs(next - beta) <= 1e-7 * std::max(1.0, std::fabs(next));
        beta = next;
        bs.iters = it;
        if (done) {
            bs.beta = beta;
            return bs;
        }
    }
    throw NewtonDivergence("sonic characteristic-root iteration failed");
}

GRPSolution assemble_and_solve(const GRPInput& in, const RiemannFan& fan_, int order);

GRPSolution solve_exact(const GRPInput& in, int order) {
    const RiemannFan fan_ = riemann::solve(in.qL, in.qR, in.gas);
    const riemann::TAxisLocation loc = riemann::classify_t_axis(fan_);
    if (loc.sonic)
        return solve_sonic(in, fan_, loc.sonic_family, 0.0, order);
    return assemble_and_solve(in, fan_, order);
}

GRPSolution assemble_and_solve(const GRPInput& in, const RiemannFan& fan_, int order) {
    const GasModel& g = in.gas;
    GRPSolution sol;
    sol.pattern = fan_;
    sol.gas = g;
    sol.order = order;

    const Layout lay = make_layout(fan_);

    // fan coefficient packs are reused for the second-derivative systems
    std::optional<fan::LQCoefficients> coL, coR;
    const bool want_q_forms = order >= 2 && !g.special_branch() && std::fabs(g.gamma - 2.0) >= 1e-8;
    if (!lay.shockL) {
        const fan::FanSetup s = left_fan_setup(in, fan_);
        coL = fan::build_coefficients(s, fan::head_directional_derivs(s), want_q_forms);
    }
    if (!lay.shockR) {
        const fan::FanSetup s = right_fan_setup_mirrored(in, fan_);
        coR = fan::build_coefficients(s, fan::head_directional_derivs(s), want_q_forms);
    }

    linalg::DenseSystem sys(lay.n);
    int row = 0;
    linalg::DenseSystem* target = &sys;
    auto put_block = [&](const Rows& r, int off_star, int isig, int off_other) {
        for (int i = 0; i < r.n; ++i, ++row) {
            for (int j = 0; j < 3; ++j) {
                target->at(row, off_star + j) = r.star[i][j];
                if (off_other >= 0)
                    target->at(row, off_other + j) = r.other[i][j];
            }
            if (isig >= 0)
                target->at(row, isig) = r.accel[i];
            target->rhs[row] = r.rhs[i];
        }
    };

    if (lay.shockL)
        put_block(shock_rows(in.qL, in.dqL, fan_.star_left, fan_.wave_minus.sigma,
                             in.a0, in.a1, g),
                  lay.offL, lay.iSigL, -1);
    else
        put_block(rarefaction_rows(*coL, fan_.star_left, in.a0, g, false), lay.offL, -1, -1);

    put_block(contact_rows(fan_.star_left, fan_.star_right, in.a0, g), lay.offL, -1, lay.offR);

    if (lay.shockR)
        put_block(shock_rows(in.qR, in.dqR, fan_.star_right, fan_.wave_plus.sigma,
                             in.a0, in.a1, g),
                  lay.offR, lay.iSigR, -1);
    else {
        const PrimitiveState star_m = mirror_state(fan_.star_right);
        put_block(rarefaction_rows(*coR, star_m, -in.a0, g, true), lay.offR, -1, -1);
    }

    double rhs_norm = 0.0;
    for (int i = 0; i < lay.n; ++i)
        rhs_norm = std::max(rhs_norm, std::fabs(sys.rhs[i]));
    const std::vector<double> x = linalg::solve(sys);
    sol.residual = linalg::residual_norm(sys, x) / std::max(rhs_norm, 1e-300);

    sol.dxQ_starL = {x[lay.offL], x[lay.offL + 1], x[lay.offL + 2]};
    sol.dxQ_starR = {x[lay.offR], x[lay.offR + 1], x[lay.offR + 2]};
    if (lay.shockL)
        sol.shock_accels.push_back({-1, fan_.wave_minus.sigma, x[lay.iSigL], 0.0});
    if (lay.shockR)
        sol.shock_accels.push_back({+1, fan_.wave_plus.sigma, x[lay.iSigR], 0.0});

    const riemann::TAxisLocation loc = riemann::classify_t_axis(fan_);
    sol.region = loc.region;

    // second-derivative system
    std::optional<Vec3> d2L, d2R;
    if (order >= 2) {
        const Vec3 d2qL = in.d2qL.value_or(Vec3{});
        const Vec3 d2qR = in.d2qR.value_or(Vec3{});
        linalg::DenseSystem sys2(lay.n);
        target = &sys2;
        row = 0;

        if (lay.shockL) {
            const double sig = fan_.wave_minus.sigma;
            const double dsig = sol.shock_accels.front().dsig;
            Rows r;
            r.n = 3;
            const Mat3 Ms = shock_matrix_q2(fan_.star_left, sig, g);
            const Vec3 Ustar = gas::to_vec(gas::prim_to_cons(fan_.star_left, g));
            const Vec3 Uout = gas::to_vec(gas::prim_to_cons(in.qL, g));
            const Vec3 outer = dsig2_known(in.qL, in.dqL, d2qL, sig, dsig, in.a0, in.a1, g);
            const Vec3 inner = dsig2_known(fan_.star_left, sol.dxQ_starL, Vec3{}, sig, dsig,
                                           in.a0, in.a1, g);
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) r.star[i][j] = Ms[i][j];
                r.accel[i] = -(Ustar[i] - Uout[i]);
                r.rhs[i] = outer[i] - inner[i];
            }
            put_block(r, lay.offL, lay.iSigL, -1);
        } else {
            Rows r;
            r.n = 2;
            Mat23 Mr;
            Vec2 Br;
            fan::dlam2_wminus_parts(fan_.star_left, sol.dxQ_starL, in.a0, in.a1, g, Mr, Br);
            const Vec2 d2w = fan::dlam2_w_any(*coL, coL->beta_R);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 3; ++j) r.star[i][j] = Mr[i][j];
                r.rhs[i] = d2w[i] - Br[i];
            }
            put_block(r, lay.offL, -1, -1);
        }

        {
            Rows r;
            r.n = 2;
            const Mat2 McL = mul(contact_matrix(fan_.star_left, g), contact_matrix(fan_.star_left, g));
            const Mat2 McR = mul(contact_matrix(fan_.star_right, g), contact_matrix(fan_.star_right, g));
            const Vec2 BcL = contact_bc(fan_.star_left, sol.dxQ_starL, in.a0, in.a1, g);
            const Vec2 BcR = contact_bc(fan_.star_right, sol.dxQ_starR, in.a0, in.a1, g);
            for (int i = 0; i < 2; ++i) {
                r.star[i][1] = McL[i][0];
                r.star[i][2] = McL[i][1];
                r.other[i][1] = -McR[i][0];
                r.other[i][2] = -McR[i][1];
                r.rhs[i] = -BcL[i] + BcR[i];
            }
            put_block(r, lay.offL, -1, lay.offR);
        }

        if (lay.shockR) {
            const double sig = fan_.wave_plus.sigma;
            const double dsig = sol.shock_accels.back().dsig;
            Rows r;
            r.n = 3;
            const Mat3 Ms = shock_matrix_q2(fan_.star_right, sig, g);
            const Vec3 Ustar = gas::to_vec(gas::prim_to_cons(fan_.star_right, g));
            const Vec3 Uout = gas::to_vec(gas::prim_to_cons(in.qR, g));
            const Vec3 outer = dsig2_known(in.qR, in.dqR, d2qR, sig, dsig, in.a0, in.a1, g);
            const Vec3 inner = dsig2_known(fan_.star_right, sol.dxQ_starR, Vec3{}, sig, dsig,
                                           in.a0, in.a1, g);
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) r.star[i][j] = Ms[i][j];
                r.accel[i] = -(Ustar[i] - Uout[i]);
                r.rhs[i] = outer[i] - inner[i];
            }
            put_block(r, lay.offR, lay.iSigR, -1);
        } else {
            Rows r;
            r.n = 2;
            const PrimitiveState star_m = mirror_state(fan_.star_right);
            const Vec3 dx_m = hadamard(mirror_d1, sol.dxQ_starR);
            Mat23 Mr;
            Vec2 Br;
            fan::dlam2_wminus_parts(star_m, dx_m, -in.a0, in.a1, g, Mr, Br);
            const Vec2 d2w = fan::dlam2_w_any(*coR, coR->beta_R);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 3; ++j) r.star[i][j] = Mr[i][j] * mirror_d2[j];
                r.rhs[i] = d2w[i] - Br[i];
            }
            put_block(r, lay.offR, -1, -1);
        }

        double rhs2_norm = 0.0;
        for (int i = 0; i < lay.n; ++i)
            rhs2_norm = std::max(rhs2_norm, std::fabs(sys2.rhs[i]));
        const std::vector<double> x2 = linalg::solve(sys2);
        sol.residual = std::max(sol.residual,
                                linalg::residual_norm(sys2, x2) / std::max(rhs2_norm, 1e-300));
        d2L = Vec3{x2[lay.offL], x2[lay.offL + 1], x2[lay.offL + 2]};
        d2R = Vec3{x2[lay.offR], x2[lay.offR + 1], x2[lay.offR + 2]};
        sol.d2xQ_starL = d2L;
        sol.d2xQ_starR = d2R;
        if (lay.shockL)
            sol.shock_accels.front().d2sig = x2[lay.iSigL];
        if (lay.shockR)
            sol.shock_accels.back().d2sig = x2[lay.iSigR];
    }

    PrimitiveState q0;
    Vec3 dx{}, d2x{};
    switch (loc.region) {
        case TAxisRegion::left:
            q0 = in.qL; dx = in.dqL; d2x = in.d2qL.value_or(Vec3{});
            break;
        case TAxisRegion::star_left:
            q0 = fan_.star_left; dx = sol.dxQ_starL; d2x = d2L.value_or(Vec3{});
            break;
        case TAxisRegion::star_right:
            q0 = fan_.star_right; dx = sol.dxQ_starR; d2x = d2R.value_or(Vec3{});
            break;
        case TAxisRegion::right:
            q0 = in.qR; dx = in.dqR; d2x = in.d2qR.value_or(Vec3{});
            break;
    }
    sol.q0 = q0;
    sol.dtQ = time_deriv(q0, dx, in.a0, g);
    if (order >= 2)
        sol.dt2Q = time_deriv2(q0, dx, d2x, in.a0, in.a1, g);
    return sol;
}

bool small_jump(const GRPInput& in) {
    const double cL = gas::sound_speed(in.qL, in.gas);
    const double rel = std::max({std::fabs(in.qR.rho - in.qL.rho) / in.qL.rho,
                                 std::fabs(in.qR.u - in.qL.u) / cL,
                                 std::fabs(in.qR.p - in.qL.p) / in.qL.p});
    return rel < in.acoustic_threshold;
}

GRPSolution solve_acoustic(const GRPInput& in, int order) {
    const GasModel& g = in.gas;
    GRPSolution sol;
    sol.gas = g;
    sol.order = order;
    sol.pattern = riemann::solve(in.qL, in.qR, g);

    const AcousticDerivs ad = solve_acoustic_derivs(in, order);
    sol.dxQ_starL = ad.dxQ_starL;
    sol.dxQ_starR = ad.dxQ_starR;
    sol.d2xQ_starL = ad.d2xQ_starL;
    sol.d2xQ_starR = ad.d2xQ_starR;

    const ConservedState UL = gas::prim_to_cons(in.qL, g);
    const ConservedState UR = gas::prim_to_cons(in.qR, g);
    const PrimitiveState qs = gas::cons_to_prim(
        {0.5 * (UL.rho + UR.rho), 0.5 * (UL.mom + UR.mom), 0.5 * (UL.E + UR.E)}, g);
    const double c = gas::sound_speed(qs, g);

    Vec3 dx{}, d2x{};
    if (qs.u - c > 0.0) {
        sol.region = TAxisRegion::left;
        dx = in.dqL; d2x = in.d2qL.value_or(Vec3{});
    } else if (qs.u > 0.0) {
        sol.region = TAxisRegion::star_left;
        dx = ad.dxQ_starL; d2x = ad.d2xQ_starL.value_or(Vec3{});
    } else if (qs.u + c > 0.0) {
        sol.region = TAxisRegion::star_right;
        dx = ad.dxQ_starR; d2x = ad.d2xQ_starR.value_or(Vec3{});
    } else {
        sol.region = TAxisRegion::right;
        dx = in.dqR; d2x = in.d2qR.value_or(Vec3{});
    }
    sol.q0 = riemann::sample(sol.pattern, 0.0);
    sol.dtQ = time_deriv(sol.q0, dx, in.a0, g);
    if (order >= 2)
        sol.dt2Q = time_deriv2(sol.q0, dx, d2x, in.a0, in.a1, g);
    return sol;
}

} // namespace

AcousticDerivs solve_acoustic_derivs(const GRPInput& in, int order) {
    const GasModel& g = in.gas;
    const ConservedState UL = gas::prim_to_cons(in.qL, g);
    const ConservedState UR = gas::prim_to_cons(in.qR, g);
    const PrimitiveState qs = gas::cons_to_prim(
        {0.5 * (UL.rho + UR.rho), 0.5 * (UL.mom + UR.mom), 0.5 * (UL.E + UR.E)}, g);

    // unnormalized left eigenvectors stay smooth in Q; pair them with the
    // matching right set and divide by l.r where needed
    const double c = gas::sound_speed(qs, g);
    const Vec3 lam = {qs.u - c, qs.u, qs.u + c};
    const Vec3 lv[3] = {{0.0, -qs.rho * c, 1.0}, {c * c, 0.0, -1.0}, {0.0, qs.rho * c, 1.0}};
    const Vec3 rv[3] = {{qs.rho, -c, qs.rho * c * c}, {1.0, 0.0, 0.0}, {qs.rho, c, qs.rho * c * c}};
    double lr[3];
    for (int k = 0; k < 3; ++k)
        lr[k] = dot(lv[k], rv[k]);

    const Vec3 jump = in.dqR - in.dqL;
    double alpha[3];
    for (int k = 0; k < 3; ++k)
        alpha[k] = dot(lv[k], jump) / lr[k];

    AcousticDerivs ad;
    ad.dxQ_starL = in.dqL + alpha[0] * rv[0];
    ad.dxQ_starR = ad.dxQ_starL + alpha[1] * rv[1];

    if (order < 2)
        return ad;

    const Vec3 d2qL = in.d2qL.value_or(Vec3{});
    const Vec3 d2qR = in.d2qR.value_or(Vec3{});
    const Vec3 jump2 = d2qR - d2qL;

    const Mat3 J = gas::primitive_jacobian(qs, g);
    const Mat3 gradH = gas::source_gradient_a(in.a0, qs, g);
    const Vec3 H = gas::source_term_a(in.a0, qs, g);

    // directional derivatives of the (unnormalized) left eigenvectors
    auto d_left = [&](int k, const Vec3& V) -> Vec3 {
        const double dc = c * (0.5 * V[2] / qs.p - 0.5 * V[0] / qs.rho);
        const double drc = c * V[0] + qs.rho * dc;
        if (k == 0) return {0.0, -drc, 0.0};
        if (k == 2) return {0.0, drc, 0.0};
        return {2.0 * c * dc, 0.0, 0.0};
    };
    auto fquad = [&](const Vec3& v) -> Vec3 {
        return mul(gas::d_primitive_jacobian(qs, v, g), v) - mul(gradH, v);
    };

    const Vec3 sides[4] = {in.dqL, ad.dxQ_starL, ad.dxQ_starR, in.dqR};
    Vec3 delta2[3];
    double ghat[3][3] = {};  // ghat[k][j] = l_j . delta2_k, j != k
    for (int k = 0; k < 3; ++k) {
        const Vec3& left = sides[k];
        const Vec3& right = sides[k + 1];
        Vec3 DQ = H;
        for (int i = 0; i < 3; ++i)
            DQ[i] += lam[k] * left[i] - (J[i][0] * left[0] + J[i][1] * left[1] + J[i][2] * left[2]);
        const Vec3 d1jump = left - right;
        const Vec3 fdiff = fquad(left) - fquad(right);
        for (int j = 0; j < 3; ++j) {
            if (j == k) continue;
            ghat[k][j] = (dot(d_left(j, DQ), d1jump) - dot(lv[j], fdiff)) / (lam[k] - lam[j]);
        }
    }
    double deltak[3];
    for (int m = 0; m < 3; ++m) {
        double acc = dot(lv[m], jump2);
        for (int k = 0; k < 3; ++k)
            if (k != m) acc -= ghat[k][m];
        deltak[m] = acc / lr[m];
    }
    for (int k = 0; k < 3; ++k) {
        delta2[k] = deltak[k] * rv[k];
        for (int j = 0; j < 3; ++j)
            if (j != k) delta2[k] = delta2[k] + (ghat[k][j] / lr[j]) * rv[j];
    }
    ad.d2xQ_starL = d2qL + delta2[0];
    ad.d2xQ_starR = *ad.d2xQ_starL + delta2[1];
    return ad;
}

GRPSolution solve_sonic(const GRPInput& in, const RiemannFan& fan_, int family,
                        double dt_hint, int order) {
    const GasModel& g = in.gas;
    GRPSolution sol;
    sol.gas = g;
    sol.order = order;
    sol.pattern = fan_;

    const bool mirrored = family > 0;
    const fan::FanSetup setup = mirrored ? right_fan_setup_mirrored(in, fan_)
                                         : left_fan_setup(in, fan_);
    const bool want_q = order >= 2 && !g.special_branch() && std::fabs(g.gamma - 2.0) >= 1e-8;
    fan::LQCoefficients co =
        fan::build_coefficients(setup, fan::head_directional_derivs(setup), want_q);

    const double b0 = std::min(std::max(0.0, co.beta_L), co.beta_R);
    const PrimitiveState q0m = fan::in_fan_state(setup, b0);
    const Vec2 dw = fan::dlam_w(co, b0);
    const double dphi = fan::dlam_phi(co, b0);
    const double dll = fan::dlam_lambda(co, b0);
    // t-axis time derivative of Phi = (S, psi, phi); the last component picks
    // up the fan-curvature term -(D lambda)/2 * dphi/dbeta, dphi/dbeta = 4/(gamma+1)
    const Vec3 dtPhi = {dw[0], dw[1], dphi - 0.5 * dll * 4.0 / (g.gamma + 1.0)};
    Vec3 dtQm = mul(dQ_dPhi(q0m, g), dtPhi);

    sol.q0 = mirrored ? mirror_state(q0m) : q0m;
    sol.dtQ = mirrored ? hadamard(mirror_dt, dtQm) : dtQm;
    sol.region = mirrored ? TAxisRegion::star_right : TAxisRegion::star_left;

    SonicRecord rec;
    rec.family = family;
    if (dt_hint > 0.0) {
        const BetaStar bs = solve_beta_star(co, dt_hint);
        rec.beta_star = bs.beta;
        rec.newton_iters = bs.iters;
    }
    sol.sonic = rec;

    GRPSolution::SonicEval ev;
    ev.setup = setup;
    ev.coeffs = co;
    ev.mirrored = mirrored;
    ev.quadratic = order >= 2;
    sol.sonic_eval = ev;
    return sol;
}

GRPSolution solve_lgrp(const GRPInput& in, Mode mode) {
    gas::validate(in.qL);
    gas::validate(in.qR);
    if (mode == Mode::acoustic || (mode == Mode::automatic && small_jump(in)))
        return solve_acoustic(in, 1);
    return solve_exact(in, 1);
}

GRPSolution solve_qgrp(const GRPInput& in, Mode mode) {
    gas::validate(in.qL);
    gas::validate(in.qR);
    if (mode == Mode::acoustic || (mode == Mode::automatic && small_jump(in)))
        return solve_acoustic(in, 2);
    return solve_exact(in, 2);
}

PrimitiveState taylor_eval(const GRPSolution& sol, double t) {
    if (sol.sonic_eval && t > 0.0) {
        // characteristic expansion: the fan point with initial slope beta*,
        // advanced along its characteristic; plain Taylor in t is useless here
        // because d^2/dt^2 of non-invariant quantities blows up inside the fan
        const auto& ev = *sol.sonic_eval;
        const BetaStar bs = solve_beta_star(ev.coeffs, t);
        const PrimitiveState qb = fan::in_fan_state(ev.setup, bs.beta);
        const gas::Invariants base = gas::riemann_invariants(qb, sol.gas);
        const Vec2 dw = fan::dlam_w(ev.coeffs, bs.beta);
        const double dphi = fan::dlam_phi(ev.coeffs, bs.beta);
        double S = base.S + dw[0] * t;
        double psi = base.psi + dw[1] * t;
        double phi = base.phi + dphi * t;
        if (ev.quadratic) {
            const Vec2 d2w = fan::dlam2_w_any(ev.coeffs, bs.beta);
            const double d2phi = fan::dlam2_phi(ev.coeffs, bs.beta, d2w);
            S += 0.5 * d2w[0] * t * t;
            psi += 0.5 * d2w[1] * t * t;
            phi += 0.5 * d2phi * t * t;
        }
        PrimitiveState q = gas::invariants_to_prim(S, psi, phi, sol.gas);
        return ev.mirrored ? PrimitiveState{q.rho, -q.u, q.p} : q;
    }
    PrimitiveState q = sol.q0;
    q.rho += sol.dtQ[0] * t;
    q.u += sol.dtQ[1] * t;
    q.p += sol.dtQ[2] * t;
    if (sol.dt2Q) {
        q.rho += 0.5 * (*sol.dt2Q)[0] * t * t;
        q.u += 0.5 * (*sol.dt2Q)[1] * t * t;
        q.p += 0.5 * (*sol.dt2Q)[2] * t * t;
    }
    return q;
}

} // namespace grpflow::solver
