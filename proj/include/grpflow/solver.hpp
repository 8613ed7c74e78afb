#ifndef GRPFLOW_SOLVER_HPP
#define GRPFLOW_SOLVER_HPP

#include <optional>
#include <vector>

#include "grpflow/fan.hpp"
#include "grpflow/riemann.hpp"

namespace grpflow::solver {

using gas::GasModel;
using gas::PrimitiveState;

struct GRPInput {
    PrimitiveState qL, qR;
    Vec3 dqL{}, dqR{};
    std::optional<Vec3> d2qL, d2qR;
    double a0 = 0.0;  // (A'/A)(0)
    double a1 = 0.0;  // (A'/A)'(0)
    GasModel gas{1.4};
    // automatic-mode switch: relative jump below this solves the acoustic way
    double acoustic_threshold = 1e-6;
};

enum class Mode { exact, acoustic, automatic };

struct ShockAccel {
    int family = 0;       // -1 or +1
    double sigma = 0.0;
    double dsig = 0.0;    // D_sigma sigma
    double d2sig = 0.0;   // D_sigma^2 sigma (QGRP only)
};

struct SonicRecord {
    int family = 0;          // fan containing the t-axis
    double beta_star = 0.0;  // root for the dt_hint used at solve time
    int newton_iters = 0;
};

struct GRPSolution {
    PrimitiveState q0;            // U(0, 0+)
    Vec3 dtQ{};                   // d/dt (rho, u, p) at (0, 0+)
    std::optional<Vec3> dt2Q;     // second time derivatives (QGRP, nonsonic)
    riemann::RiemannFan pattern;
    std::vector<ShockAccel> shock_accels;
    std::optional<SonicRecord> sonic;
    riemann::TAxisRegion region = riemann::TAxisRegion::star_left;
    int order = 1;                // 1: linear, 2: quadratic solver
    double residual = 0.0;        // linear-system residual (diagnostic)

    // star-side spatial derivatives (diagnostics / tests)
    Vec3 dxQ_starL{}, dxQ_starR{};
    std::optional<Vec3> d2xQ_starL, d2xQ_starR;

    // sonic evaluation pack
    struct SonicEval {
        fan::FanSetup setup;
        fan::LQCoefficients coeffs;
        bool mirrored = false;
        bool quadratic = false;
    };
    std::optional<SonicEval> sonic_eval;
    GasModel gas{1.4};
};

// row builders (assembled against the unknown layout by the solvers; exposed
// for direct testing)
struct Rows {
    int n = 0;                                   // number of rows
    double star[3][3] = {};                      // coefficients on the inner star block
    double accel[3] = {};                        // coefficient on the shock-acceleration unknown
    double other[3][3] = {};                     // coefficients on the other star block (contact)
    double rhs[3] = {};
};

Rows rarefaction_rows(const fan::LQCoefficients& co, const PrimitiveState& q_star,
                      double a0, const GasModel& g, bool mirrored);
Rows contact_rows(const PrimitiveState& starL, const PrimitiveState& starR,
                  double a0, const GasModel& g);
Rows shock_rows(const PrimitiveState& q_outer, const Vec3& dq_outer,
                const PrimitiveState& q_star, double sigma,
                double a0, double a1, const GasModel& g);

GRPSolution solve_lgrp(const GRPInput& input, Mode mode = Mode::exact);
GRPSolution solve_qgrp(const GRPInput& input, Mode mode = Mode::exact);

// sonic case: t-axis inside a rarefaction fan; dt_hint sets the root used for
// the recorded beta_star (taylor_eval re-solves per evaluation time)
GRPSolution solve_sonic(const GRPInput& input, const riemann::RiemannFan& fan_,
                        int family, double dt_hint, int order);

struct AcousticDerivs {
    Vec3 dxQ_starL{}, dxQ_starR{};
    std::optional<Vec3> d2xQ_starL, d2xQ_starR;
};
AcousticDerivs solve_acoustic_derivs(const GRPInput& input, int order);

GRPInput mirror(const GRPInput& input);
GRPSolution unmirror(GRPSolution sol);

PrimitiveState taylor_eval(const GRPSolution& sol, double t);

// time derivatives from spatial ones in a smooth region (Cauchy-Kowalewski)
Vec3 time_deriv(const PrimitiveState& q, const Vec3& dxQ, double a0, const GasModel& g);
Vec3 time_deriv2(const PrimitiveState& q, const Vec3& dxQ, const Vec3& d2xQ,
                 double a0, double a1, const GasModel& g);

} // namespace grpflow::solver

#endif
