#ifndef GRPFLOW_FAN_HPP
#define GRPFLOW_FAN_HPP

#include <optional>

#include "grpflow/gas.hpp"

namespace grpflow::fan {

using gas::GasModel;
using gas::PrimitiveState;

// One lambda- rarefaction fan anchored at the singularity. The lambda+ case is
// handled by the mirror transformation at the solver level.
struct FanSetup {
    PrimitiveState qL;     // state at the fan head
    Vec3 dqL{};            // (d/dx Q) just left of the fan
    Vec3 d2qL{};           // (d^2/dx^2 Q) just left of the fan
    double beta_L = 0.0;   // head slope, = lambda-(qL)
    double beta_R = 0.0;   // tail slope
    double a0 = 0.0;       // (A'/A)(0)
    double a1 = 0.0;       // (A'/A)'(0)
    GasModel gas{1.4};
};

struct HeadDerivs {
    double dS = 0.0, dpsi = 0.0;    // D_{lambda-}(S, psi) at beta_L
    double d2S = 0.0, d2psi = 0.0;  // D_{lambda-}^2(S, psi) at beta_L
};

// directional derivatives of w- = (S, psi) along lambda- in a smooth region
Vec2 dlam_wminus_smooth(const PrimitiveState& q, const Vec3& dq, double a0, const GasModel& g);
// second directional derivatives: returns M_r (acting on d2q) and the remainder
// B_r so that D^2 w- = M_r d2q + B_r
void dlam2_wminus_parts(const PrimitiveState& q, const Vec3& dq, double a0, double a1,
                        const GasModel& g, Mat23& Mr, Vec2& Br);

HeadDerivs head_directional_derivs(const FanSetup& setup);

struct LQCoefficients {
    GasModel gas{1.4};
    double psiL = 0.0, SL = 0.0;
    double beta_L = 0.0, beta_R = 0.0, sL = 0.0;
    double a0 = 0.0, a1 = 0.0;
    HeadDerivs head;
    bool has_q = false;  // Q-level closed forms available (generic gamma only)

    double A[20] = {};   // A[1]..A[19]
    double B[13] = {};   // B[1]..B[12]
    double C[10] = {};   // C[1]..C[9]
    double A2h = 0.0;    // homogeneous psi coefficient (the table's A2)
    double KS = 0.0, KP = 0.0;  // Q-level boundary constants
    double Z1_L = 0.0, Z2_L = 0.0;
};

// want_q requests the second-derivative closed forms; those are only available
// away from gamma = 3, 5/3 (and gamma = 2, where the generic antiderivative
// degenerates) -- BranchUnsupported otherwise
LQCoefficients build_coefficients(const FanSetup& setup, const HeadDerivs& head,
                                  bool want_q);

Vec2 dlam_w(const LQCoefficients& co, double beta);    // D(S, psi)(0, beta)
Vec2 dlam2_w(const LQCoefficients& co, double beta);   // D^2(S, psi); BranchUnsupported if !has_q
double dlam_phi(const LQCoefficients& co, double beta);
double dlam2_phi(const LQCoefficients& co, double beta, const Vec2& d2w);
double dlam_lambda(const LQCoefficients& co, double beta);         // D lambda-
double ddbeta_dlam_lambda(const LQCoefficients& co, double beta);  // d/dbeta of it
Vec2 px_w(const LQCoefficients& co, double beta);      // (dS/dx, dpsi/dx)(0, beta)
PrimitiveState in_fan_state(const FanSetup& setup, double beta);

// adaptive RK fallback for the second-derivative values when the closed form
// is unavailable (special gamma); integrates the Q-equations from beta_L
Vec2 integrate_dlam2_w(const LQCoefficients& co, double beta, double tol = 1e-10);

// D^2(S,psi) via closed form when possible, RK fallback otherwise
Vec2 dlam2_w_any(const LQCoefficients& co, double beta);

} // namespace grpflow::fan

#endif
