#ifndef GRPFLOW_GAS_HPP
#define GRPFLOW_GAS_HPP

#include <functional>

#include "grpflow/types.hpp"

namespace grpflow::gas {

constexpr double vacuum_floor = 1e-13;

// gamma-law gas; the analytic fan formulas change form at gamma = 3 and 5/3,
// so the branch is fixed once at construction (exact match within 1e-14).
struct GasModel {
    double gamma = 1.4;
    bool is_gamma3 = false;
    bool is_gamma53 = false;

    explicit GasModel(double g = 1.4) : gamma(g) {
        if (!(g > 1.0))
            throw NonPhysicalState("GasModel: gamma must exceed 1");
        is_gamma3 = std::fabs(g - 3.0) <= 1e-14;
        is_gamma53 = std::fabs(g - 5.0 / 3.0) <= 1e-14;
    }
    bool special_branch() const { return is_gamma3 || is_gamma53; }
};

struct PrimitiveState {
    double rho = 1.0;
    double u = 0.0;
    double p = 1.0;
};

struct ConservedState {
    double rho = 1.0;
    double mom = 0.0;
    double E = 2.5;
};

// Duct cross-section. dlogA = A'/A and d_dlogA = (A'/A)'; these two are what
// the fan coefficients and source terms consume.
struct DuctGeometry {
    std::function<double(double)> area;
    std::function<double(double)> dlogA;
    std::function<double(double)> d_dlogA;
    bool planar_flag = true;

    static DuctGeometry planar();
    // closed forms unknown: centered differences of log A, h = 1e-6*max(1,|x|)
    static DuctGeometry from_area(std::function<double(double)> A);
    static DuctGeometry from_closed_form(std::function<double(double)> A,
                                         std::function<double(double)> dlogA,
                                         std::function<double(double)> d_dlogA);
};

struct Invariants {
    double S;    // p rho^-gamma
    double psi;  // u + 2c/(gamma-1)
    double phi;  // u - 2c/(gamma-1)
};

ConservedState prim_to_cons(const PrimitiveState& q, const GasModel& g);
PrimitiveState cons_to_prim(const ConservedState& U, const GasModel& g);
double sound_speed(const PrimitiveState& q, const GasModel& g);
double internal_energy(const PrimitiveState& q, const GasModel& g);
Invariants riemann_invariants(const PrimitiveState& q, const GasModel& g);
PrimitiveState invariants_to_prim(double S, double psi, double phi, const GasModel& g);

void validate(const PrimitiveState& q);

inline Vec3 to_vec(const PrimitiveState& q) { return {q.rho, q.u, q.p}; }
inline PrimitiveState from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
inline Vec3 to_vec(const ConservedState& U) { return {U.rho, U.mom, U.E}; }

// source of the primitive system: H = -(A'/A) (rho u, 0, rho c^2 u)
Vec3 source_term(double x, const PrimitiveState& q, const DuctGeometry& geom, const GasModel& g);
Vec3 source_term_a(double a, const PrimitiveState& q, const GasModel& g);  // given a = A'/A

Mat3 primitive_jacobian(const PrimitiveState& q, const GasModel& g);  // J
// (grad_Q U, grad_Q F) with F the full flux (rho u, rho u^2 + p, (E+p) u)
std::pair<Mat3, Mat3> conserved_jacobians(const PrimitiveState& q, const GasModel& g);

Vec3 flux(const PrimitiveState& q, const GasModel& g);            // full flux
Vec3 transport_flux(const PrimitiveState& q, const GasModel& g);  // (rho u, rho u^2, (E+p)u)

// directional derivatives in Q-direction V, needed by the derivative systems
Mat3 d_primitive_jacobian(const PrimitiveState& q, const Vec3& V, const GasModel& g);
Mat3 d_cons_state_jacobian(const PrimitiveState& q, const Vec3& V, const GasModel& g);
Mat3 d_cons_flux_jacobian(const PrimitiveState& q, const Vec3& V, const GasModel& g);

// grad_Q of the primitive source at fixed a = A'/A, and its explicit x-part
Mat3 source_gradient_a(double a, const PrimitiveState& q, const GasModel& g);
Vec3 source_x_explicit(double da, const PrimitiveState& q, const GasModel& g);  // da = (A'/A)'

// transport matrices of the invariant pairs
Mat2 wminus_matrix(const PrimitiveState& q, const GasModel& g);  // B_-
Mat2 wzero_matrix(const PrimitiveState& q, const GasModel& g);   // B_0
Mat2 d_wminus_matrix(const PrimitiveState& q, const Vec3& V, const GasModel& g);
Mat2 d_wzero_matrix(const PrimitiveState& q, const Vec3& V, const GasModel& g);
Vec2 wminus_source(double a, const PrimitiveState& q, const GasModel& g);  // H_-
Vec2 wzero_source(double a, const PrimitiveState& q, const GasModel& g);   // H_0

Mat23 grad_wminus(const PrimitiveState& q, const GasModel& g);  // rows grad S, grad psi
Mat23 d_grad_wminus(const PrimitiveState& q, const Vec3& V, const GasModel& g);

// left/right eigenvectors of J, normalized so l_k . r_k = 1
struct EigenSystem {
    Vec3 lambda;
    Vec3 left[3];
    Vec3 right[3];
};
EigenSystem primitive_eigensystem(const PrimitiveState& q, const GasModel& g);

// conversions of spatial derivatives between primitive and conserved variables
Vec3 cons_derivs_to_prim(const Vec3& U, const Vec3& Ux, const GasModel& g);
void cons_derivs_to_prim2(const Vec3& U, const Vec3& Ux, const Vec3& Uxx, const GasModel& g,
                          Vec3& Q, Vec3& Qx, Vec3& Qxx);

} // namespace grpflow::gas

#endif
