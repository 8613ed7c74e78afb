#include "grpflow/gas.hpp"

namespace grpflow::gas {

DuctGeometry DuctGeometry::planar() {
    DuctGeometry geo;
    geo.area = [](double) { return 1.0; };
    geo.dlogA = [](double) { return 0.0; };
    geo.d_dlogA = [](double) { return 0.0; };
    geo.planar_flag = true;
    return geo;
}

DuctGeometry DuctGeometry::from_area(std::function<double(double)> A) {
    DuctGeometry geo;
    geo.area = A;
    geo.dlogA = [A](double x) {
        const double h = 1e-6 * std::max(1.0, std::fabs(x));
        return (std::log(A(x + h)) - std::log(A(x - h))) / (2.0 * h);
    };
    geo.d_dlogA = [A](double x) {
        const double h = 1e-4 * std::max(1.0, std::fabs(x));
        auto dl = [&](double y) {
            return (std::log(A(y + h)) - std::log(A(y - h))) / (2.0 * h);
        };
        return (dl(x + h) - dl(x - h)) / (2.0 * h);
    };
    geo.planar_flag = false;
    return geo;
}

DuctGeometry DuctGeometry::from_closed_form(std::function<double(double)> A,
                                            std::function<double(double)> dlogA,
                                            std::function<double(double)> d_dlogA) {
    DuctGeometry geo;
    geo.area = std::move(A);
    geo.dlogA = std::move(dlogA);
    geo.d_dlogA = std::move(d_dlogA);
    geo.planar_flag = false;
    return geo;
}

void validate(const PrimitiveState& q) {
    if (!(q.rho > vacuum_floor) || !(q.p > vacuum_floor) || !std::isfinite(q.u))
        throw NonPhysicalState("state outside physical range: rho=" + std::to_string(q.rho) +
                               " p=" + std::to_string(q.p));
}

ConservedState prim_to_cons(const PrimitiveState& q, const GasModel& g) {
    return {q.rho, q.rho * q.u, q.p / (g.gamma - 1.0) + 0.5 * q.rho * q.u * q.u};
}

PrimitiveState cons_to_prim(const ConservedState& U, const GasModel& g) {
    if (!(U.rho > vacuum_floor))
        throw NonPhysicalState("cons_to_prim: rho=" + std::to_string(U.rho));
    const double u = U.mom / U.rho;
    const double p = (g.gamma - 1.0) * (U.E - 0.5 * U.mom * u);
    if (!(p > vacuum_floor))
        throw NonPhysicalState("cons_to_prim: internal energy not positive, p=" + std::to_string(p));
    return {U.rho, u, p};
}

double sound_speed(const PrimitiveState& q, const GasModel& g) {
    return std::sqrt(g.gamma * q.p / q.rho);
}

double internal_energy(const PrimitiveState& q, const GasModel& g) {
    return q.p / ((g.gamma - 1.0) * q.rho);
}

Invariants riemann_invariants(const PrimitiveState& q, const GasModel& g) {
    const double c = sound_speed(q, g);
    const double k = 2.0 / (g.gamma - 1.0);
    return {q.p * std::pow(q.rho, -g.gamma), q.u + k * c, q.u - k * c};
}

PrimitiveState invariants_to_prim(double S, double psi, double phi, const GasModel& g) {
    if (!(psi > phi))
        throw DegenerateState("invariants_to_prim: psi <= phi (vacuum limit)");
    if (!(S > 0.0))
        throw DegenerateState("invariants_to_prim: S <= 0");
    const double c = 0.25 * (g.gamma - 1.0) * (psi - phi);
    const double u = 0.5 * (psi + phi);
    const double rho = std::pow(c * c / (g.gamma * S), 1.0 / (g.gamma - 1.0));
    return {rho, u, S * std::pow(rho, g.gamma)};
}

Vec3 source_term_a(double a, const PrimitiveState& q, const GasModel& g) {
    return {-a * q.rho * q.u, 0.0, -a * g.gamma * q.p * q.u};
}

Vec3 source_term(double x, const PrimitiveState& q, const DuctGeometry& geom, const GasModel& g) {
    if (geom.planar_flag)
        return {0.0, 0.0, 0.0};
    return source_term_a(geom.dlogA(x), q, g);
}

Mat3 primitive_jacobian(const PrimitiveState& q, const GasModel& g) {
    Mat3 J;
    J[0][0] = q.u; J[0][1] = q.rho; J[0][2] = 0.0;
    J[1][0] = 0.0; J[1][1] = q.u;   J[1][2] = 1.0 / q.rho;
    J[2][0] = 0.0; J[2][1] = g.gamma * q.p; J[2][2] = q.u;
    return J;
}

std::pair<Mat3, Mat3> conserved_jacobians(const PrimitiveState& q, const GasModel& g) {
    const double gm1 = g.gamma - 1.0;
    Mat3 dU, dF;
    dU[0][0] = 1.0;
    dU[1][0] = q.u; dU[1][1] = q.rho;
    dU[2][0] = 0.5 * q.u * q.u; dU[2][1] = q.rho * q.u; dU[2][2] = 1.0 / gm1;

    dF[0][0] = q.u;        dF[0][1] = q.rho;
    dF[1][0] = q.u * q.u;  dF[1][1] = 2.0 * q.rho * q.u;       dF[1][2] = 1.0;
    dF[2][0] = 0.5 * q.u * q.u * q.u;
    dF[2][1] = g.gamma * q.p / gm1 + 1.5 * q.rho * q.u * q.u;
    dF[2][2] = g.gamma * q.u / gm1;
    return {dU, dF};
}

Vec3 flux(const PrimitiveState& q, const GasModel& g) {
    const double E = q.p / (g.gamma - 1.0) + 0.5 * q.rho * q.u * q.u;
    return {q.rho * q.u, q.rho * q.u * q.u + q.p, (E + q.p) * q.u};
}

Vec3 transport_flux(const PrimitiveState& q, const GasModel& g) {
    const double E = q.p / (g.gamma - 1.0) + 0.5 * q.rho * q.u * q.u;
    return {q.rho * q.u, q.rho * q.u * q.u, (E + q.p) * q.u};
}

Mat3 d_primitive_jacobian(const PrimitiveState& q, const Vec3& V, const GasModel& g) {
    Mat3 d;
    d[0][0] = V[1]; d[0][1] = V[0];
    d[1][1] = V[1]; d[1][2] = -V[0] / (q.rho * q.rho);
    d[2][1] = g.gamma * V[2]; d[2][2] = V[1];
    return d;
}

Mat3 d_cons_state_jacobian(const PrimitiveState& q, const Vec3& V, const GasModel&) {
    Mat3 d;
    d[1][0] = V[1]; d[1][1] = V[0];
    d[2][0] = q.u * V[1];
    d[2][1] = V[0] * q.u + q.rho * V[1];
    return d;
}

Mat3 d_cons_flux_jacobian(const PrimitiveState& q, const Vec3& V, const GasModel& g) {
    const double gm1 = g.gamma - 1.0;
    Mat3 d;
    d[0][0] = V[1]; d[0][1] = V[0];
    d[1][0] = 2.0 * q.u * V[1];
    d[1][1] = 2.0 * (V[0] * q.u + q.rho * V[1]);
    d[2][0] = 1.5 * q.u * q.u * V[1];
    d[2][1] = g.gamma * V[2] / gm1 + 1.5 * (V[0] * q.u * q.u + 2.0 * q.rho * q.u * V[1]);
    d[2][2] = g.gamma * V[1] / gm1;
    return d;
}

Mat3 source_gradient_a(double a, const PrimitiveState& q, const GasModel& g) {
    Mat3 d;
    d[0][0] = -a * q.u;
    d[0][1] = -a * q.rho;
    d[2][1] = -a * g.gamma * q.p;
    d[2][2] = -a * g.gamma * q.u;
    return d;
}

Vec3 source_x_explicit(double da, const PrimitiveState& q, const GasModel& g) {
    return {-da * q.rho * q.u, 0.0, -da * g.gamma * q.p * q.u};
}

Mat2 wminus_matrix(const PrimitiveState& q, const GasModel& g) {
    const double c = sound_speed(q, g);
    Mat2 B;
    B[0][0] = q.u;
    B[1][0] = -std::pow(q.rho, g.gamma - 1.0) / (g.gamma - 1.0);
    B[1][1] = q.u + c;
    return B;
}

Mat2 wzero_matrix(const PrimitiveState& q, const GasModel& g) {
    Mat2 B;
    B[0][0] = q.u; B[0][1] = 1.0 / q.rho;
    B[1][0] = g.gamma * q.p; B[1][1] = q.u;
    return B;
}

Mat2 d_wminus_matrix(const PrimitiveState& q, const Vec3& V, const GasModel& g) {
    const double c = sound_speed(q, g);
    const double dc = c * (0.5 * V[2] / q.p - 0.5 * V[0] / q.rho);
    Mat2 d;
    d[0][0] = V[1];
    d[1][0] = -std::pow(q.rho, g.gamma - 2.0) * V[0];
    d[1][1] = V[1] + dc;
    return d;
}

Mat2 d_wzero_matrix(const PrimitiveState& q, const Vec3& V, const GasModel& g) {
    Mat2 d;
    d[0][0] = V[1]; d[0][1] = -V[0] / (q.rho * q.rho);
    d[1][0] = g.gamma * V[2]; d[1][1] = V[1];
    return d;
}

Vec2 wminus_source(double a, const PrimitiveState& q, const GasModel& g) {
    return {0.0, -a * sound_speed(q, g) * q.u};
}

Vec2 wzero_source(double a, const PrimitiveState& q, const GasModel& g) {
    return {0.0, -a * g.gamma * q.p * q.u};
}

Mat23 grad_wminus(const PrimitiveState& q, const GasModel& g) {
    const double c = sound_speed(q, g);
    const double S = q.p * std::pow(q.rho, -g.gamma);
    const double gm1 = g.gamma - 1.0;
    Mat23 m;
    m[0][0] = -g.gamma * S / q.rho;
    m[0][2] = S / q.p;
    m[1][0] = -c / (gm1 * q.rho);
    m[1][1] = 1.0;
    m[1][2] = c / (gm1 * q.p);
    return m;
}

Mat23 d_grad_wminus(const PrimitiveState& q, const Vec3& V, const GasModel& g) {
    const double c = sound_speed(q, g);
    const double S = q.p * std::pow(q.rho, -g.gamma);
    const double gm1 = g.gamma - 1.0;
    const double dS = -g.gamma * S / q.rho * V[0] + S / q.p * V[2];
    const double dc = c * (0.5 * V[2] / q.p - 0.5 * V[0] / q.rho);
    Mat23 d;
    d[0][0] = -g.gamma * (dS / q.rho - S * V[0] / (q.rho * q.rho));
    d[0][2] = dS / q.p - S * V[2] / (q.p * q.p);
    d[1][0] = -(dc * q.rho - c * V[0]) / (gm1 * q.rho * q.rho);
    d[1][2] = (dc * q.p - c * V[2]) / (gm1 * q.p * q.p);
    return d;
}

EigenSystem primitive_eigensystem(const PrimitiveState& q, const GasModel& g) {
    const double c = sound_speed(q, g);
    const double rc = q.rho * c;
    EigenSystem es;
    es.lambda = {q.u - c, q.u, q.u + c};
    es.right[0] = {q.rho, -c, rc * c};
    es.right[1] = {1.0, 0.0, 0.0};
    es.right[2] = {q.rho, c, rc * c};
    es.left[0] = {0.0, -rc, 1.0};
    es.left[1] = {c * c, 0.0, -1.0};
    es.left[2] = {0.0, rc, 1.0};
    for (int k = 0; k < 3; ++k) {
        const double n = dot(es.left[k], es.right[k]);
        es.left[k] = (1.0 / n) * es.left[k];
    }
    return es;
}

Vec3 cons_derivs_to_prim(const Vec3& U, const Vec3& Ux, const GasModel& g) {
    const double rho = U[0];
    const double u = U[1] / rho;
    const double rx = Ux[0];
    const double ux = (Ux[1] - u * rx) / rho;
    const double px = (g.gamma - 1.0) * (Ux[2] - 0.5 * rx * u * u - rho * u * ux);
    return {rx, ux, px};
}

void cons_derivs_to_prim2(const Vec3& U, const Vec3& Ux, const Vec3& Uxx, const GasModel& g,
                          Vec3& Q, Vec3& Qx, Vec3& Qxx) {
    const double rho = U[0];
    const double u = U[1] / rho;
    const double p = (g.gamma - 1.0) * (U[2] - 0.5 * U[1] * u);
    Q = {rho, u, p};
    Qx = cons_derivs_to_prim(U, Ux, g);
    const double rx = Qx[0], ux = Qx[1];
    const double rxx = Uxx[0];
    const double uxx = (Uxx[1] - ux * rx - u * rxx) / rho - ux * rx / rho;
    const double pxx = (g.gamma - 1.0) *
        (Uxx[2] - (0.5 * rxx * u * u + 2.0 * rx * u * ux + rho * ux * ux + rho * u * uxx));
    Qxx = {rxx, uxx, pxx};
}

} // namespace grpflow::gas
