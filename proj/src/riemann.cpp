#include "grpflow/riemann.hpp"

#include <cmath>

namespace grpflow::riemann {

namespace {

// pressure function f_K(p) and derivative for one side
void side_function(double p, const PrimitiveState& q, double c, const GasModel& g,
                   double& f, double& df) {
    const double gam = g.gamma;
    if (p > q.p) {  // shock branch
        const double A = 2.0 / ((gam + 1.0) * q.rho);
        const double B = (gam - 1.0) / (gam + 1.0) * q.p;
        const double root = std::sqrt(A / (p + B));
        f = (p - q.p) * root;
        df = root * (1.0 - 0.5 * (p - q.p) / (p + B));
    } else {        // rarefaction branch
        const double z = (gam - 1.0) / (2.0 * gam);
        f = 2.0 * c / (gam - 1.0) * (std::pow(p / q.p, z) - 1.0);
        df = std::pow(p / q.p, -(gam + 1.0) / (2.0 * gam)) / (q.rho * c);
    }
}

double two_rarefaction_guess(const PrimitiveState& qL, const PrimitiveState& qR,
                             double cL, double cR, const GasModel& g) {
    const double z = (g.gamma - 1.0) / (2.0 * g.gamma);
    const double num = cL + cR - 0.5 * (g.gamma - 1.0) * (qR.u - qL.u);
    const double den = cL / std::pow(qL.p, z) + cR / std::pow(qR.p, z);
    return std::pow(std::max(num / den, 1e-14), 1.0 / z);
}

} // namespace

RiemannFan solve(const PrimitiveState& qL, const PrimitiveState& qR, const GasModel& g,
                 double tol) {
    gas::validate(qL);
    gas::validate(qR);
    const double gam = g.gamma;
    const double cL = gas::sound_speed(qL, g);
    const double cR = gas::sound_speed(qR, g);

    // positivity (no vacuum): psi_L > phi_R
    const double du_crit = 2.0 * (cL + cR) / (gam - 1.0);
    if (du_crit <= qR.u - qL.u)
        throw VacuumFormation("vacuum generated by receding states");

    auto eval = [&](double p, double& f, double& df) {
        double fL, dL, fR, dR;
        side_function(p, qL, cL, g, fL, dL);
        side_function(p, qR, cR, g, fR, dR);
        f = fL + fR + (qR.u - qL.u);
        df = dL + dR;
    };

    double p = std::max(two_rarefaction_guess(qL, qR, cL, cR, g), 1e-14);
    double f, df;
    int it = 0;
    const int max_it = 100;
    bool converged = false;
    for (; it < max_it; ++it) {
        eval(p, f, df);
        const double dp = f / df;
        double pn = p - dp;
        if (pn <= 0.0)
            pn = 0.5 * p;
        if (std::fabs(pn - p) <= tol * std::max(pn, p)) {
            p = pn;
            converged = true;
            break;
        }
        p = pn;
    }
    if (!converged) {
        // bisection fallback: f is monotone increasing in p
        double lo = 1e-14 * std::min(qL.p, qR.p), hi = std::max({qL.p, qR.p, p});
        double fv, dv;
        eval(hi, fv, dv);
        while (fv < 0.0) { hi *= 4.0; eval(hi, fv, dv); if (hi > 1e300) throw NoConvergence("no bracket"); }
        for (int k = 0; k < 200 && hi - lo > tol * hi; ++k) {
            const double mid = 0.5 * (lo + hi);
            eval(mid, fv, dv);
            (fv < 0.0 ? lo : hi) = mid;
        }
        p = 0.5 * (lo + hi);
        if (hi - lo > 10.0 * tol * hi)
            throw NoConvergence("star pressure iteration failed");
    }

    RiemannFan fan;
    fan.gas = g;
    fan.left = qL;
    fan.right = qR;
    fan.p_star = p;
    fan.iterations = it + 1;
    double fL, dL, fR, dR;
    side_function(p, qL, cL, g, fL, dL);
    side_function(p, qR, cR, g, fR, dR);
    fan.u_star = 0.5 * (qL.u + qR.u) + 0.5 * (fR - fL);

    const double gp1 = gam + 1.0, gm1 = gam - 1.0;
    auto classify = [&](const PrimitiveState& q, double c, int family) {
        WaveKind w;
        w.degenerate = std::fabs(p - q.p) <= 1e-12 * q.p;
        if (p > q.p && !w.degenerate) {
            w.type = WaveType::shock;
            const double ms = std::sqrt(0.5 * (gp1 * p / q.p + gm1) / gam);
            w.sigma = q.u + family * c * ms;
            w.head = w.tail = w.sigma;
        } else {
            w.type = WaveType::rarefaction;
            const double cs = c * std::pow(p / q.p, gm1 / (2.0 * gam));
            w.head = q.u + family * c;
            w.tail = fan.u_star + family * cs;
        }
        return w;
    };
    fan.wave_minus = classify(qL, cL, -1);
    fan.wave_plus = classify(qR, cR, +1);
    fan.wave_contact.type = WaveType::contact;
    fan.wave_contact.sigma = fan.u_star;
    fan.wave_contact.head = fan.wave_contact.tail = fan.u_star;

    auto star_density = [&](const PrimitiveState& q) {
        if (p > q.p) {
            const double r = p / q.p;
            const double b = gm1 / gp1;
            return q.rho * (r + b) / (b * r + 1.0);
        }
        return q.rho * std::pow(p / q.p, 1.0 / gam);
    };
    fan.star_left = {star_density(qL), fan.u_star, p};
    fan.star_right = {star_density(qR), fan.u_star, p};
    fan.wave_contact.degenerate = std::fabs(fan.star_left.rho - fan.star_right.rho) <=
                                  1e-12 * std::max(fan.star_left.rho, fan.star_right.rho);
    return fan;
}

PrimitiveState sample(const RiemannFan& fan, double theta) {
    const GasModel& g = fan.gas;
    const double gam = g.gamma, gm1 = gam - 1.0, gp1 = gam + 1.0;

    auto in_left_fan = [&](double th) {
        // state with lambda-(Q) = th, S = S_L, psi = psi_L
        const double cL = gas::sound_speed(fan.left, g);
        const double c = (2.0 * cL + gm1 * (fan.left.u - th)) / gp1;
        const double u = th + c;
        const double rho = fan.left.rho * std::pow(c / cL, 2.0 / gm1);
        const double p = fan.left.p * std::pow(c / cL, 2.0 * gam / gm1);
        return PrimitiveState{rho, u, p};
    };
    auto in_right_fan = [&](double th) {
        const double cR = gas::sound_speed(fan.right, g);
        const double c = (2.0 * cR - gm1 * (fan.right.u - th)) / gp1;
        const double u = th - c;
        const double rho = fan.right.rho * std::pow(c / cR, 2.0 / gm1);
        const double p = fan.right.p * std::pow(c / cR, 2.0 * gam / gm1);
        return PrimitiveState{rho, u, p};
    };

    if (theta <= fan.u_star) {
        const WaveKind& w = fan.wave_minus;
        if (w.type == WaveType::shock)
            return theta < w.sigma ? fan.left : fan.star_left;
        if (theta < w.head) return fan.left;
        if (theta > w.tail) return fan.star_left;
        return in_left_fan(theta);
    }
    const WaveKind& w = fan.wave_plus;
    if (w.type == WaveType::shock)
        return theta > w.sigma ? fan.right : fan.star_right;
    if (theta > w.head) return fan.right;
    if (theta < w.tail) return fan.star_right;
    return in_right_fan(theta);
}

TAxisLocation classify_t_axis(const RiemannFan& fan) {
    constexpr double edge_tol = 1e-10;
    TAxisLocation loc;
    if (fan.wave_minus.type == WaveType::rarefaction && !fan.wave_minus.degenerate &&
        fan.wave_minus.head <= edge_tol && fan.wave_minus.tail >= -edge_tol) {
        loc.sonic = true;
        loc.sonic_family = -1;
        return loc;
    }
    if (fan.wave_plus.type == WaveType::rarefaction && !fan.wave_plus.degenerate &&
        fan.wave_plus.head >= -edge_tol && fan.wave_plus.tail <= edge_tol) {
        loc.sonic = true;
        loc.sonic_family = +1;
        return loc;
    }
    const double lead_left = fan.wave_minus.type == WaveType::shock ? fan.wave_minus.sigma
                                                                    : fan.wave_minus.head;
    const double lead_right = fan.wave_plus.type == WaveType::shock ? fan.wave_plus.sigma
                                                                    : fan.wave_plus.head;
    if (lead_left > 0.0)
        loc.region = TAxisRegion::left;
    else if (lead_right < 0.0)
        loc.region = TAxisRegion::right;
    else
        loc.region = fan.u_star >= 0.0 ? TAxisRegion::star_left : TAxisRegion::star_right;
    return loc;
}

} // namespace grpflow::riemann
