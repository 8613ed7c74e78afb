#ifndef GRPFLOW_RIEMANN_HPP
#define GRPFLOW_RIEMANN_HPP

#include "grpflow/gas.hpp"

namespace grpflow::riemann {

using gas::GasModel;
using gas::PrimitiveState;

enum class WaveType { rarefaction, shock, contact };

struct WaveKind {
    WaveType type = WaveType::contact;
    bool degenerate = false;  // |p* - p_side| within classification tolerance
    double head = 0.0;        // fastest edge toward its own side
    double tail = 0.0;        // edge adjacent to the star region
    double sigma = 0.0;       // shock or contact speed (head == tail there)
};

struct RiemannFan {
    PrimitiveState left, right;
    PrimitiveState star_left, star_right;
    double p_star = 0.0;
    double u_star = 0.0;
    WaveKind wave_minus, wave_contact, wave_plus;
    GasModel gas{1.4};
    int iterations = 0;
};

RiemannFan solve(const PrimitiveState& qL, const PrimitiveState& qR, const GasModel& g,
                 double tol = 1e-12);

PrimitiveState sample(const RiemannFan& fan, double theta);

enum class TAxisRegion { left, star_left, star_right, right };

struct TAxisLocation {
    bool sonic = false;
    int sonic_family = 0;           // -1: lambda- fan, +1: lambda+ fan
    TAxisRegion region = TAxisRegion::star_left;
};

// sonic iff the t-axis lies strictly inside a rarefaction fan; fan edges
// within 1e-10 of zero are treated as sonic since the star-region system
// degenerates there while the fan formulas stay valid
TAxisLocation classify_t_axis(const RiemannFan& fan);

} // namespace grpflow::riemann

#endif
