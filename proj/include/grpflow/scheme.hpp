#ifndef GRPFLOW_SCHEME_HPP
#define GRPFLOW_SCHEME_HPP

#include <functional>
#include <string>
#include <vector>

#include "grpflow/solver.hpp"

namespace grpflow::fv {

using gas::ConservedState;
using gas::DuctGeometry;
using gas::GasModel;
using gas::PrimitiveState;

enum class BCKind { transmissive, reflective, periodic, nozzle_inflow, nozzle_outflow };

struct Problem {
    double x_min = 0.0, x_max = 1.0;
    GasModel gas{1.4};
    DuctGeometry geometry = DuctGeometry::planar();
    std::function<PrimitiveState(double)> initial;
    BCKind bc_left = BCKind::transmissive;
    BCKind bc_right = BCKind::transmissive;
    double inflow_rho0 = 1.0, inflow_p0 = 1.0;  // stagnation state for nozzle inflow
    double outflow_p = 1.0;                     // back pressure for nozzle outflow
};

struct Grid {
    double x_min = 0.0, x_max = 1.0;
    int n_cells = 0;
    double dx = 0.0;

    Grid() = default;
    Grid(double a, double b, int n) : x_min(a), x_max(b), n_cells(n), dx((b - a) / n) {}
    double center(int i) const { return x_min + (i + 0.5) * dx; }
    double iface(int i) const { return x_min + i * dx; }  // i in [0, n_cells]
};

struct SchemeConfig {
    int order = 2;  // 2 or 3
    double cfl = 0.5;
    solver::Mode grp_mode = solver::Mode::automatic;
    double acoustic_threshold = 1e-6;
    int n_cells = 100;
    double t_end = 1.0;
    std::vector<double> snapshot_times;
    int max_steps = 2000000;
};

// per-cell polynomial in the scaled coordinate xi = (x - x_j)/dx, xi in [-1/2, 1/2]
struct CellPoly {
    Vec3 c0{}, c1{}, c2{};  // value, slope, curvature coefficients per component
};

// reconstructions; `cells` carries ghost cells (ng on each side)
std::vector<CellPoly> reconstruct_muscl(const std::vector<Vec3>& prim, int ng);
std::vector<CellPoly> reconstruct_weno3(const std::vector<Vec3>& cons, int ng, const GasModel& g);

double compute_dt(const std::vector<PrimitiveState>& states, const Grid& grid, double cfl,
                  const GasModel& g);

struct Snapshot {
    double t = 0.0;
    std::vector<PrimitiveState> prim;
};

struct Diagnostics {
    std::vector<double> time;
    std::vector<double> dt;
    std::vector<Vec3> totals;     // area-weighted conserved totals
    std::vector<double> residual; // max |dU|/dt over cells
};

struct RunResult {
    Grid grid;
    double t_final = 0.0;
    int steps = 0;
    std::vector<PrimitiveState> prim;
    std::vector<ConservedState> cons;
    Diagnostics diag;
    std::vector<Snapshot> snapshots;
};

class Stepper {
  public:
    Stepper(const Problem& prob, const SchemeConfig& config);

    double step();          // one time step, returns dt
    double step(double dt_cap);
    void fill_ghosts();
    double max_wavespeed() const;
    double time() const { return t_; }
    const Grid& grid() const { return grid_; }
    Vec3 totals() const;
    double last_residual() const { return residual_; }
    std::vector<PrimitiveState> primitives() const;
    std::vector<ConservedState> conserved() const;
    const std::vector<Vec3>& raw() const { return cons_; }
    std::vector<Vec3>& raw() { return cons_; }
    int ghost() const { return ng_; }

  private:
    Problem prob_;
    SchemeConfig cfg_;
    Grid grid_;
    int ng_ = 4;
    double t_ = 0.0;
    double residual_ = 0.0;
    std::vector<Vec3> cons_;     // size n + 2 ng
    std::vector<double> abar_;   // cell-average area
    std::vector<double> aif_;    // interface area
};

void apply_bc(std::vector<Vec3>& cons, int ng, const Problem& prob, const Grid& grid);

RunResult run(const Problem& prob, const SchemeConfig& config);

} // namespace grpflow::fv

#endif
