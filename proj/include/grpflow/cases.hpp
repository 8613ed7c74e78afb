#ifndef GRPFLOW_CASES_HPP
#define GRPFLOW_CASES_HPP

#include <optional>
#include <string>
#include <vector>

#include "grpflow/scheme.hpp"

namespace grpflow::cases {

using gas::GasModel;
using gas::PrimitiveState;

// quadratic initial data for one side of a derivative-accuracy case
struct SidePoly {
    Vec3 c0{}, c1{}, c2{};  // per component: value + c1 x + c2 x^2
    PrimitiveState at(double x) const {
        return {c0[0] + c1[0] * x + c2[0] * x * x,
                c0[1] + c1[1] * x + c2[1] * x * x,
                c0[2] + c1[2] * x + c2[2] * x * x};
    }
    Vec3 d1(double x) const {
        return {c1[0] + 2.0 * c2[0] * x, c1[1] + 2.0 * c2[1] * x, c1[2] + 2.0 * c2[2] * x};
    }
    Vec3 d2() const { return {2.0 * c2[0], 2.0 * c2[1], 2.0 * c2[2]}; }
};

enum class Category { solver_accuracy, scheme };
enum class ReferenceKind { exact, steady, fine_mesh, none };

struct CaseSpec {
    std::string name;
    Category category = Category::scheme;
    ReferenceKind reference = ReferenceKind::none;
    fv::Problem problem;
    double t_end = 1.0;
    int default_cells = 100;
    // derivative-accuracy cases
    double t0 = 0.0;
    std::optional<SidePoly> left_poly, right_poly;

    solver::GRPInput grp_input() const;
};

const std::vector<CaseSpec>& catalog();
const CaseSpec& find_case(const std::string& name);

PrimitiveState sod_exact(double x, double t, const GasModel& g);

enum class NozzleBranch { subsonic, supersonic, transonic };
double nozzle_area(double x);
double nozzle_mach(double area, NozzleBranch branch, const GasModel& g);
PrimitiveState nozzle_steady(double x, NozzleBranch branch, const GasModel& g);

struct ReferenceSeries {
    std::string case_name;
    int n_cells = 0;
    double gamma = 1.4;
    double correction_window = 0.0;
    std::vector<double> times;   // strictly increasing, starts at 0
    std::vector<Vec3> states;    // primitive (rho, u, p) at x = 0

    PrimitiveState eval(double t) const;
};

ReferenceSeries godunov_reference(const CaseSpec& spec, int n_cells, double t_max);

void save_reference(const ReferenceSeries& ref, const std::string& path);
std::optional<ReferenceSeries> load_reference(const std::string& path);

// independent adaptive-RK integration of the transport ODEs for the fan
// derivatives; never touches the closed-form evaluators
struct LQOracleValues {
    std::vector<double> beta;
    std::vector<Vec2> dw;    // D(S, psi)
    std::vector<Vec2> d2w;   // D^2(S, psi)
};
LQOracleValues rk_lq_oracle(const fan::FanSetup& setup, const fan::HeadDerivs& head,
                            const std::vector<double>& beta_grid, double tol = 1e-11);

struct TimeDerivEstimate {
    Vec3 dtQ{}, dt2Q{};
    Vec3 err1{}, err2{};  // Richardson error bars
};
TimeDerivEstimate fd_time_derivs(const ReferenceSeries& series, double h);

} // namespace grpflow::cases

#endif
