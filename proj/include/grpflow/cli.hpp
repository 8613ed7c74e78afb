#ifndef GRPFLOW_CLI_HPP
#define GRPFLOW_CLI_HPP

#include <map>
#include <string>
#include <vector>

#include "grpflow/cases.hpp"

namespace grpflow::cli {

struct Options {
    std::string command;
    std::string case_name = "sod";
    std::string solver = "qgrp_inf";  // lgrp1 | lgrp_inf | qgrp1 | qgrp_inf
    int order = 2;
    int cells = 0;  // 0: case default
    double cfl = 0.5;
    std::string mode = "auto";  // exact | acoustic | auto
    double t_end = -1.0;
    std::string out_dir = "out";
    int ref_cells = 20000;
    int levels = 4;
    std::string test = "smooth_scheme";  // for `convergence`
    std::string config_file;
};

// flat key=value config with [case] sections; command-line flags win
void apply_config(Options& opt);

struct RunManifest {
    std::string command;
    std::string case_name;
    std::vector<std::pair<std::string, std::string>> params;
    std::string line() const;
};

struct SolverErrorRow {
    double t = 0.0;
    double error = 0.0;
    double order = 0.0;  // NaN in the first row
};

std::vector<SolverErrorRow> solver_error_table(const cases::CaseSpec& spec,
                                               const std::string& solver,
                                               const std::vector<double>& times,
                                               const cases::ReferenceSeries& ref);

std::vector<double> default_times(const cases::CaseSpec& spec);

// cached fine-mesh reference (generates and saves on a miss); t_max < 0 runs
// slightly past the case's t0
cases::ReferenceSeries get_reference(const cases::CaseSpec& spec, int n_cells,
                                     const std::string& cache_dir, double t_max = -1.0);

int cmd_run(const Options& opt);
int cmd_solver_test(const Options& opt);
int cmd_convergence(const Options& opt);
int cmd_reference(const Options& opt);
int dispatch(const Options& opt);

} // namespace grpflow::cli

#endif
