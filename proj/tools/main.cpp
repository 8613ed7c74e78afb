#include <CLI11.hpp>

#include "grpflow/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"GRP-based finite volume solvers for duct flow"};
    app.require_subcommand(1);
    grpflow::cli::Options opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--case", opt.case_name, "registered case name");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--config", opt.config_file, "key=value config file");
    };

    CLI::App* run = app.add_subcommand("run", "advance a benchmark case and dump profiles");
    add_common(run);
    run->add_option("--order", opt.order, "scheme order (2 or 3)");
    run->add_option("--cells", opt.cells, "cell count (0: case default)");
    run->add_option("--cfl", opt.cfl, "CFL number");
    run->add_option("--mode", opt.mode, "grp mode: exact|acoustic|auto");
    run->add_option("--t-end", opt.t_end, "final time override");

    CLI::App* st = app.add_subcommand("solver-test", "interface-solver accuracy table");
    add_common(st);
    st->add_option("--solver", opt.solver, "lgrp1|lgrp_inf|qgrp1|qgrp_inf");
    st->add_option("--ref-cells", opt.ref_cells, "reference mesh size");

    CLI::App* cv = app.add_subcommand("convergence", "grid-refinement order study");
    add_common(cv);
    cv->add_option("--test", opt.test, "smooth_scheme|solver");
    cv->add_option("--order", opt.order, "scheme order");
    cv->add_option("--cfl", opt.cfl, "CFL number");
    cv->add_option("--levels", opt.levels, "refinement levels");
    cv->add_option("--solver", opt.solver, "solver for --test solver");
    cv->add_option("--ref-cells", opt.ref_cells, "reference mesh size");

    CLI::App* rf = app.add_subcommand("reference", "precompute and cache a reference series");
    add_common(rf);
    rf->add_option("--ref-cells", opt.ref_cells, "reference mesh size");

    CLI11_PARSE(app, argc, argv);
    opt.command = app.get_subcommands().front()->get_name();
    try {
        grpflow::cli::apply_config(opt);
        return grpflow::cli::dispatch(opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
