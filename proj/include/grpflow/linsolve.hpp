#ifndef GRPFLOW_LINSOLVE_HPP
#define GRPFLOW_LINSOLVE_HPP

#include <vector>

#include "grpflow/types.hpp"

namespace grpflow::linalg {

// Small dense system solved by Gauss-Jordan elimination with row partial
// pivoting. Rows are scale-equilibrated before pivot comparison because the
// derivative systems mix O(1) and O(c^2) entries.
struct DenseSystem {
    int n = 0;
    std::vector<double> m;    // row-major n*n
    std::vector<double> rhs;  // n

    explicit DenseSystem(int size) : n(size), m(size * size, 0.0), rhs(size, 0.0) {}
    double& at(int i, int j) { return m[i * n + j]; }
    double at(int i, int j) const { return m[i * n + j]; }
};

std::vector<double> solve(DenseSystem sys);  // throws SingularSystem

double residual_norm(const DenseSystem& sys, const std::vector<double>& x);

} // namespace grpflow::linalg

#endif
