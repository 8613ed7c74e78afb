#include "grpflow/linsolve.hpp"

#include <cmath>

namespace grpflow::linalg {

std::vector<double> solve(DenseSystem sys) {
    const int n = sys.n;
    std::vector<double> scale(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            scale[i] = std::max(scale[i], std::fabs(sys.at(i, j)));
        if (scale[i] == 0.0)
            throw SingularSystem("zero row in dense system");
    }

    for (int col = 0; col < n; ++col) {
        int piv = -1;
        double best = 0.0;
        for (int i = col; i < n; ++i) {
            const double v = std::fabs(sys.at(i, col)) / scale[i];
            if (v > best) { best = v; piv = i; }
        }
        if (piv < 0 || best < 1e-14)
            throw SingularSystem("pivot below tolerance at column " + std::to_string(col));
        if (piv != col) {
            for (int j = 0; j < n; ++j)
                std::swap(sys.at(piv, j), sys.at(col, j));
            std::swap(sys.rhs[piv], sys.rhs[col]);
            std::swap(scale[piv], scale[col]);
        }
        const double inv = 1.0 / sys.at(col, col);
        for (int j = col; j < n; ++j)
            sys.at(col, j) *= inv;
        sys.rhs[col] *= inv;
        for (int i = 0; i < n; ++i) {
            if (i == col) continue;
            const double f = sys.at(i, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j)
                sys.at(i, j) -= f * sys.at(col, j);
            sys.rhs[i] -= f * sys.rhs[col];
        }
    }
    return sys.rhs;
}

double residual_norm(const DenseSystem& sys, const std::vector<double>& x) {
    double r = 0.0;
    for (int i = 0; i < sys.n; ++i) {
        double ax = 0.0;
        for (int j = 0; j < sys.n; ++j)
            ax += sys.at(i, j) * x[j];
        r = std::max(r, std::fabs(ax - sys.rhs[i]));
    }
    return r;
}

} // namespace grpflow::linalg
