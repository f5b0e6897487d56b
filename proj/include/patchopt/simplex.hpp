#pragma once

#include <vector>

#include "patchopt/errors.hpp"

namespace patchopt {

// minimize c.x  subject to  A x = b,  x >= 0   (A dense, row-major, m x n)
struct LinearProgram {
    int num_vars = 0;
    int num_rows = 0;
    std::vector<double> c;
    std::vector<double> A;
    std::vector<double> b;

    double& at(int r, int col) { return A[static_cast<std::size_t>(r) * num_vars + col]; }
    double at(int r, int col) const {
        return A[static_cast<std::size_t>(r) * num_vars + col];
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double value = 0;
    int certificate_row = -1;  // row whose artificial stayed basic (Infeasible)
};

// Two-phase dense simplex. Dantzig pricing with a Bland fallback after a
// stall, lowest-index tie breaks throughout, so the result is deterministic.
LpResult solve_lp(const LinearProgram& lp);

// max_r |A x - b| for diagnostics and tests.
double lp_residual(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace patchopt
