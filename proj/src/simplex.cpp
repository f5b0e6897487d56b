#include "patchopt/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace patchopt {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-8;

// Dense tableau: m rows of (total columns + rhs), plus an objective row of
// reduced costs and the current objective value in its rhs slot.
struct Tableau {
    int m, n_total;
    std::vector<double> rows;  // m x (n_total + 1)
    std::vector<double> obj;   // n_total + 1
    std::vector<int> basis;    // basic column per row

    double& a(int r, int c) { return rows[static_cast<std::size_t>(r) * (n_total + 1) + c]; }
    double& rhs(int r) { return a(r, n_total); }

    void pivot(int r, int c) {
        double p = a(r, c);
        for (int j = 0; j <= n_total; ++j) a(r, j) /= p;
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            double f = a(i, c);
            if (std::fabs(f) < kPivotTol) continue;
            for (int j = 0; j <= n_total; ++j) a(i, j) -= f * a(r, j);
        }
        double f = obj[c];
        if (std::fabs(f) >= kPivotTol)
            for (int j = 0; j <= n_total; ++j) obj[j] -= f * a(r, j);
        basis[r] = c;
    }

    // Returns false on unboundedness. `allowed` marks columns that may enter.
    bool optimize(const std::vector<char>& allowed) {
        long iters = 0;
        const long bland_after = 50L * (m + n_total);
        while (true) {
            ++iters;
            bool bland = iters > bland_after;
            int enter = -1;
            if (bland) {
                for (int j = 0; j < n_total; ++j)
                    if (allowed[j] && obj[j] < -kPivotTol) {
                        enter = j;
                        break;
                    }
            } else {
                double best = -kPivotTol;
                for (int j = 0; j < n_total; ++j)
                    if (allowed[j] && obj[j] < best) {
                        best = obj[j];
                        enter = j;
                    }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best_ratio = 0;
            for (int i = 0; i < m; ++i) {
                double aij = a(i, enter);
                if (aij <= kPivotTol) continue;
                double ratio = rhs(i) / aij;
                if (leave < 0 || ratio < best_ratio - kPivotTol ||
                    (std::fabs(ratio - best_ratio) <= kPivotTol &&
                     basis[i] < basis[leave]))
                    leave = i, best_ratio = ratio;
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
    const int n = lp.num_vars;
    const int m = lp.num_rows;
    const int total = n + m;  // original + one artificial per row

    Tableau t;
    t.m = m;
    t.n_total = total;
    t.rows.assign(static_cast<std::size_t>(m) * (total + 1), 0.0);
    t.obj.assign(total + 1, 0.0);
    t.basis.resize(m);
    for (int i = 0; i < m; ++i) {
        double s = lp.b[i] < 0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) t.a(i, j) = s * lp.at(i, j);
        t.rhs(i) = s * lp.b[i];
        t.a(i, n + i) = 1.0;
        t.basis[i] = n + i;
    }
    // phase 1 objective: sum of artificials, expressed in non-basic terms
    for (int j = 0; j <= total; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += t.a(i, j);
        t.obj[j] = (j < n ? -s : (j < total ? 1.0 - s : -s));
    }
    std::vector<char> allowed(total, 1);
    if (!t.optimize(allowed))
        throw ModelError("phase-1 LP unbounded");  // cannot happen for sum >= 0

    double phase1 = -t.obj[total];
    if (phase1 > kFeasTol) {
        LpResult res;
        res.status = LpStatus::Infeasible;
        for (int i = 0; i < m; ++i)
            if (t.basis[i] >= n && t.rhs(i) > kFeasTol) {
                res.certificate_row = i;
                break;
            }
        return res;
    }
    // drive lingering zero-valued artificials out of the basis when possible
    for (int i = 0; i < m; ++i) {
        if (t.basis[i] < n) continue;
        int enter = -1;
        for (int j = 0; j < n; ++j)
            if (std::fabs(t.a(i, j)) > kPivotTol) {
                enter = j;
                break;
            }
        if (enter >= 0) t.pivot(i, enter);
    }

    // phase 2: original objective over original columns only
    std::fill(t.obj.begin(), t.obj.end(), 0.0);
    for (int j = 0; j < n; ++j) t.obj[j] = lp.c[j];
    for (int i = 0; i < m; ++i) {
        int bc = t.basis[i];
        if (bc >= n) continue;
        double f = t.obj[bc];
        if (std::fabs(f) < kPivotTol) continue;
        for (int j = 0; j <= total; ++j) t.obj[j] -= f * t.a(i, j);
    }
    std::fill(allowed.begin() + n, allowed.end(), 0);
    if (!t.optimize(allowed)) {
        LpResult res;
        res.status = LpStatus::Unbounded;
        return res;
    }

    LpResult res;
    res.status = LpStatus::Optimal;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (t.basis[i] < n) res.x[t.basis[i]] = t.rhs(i);
    res.value = 0;
    for (int j = 0; j < n; ++j) res.value += lp.c[j] * res.x[j];
    return res;
}

double lp_residual(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0;
    for (int i = 0; i < lp.num_rows; ++i) {
        double s = -lp.b[i];
        for (int j = 0; j < lp.num_vars; ++j) s += lp.at(i, j) * x[j];
        worst = std::max(worst, std::fabs(s));
    }
    return worst;
}

}  // namespace patchopt
