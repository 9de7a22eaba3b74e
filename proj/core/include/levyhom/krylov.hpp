#pragma once

#include <vector>

#include "levyhom/grid.hpp"

namespace levyhom {

struct KrylovResult {
    Field x;
    std::vector<double> residual_history;  // relative ||r|| / ||b||
    bool converged = false;
    int iterations = 0;
};

// Right-preconditioned BiCGSTAB (transpose-free; the drift part of our
// operators is skew). Residual history records true relative residuals.
KrylovResult krylov_solve(const LinearOperator& op, const Field& rhs,
                          double tol, int max_iter);

// As above but throws ConvergenceError on failure (carrying the residual).
Field krylov_solve_or_throw(const LinearOperator& op, const Field& rhs,
                            double tol, int max_iter);

}  // namespace levyhom
