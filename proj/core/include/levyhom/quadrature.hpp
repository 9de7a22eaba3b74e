#pragma once

#include <functional>
#include <vector>

namespace levyhom {

// Gauss-Legendre nodes/weights on [-1,1], computed once per order by
// Newton iteration on the Legendre recurrence.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

// Integrate f over [a,b] with one Gauss-Legendre panel.
double gl_panel(const std::function<double(double)>& f, double a, double b, int order);

struct PanelResult {
    double value = 0.0;
    double error = 0.0;   // estimated, from GL order doubling per panel
    bool converged = true;
};

// Adaptive bisection with an embedded GL16/GL32 error estimate. Refinement
// stops at the tolerance, at a 1e-14 relative round-off floor, or at
// max_depth, whichever comes first; the achieved estimate is reported.
PanelResult integrate_adaptive(const std::function<double(double)>& f,
                               double a, double b, double abs_tol,
                               int max_depth = 26);

}  // namespace levyhom
