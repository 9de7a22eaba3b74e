#pragma once

#include <optional>
#include <vector>

#include "levyhom/effective.hpp"
#include "levyhom/environment.hpp"
#include "levyhom/grid.hpp"
#include "levyhom/kernels.hpp"

namespace levyhom {

// Smooth periodized-Gaussian bump centered at the box midpoint; defined in
// closed form so every grid resolution samples the same function.
struct SourceSpec {
    double width = 1.5;
    double amplitude = 1.0;
};

Field make_source(const GridPtr& grid, const SourceSpec& spec);
double source_value(const SourceSpec& spec, const Vec& x, double box, int dim);

struct ResolventProblem {
    double lambda = 1.0;
    SourceSpec source;
    double epsilon = 1.0;
    LevyKernel kernel;
    StreamField stream;
    int box_periods = 4;  // box = box_periods * stream period
    double tol = 1e-11;
    int max_iter = 6000;
    int threads = 1;

    double box() const { return box_periods * stream.period(); }
};

struct ScaledSolveInfo {
    double residual = 0.0;
    int iterations = 0;
    double linf_ratio = 0.0;       // ||u||_inf * lambda / ||h||_inf
    double l2_ratio = 0.0;         // ||u||_2 * lambda / ||h||_2  (box L2)
    double drift_pairing = 0.0;    // <eps^{-1} b(./eps) . grad u, u>
    double dirichlet_energy = 0.0; // eps-scaled nonlocal energy, box-integrated
    double wraparound_mass = 0.0;  // |u| mass outside B(center, box/3), relative
};

// Solves lambda u - L0^eps u - eps^{-1} <b(x/eps), grad u> = h on the box.
// The source defaults to the problem's bump; tests may override it.
Field solve_scaled(const ResolventProblem& problem, const GridPtr& grid,
                   const SymbolTable& scaled_table, ScaledSolveInfo* info = nullptr,
                   const Field* source_override = nullptr);

// u_hat = h_hat / (lambda + 1/2 <A xi, xi>) on the same grid.
Field solve_homogenized(double lambda, const Field& h, const EffectiveMatrix& a_bar);

// integral of |f|^p over the min-image ball B(center, R), cell Riemann sum
double ball_integral(const Field& f, double radius, double p);

struct ConvergenceRow {
    double epsilon = 0.0;
    double p = 2.0;
    double radius = 0.0;
    double error = 0.0;  // int_B |u_eps - u_bar|^p
    double residual = 0.0;
    int grid_n = 0;
    double richardson = 0.0;  // discretization estimate ||u_N - u_{N/2}||_B
    ScaledSolveInfo info;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // sorted by decreasing epsilon
    double lambda = 0.0;
    double box = 0.0;
};

// L^p(B(0,R)) errors of u_eps against the homogenized solution over an
// epsilon sweep; grid resolution per epsilon is refined until the Richardson
// estimate sits at least 10x below the smallest observed error.
ConvergenceTable convergence_sweep(const ResolventProblem& base,
                                   const EffectiveMatrix& a_bar,
                                   const std::vector<double>& epsilons,
                                   double p, double radius);

// mode-by-mode error oracle for the zero-drift control: the difference field
// is h_hat (1/(lambda + psi_eps) - 1/(lambda + 1/2 <A xi,xi>)) per mode
double zero_drift_error_oracle(const ResolventProblem& problem, const GridPtr& grid,
                               const SymbolTable& scaled_table,
                               const EffectiveMatrix& a_bar, double p, double radius);

}  // namespace levyhom
