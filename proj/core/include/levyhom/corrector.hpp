#pragma once

#include <memory>
#include <vector>

#include "levyhom/environment.hpp"
#include "levyhom/grid.hpp"
#include "levyhom/kernels.hpp"
#include "levyhom/krylov.hpp"

namespace levyhom {

// Regularized stationary corrector problem on the torus:
//   theta phi - theta Lap phi - L0 phi + <b^R, grad phi> = -b_k,  k = 1..d,
// with b^R the drift of the stream matrix clamped at level R.
struct CorrectorProblem {
    GridPtr grid;
    LevyKernel kernel;
    std::shared_ptr<const SymbolTable> table;  // tabulated on the grid radii
    StreamField stream;
    double theta = 0.0;
    double truncation_level = 0.0;  // R; 0 selects 2 sup|H| (inactive clamp)
    double tol = 1e-10;
    int max_iter = 4000;
    int threads = 1;

    static CorrectorProblem make(GridPtr grid, const LevyKernel& kernel,
                                 const StreamField& stream, double theta,
                                 double tol = 1e-10, int threads = 1);
};

// Odd C1 saturation: identity on [-R, R], smooth transition on [R, 2R],
// clamped to 1.5 R beyond. |rho'| <= 2 everywhere.
double stream_clamp(double s, double R);

struct CorrectorStage {
    double theta = 0.0;
    std::vector<double> energy;          // per k: 1/2 avg int (d phi)^2 nu
    std::vector<double> residual;        // per k, relative
    std::vector<double> drift_pairing;   // per k: <b . grad phi, phi>
    std::vector<int> iterations;
};

struct CorrectorSolution {
    GridPtr grid;
    double theta = 0.0;             // final stage
    double truncation_level = 0.0;  // R actually used
    std::vector<Field> phi;         // d mean-zero fields
    std::vector<Field> drift_used;  // b^R realized on the grid (band-limited)
    std::vector<double> psi_mult;   // symbol multiplier per mode
    std::vector<double> energy;     // per k
    std::vector<double> residual;   // per k
    std::vector<CorrectorStage> theta_path;
    // a priori bound: energy_k <= 2 W_k with W_k from the clamped stream
    std::vector<double> energy_bound;
};

CorrectorSolution solve_regularized(const CorrectorProblem& problem);

// Warm-started theta continuation; the schedule must be strictly decreasing.
CorrectorSolution continuation_solve(const CorrectorProblem& problem,
                                     const std::vector<double>& theta_schedule);

// | 1/2 <<phi_k, f>>_nu + theta <phi,f> + theta <grad phi, grad f>
//   - <b^R phi_k, grad f> + <b_k, f> |, the weak-form defect against a
// band-limited test field. Reduces to the unregularized form at theta = 0.
double weak_residual(const CorrectorProblem& problem,
                     const CorrectorSolution& solution, int k, const Field& test);

struct EnergyIdentityReport {
    std::vector<double> lhs;      // per k: avg sum_j d_j phi_k H_kj
    std::vector<double> rhs;      // per k: -1/2 avg int (d phi_k)^2 nu
    std::vector<double> rel_gap;  // per k
    // polarized variant over ordered pairs (k,l), row-major d x d
    std::vector<double> pol_lhs;
    std::vector<double> pol_rhs;
    std::vector<double> pol_gap;
};

// The identity couples the stationary gradient against the *full* stream
// matrix, so under-resolved environments show up as a genuine gap.
EnergyIdentityReport energy_identity_check(const CorrectorSolution& solution,
                                           const StreamField& stream);

struct SublinearityRow {
    double eps = 0.0;
    double l2_value = 0.0;  // eps^2 int_B |phi(x/eps)|^2
    double p0_value = 0.0;  // eps^p0 int_B |phi(x/eps)|^p0
};

struct SublinearityReport {
    std::vector<SublinearityRow> rows;
    double slope_l2 = 0.0;  // log-log least-squares slope
    double slope_p0 = 0.0;
    double p0 = 0.0;
};

SublinearityReport sublinearity_scan(const CorrectorSolution& solution,
                                     const std::vector<double>& epsilons,
                                     double radius, double p0);

}  // namespace levyhom
