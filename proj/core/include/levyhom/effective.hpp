#pragma once

#include <string>
#include <vector>

#include "levyhom/corrector.hpp"

namespace levyhom {

struct EffectiveMatrix {
    int d = 0;
    std::vector<double> a;                // row-major d x d
    std::vector<double> eigenvalues;      // ascending
    std::vector<double> m2_part;          // m I, pure-kernel contribution
    std::vector<double> cross_part;       // expectation of the mixed terms
    std::vector<double> dirichlet_part;   // corrector quadratic contribution
    // single-realization mixed term at base point 0, from the grad-psi
    // table; its ensemble average vanishes, so this is a diagnostic only
    std::vector<double> base_point_cross;
    bool symmetric_ok = false;
    bool positive_ok = false;
    std::string provenance;

    double quadratic_form(const Vec& xi) const;
};

// a = M2 + cross + dirichlet evaluated by Parseval on the solved corrector;
// zero corrector reproduces M2 exactly. Asymmetry or a nonpositive spectrum
// is reported via the certification flags (the matrix is still returned).
EffectiveMatrix compute_effective(const CorrectorSolution& solution,
                                  const SymbolTable& table,
                                  const LevyKernel& kernel);

// Fourier symbol of -Lbar: 1/2 <A xi, xi>.
double limit_generator_symbol(const EffectiveMatrix& a_bar, const Vec& xi);

// eigenvalues of a small symmetric matrix (Jacobi sweeps)
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int d);

}  // namespace levyhom
