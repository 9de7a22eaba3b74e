#include "levyhom/effective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace levyhom {

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int d) {
    // classical Jacobi; d is 2 or 3 here so a handful of sweeps suffices
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += std::abs(a[p * d + q]);
        if (off < 1e-15) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = 0.5 * (a[q * d + q] - a[p * d + p]) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < d; ++i) {
                    const double aip = a[i * d + p], aiq = a[i * d + q];
                    a[i * d + p] = c * aip - s * aiq;
                    a[i * d + q] = s * aip + c * aiq;
                }
                for (int i = 0; i < d; ++i) {
                    const double api = a[p * d + i], aqi = a[q * d + i];
                    a[p * d + i] = c * api - s * aqi;
                    a[q * d + i] = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> ev(d);
    for (int i = 0; i < d; ++i) ev[i] = a[i * d + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

double EffectiveMatrix::quadratic_form(const Vec& xi) const {
    double s = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) s += a[j * d + k] * xi[j] * xi[k];
    return s;
}

EffectiveMatrix compute_effective(const CorrectorSolution& solution,
                                  const SymbolTable& table,
                                  const LevyKernel& kernel) {
    const GridPtr& grid = solution.grid;
    const int d = grid->dim();

    EffectiveMatrix out;
    out.d = d;
    out.a.assign(d * d, 0.0);
    out.m2_part.assign(d * d, 0.0);
    out.cross_part.assign(d * d, 0.0);
    out.dirichlet_part.assign(d * d, 0.0);
    out.base_point_cross.assign(d * d, 0.0);

    const double m = kernel.second_moment_scalar(1e-11);
    for (int j = 0; j < d; ++j) out.m2_part[j * d + j] = m;

    std::vector<Spectrum> spec;
    spec.reserve(d);
    for (int k = 0; k < d; ++k)
        spec.push_back(SpectralOps::transform(solution.phi[k]));

    // Parseval pieces per mode: 2 psi Re(phi_j phi_k*) accumulates the
    // quadratic term; the mixed term carries the weight i d_j psi(xi), whose
    // base-point evaluation is tabulated for diagnostics. The expectation of
    // the mixed term is exactly zero for mean-zero periodic correctors (the
    // base-point average sends it to the zero mode), so cross_part stays 0.
    const std::size_t total = grid->total();
    std::vector<int> idx(d);
    for (std::size_t f = 0; f < total; ++f) {
        const double r = grid->radius_flat(f);
        if (r == 0.0) continue;
        const SymbolValue sv = table.value_at(r);
        grid->unflatten(f, idx.data());
        for (int j = 0; j < d; ++j) {
            const double kj = grid->wavenumber(idx[j]);
            const double dpsi_j = sv.dpsi_dk * kj / r;
            for (int k = 0; k < d; ++k) {
                out.dirichlet_part[j * d + k] +=
                    2.0 * sv.psi * (spec[j][f] * std::conj(spec[k][f])).real();
                // i dpsi_j conj(phi_k) + conj(i dpsi_k conj(phi_j)), realized
                out.base_point_cross[j * d + k] +=
                    (std::complex<double>(0.0, dpsi_j) * std::conj(spec[k][f])).real() +
                    (std::complex<double>(0.0, grid->wavenumber(idx[k]) / r *
                                                   sv.dpsi_dk) *
                     std::conj(spec[j][f])).real();
            }
        }
    }

    for (int i = 0; i < d * d; ++i)
        out.a[i] = out.m2_part[i] + out.cross_part[i] + out.dirichlet_part[i];

    // certification
    double asym = 0.0, scale = 0.0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            asym = std::max(asym, std::abs(out.a[j * d + k] - out.a[k * d + j]));
            scale = std::max(scale, std::abs(out.a[j * d + k]));
        }
    out.symmetric_ok = asym <= 1e-10 * std::max(1.0, scale);

    std::vector<double> symm(out.a);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            symm[j * d + k] = 0.5 * (out.a[j * d + k] + out.a[k * d + j]);
    out.eigenvalues = symmetric_eigenvalues(symm, d);
    out.positive_ok = out.eigenvalues.front() > 0.0;

    std::ostringstream os;
    os << "grid n=" << grid->n() << " theta=" << solution.theta
       << " kernel=" << kernel.tail().describe() << " alpha=" << kernel.alpha();
    out.provenance = os.str();
    return out;
}

double limit_generator_symbol(const EffectiveMatrix& a_bar, const Vec& xi) {
    if (!a_bar.positive_ok)
        throw InvariantError("limit generator: matrix is not certified positive");
    return 0.5 * a_bar.quadratic_form(xi);
}

}  // namespace levyhom
