#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levyhom/common.hpp"
#include "levyhom/grid.hpp"

namespace levyhom {

// One Fourier mode of the stream matrix: H_{jl} picks up
// amp[pair(j,l)] * cos(<k_m, x> + phase), antisymmetric in (j,l).
struct StreamMode {
    std::vector<int> m;        // integer lattice index; k = (2 pi / L) m
    std::vector<double> amp;   // packed over pairs j < l
    double phase = 0.0;
};

struct StreamSpec {
    int dim = 2;
    double period = 2.0 * std::numbers::pi;
    int mode_count = 0;
    double spectrum_exponent = 2.0;  // |A(k)| ~ |k|^{-s}
    double amplitude_scale = 1.0;
};

// Antisymmetric matrix of periodic stream functions with a finite Fourier
// series. Immutable after construction.
class StreamField {
public:
    StreamField(int dim, double period, std::vector<StreamMode> modes,
                std::uint64_t seed = 0);

    int dim() const { return dim_; }
    double period() const { return period_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<StreamMode>& modes() const { return modes_; }

    static int pair_count(int d) { return d * (d - 1) / 2; }
    static int pair_index(int j, int l, int d);  // j < l, 0-based

    // H_{jl}(x); indices 0-based, antisymmetry applied
    double eval_component(int j, int l, const Vec& x) const;
    // full antisymmetric matrix, row-major d x d
    std::vector<double> eval(const Vec& x) const;
    // d/dx_a H_{jl}(x)
    double eval_derivative(int a, int j, int l, const Vec& x) const;

    Field realize_component(const GridPtr& grid, int j, int l) const;
    // sup |H_{jl}| over all pairs, estimated on a probe grid
    double sup_abs(int probe_per_axis = 128) const;
    int max_mode_index() const;  // max |m|_inf over modes

private:
    int dim_;
    double period_;
    std::uint64_t seed_;
    std::vector<StreamMode> modes_;
};

// b_j(x) = -sum_l d/dx_l H_{jl}(x), stored mode-wise:
// b_j = sum_m c[j] sin(<k_m, x> + phase).
class DriftField {
public:
    struct Mode {
        std::vector<int> m;
        std::vector<double> c;    // one coefficient per component j
        std::vector<double> amp;  // originating antisymmetric amplitudes
        double phase = 0.0;
    };

    int dim() const { return dim_; }
    double period() const { return period_; }
    const std::vector<Mode>& modes() const { return modes_; }

    Vec eval(const Vec& x) const;
    std::vector<Field> realize(const GridPtr& grid) const;
    double sup_abs(int probe_per_axis = 128) const;
    // max over modes of |sum_j k_j c_j|; zero exactly by pairwise cancellation
    double max_mode_divergence() const;

private:
    friend DriftField drift(const StreamField& stream);
    int dim_ = 2;
    double period_ = 2.0 * std::numbers::pi;
    std::vector<Mode> modes_;
};

// Deterministic synthesis: modes are the first mode_count half-lattice sites
// ordered by (|m|^2, lex); Gaussian amplitudes scaled by |k|^{-s}, uniform
// phases, all drawn from a counter RNG keyed by seed.
StreamField synthesize(const StreamSpec& spec, std::uint64_t seed);

// Single-mode shear: H_{01}(x) = amplitude * cos(2 pi x_1 / L) (d = 2), so
// the drift is b_0 = amplitude (2 pi / L) sin(2 pi x_1 / L), b_1 = 0.
StreamField shear_stream(double period, double amplitude);

DriftField drift(const StreamField& stream);

struct MomentReport {
    double r0 = 1.0;
    double q = 0.0, alpha = 0.0, r = 0.0;
    double p0 = 0.0, p0_prime = 0.0, r_required = 0.0;
    bool q_in_range = false;
    bool dim_ok = false;  // d > 4 (alpha - 1)
    double n_sup = 0.0;   // sup over the torus of all |d_a H_{jl}|
    std::vector<double> h_power_moments;   // avg |H_{jl}|^r per pair
    std::vector<double> sobolev_moments;   // avg |I(x)|^{p0/(p0-2)} per pair
    bool pass = false;
    std::vector<std::string> warnings;
};

// Spatial averages substitute expectations; the fractional difference
// integral is evaluated with FFT shifts over polar quadrature nodes.
MomentReport moment_report(const StreamField& stream, double r0, double q,
                           double alpha, double r = 8.0, int grid_n = 64);

}  // namespace levyhom
