#pragma once

#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "levyhom/common.hpp"
#include "levyhom/kernels.hpp"

namespace levyhom {

// Uniform periodic grid, n points per axis on [0, L)^d. Immutable and
// shareable; transforms run through a lazily created FFTW engine.
class TorusGrid {
public:
    static std::shared_ptr<const TorusGrid> make(int dim, int n, double period);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double period() const { return period_; }
    double h() const { return period_ / n_; }
    std::size_t total() const { return total_; }

    // frequency index in [-n/2, n/2-1] for a storage index along one axis
    int freq(int storage_index) const {
        return storage_index < n_ / 2 ? storage_index : storage_index - n_;
    }
    double wavenumber(int storage_index) const {
        return 2.0 * std::numbers::pi * freq(storage_index) / period_;
    }

    void unflatten(std::size_t flat, int* idx) const;
    std::size_t flatten(const int* idx) const;
    Vec point(std::size_t flat) const;

    double radius_flat(std::size_t flat) const { return radius_[flat]; }
    const std::vector<double>& radius_array() const { return radius_; }
    std::vector<double> distinct_radii() const;
    // squared integer mode norm per flat index
    const std::vector<std::int64_t>& mode_norm2() const { return mode_norm2_; }

    // default dealiasing cutoff (2/3 rule): keep |freq| <= max_mode()
    int max_mode() const { return n_ / 3; }

    ~TorusGrid();

private:
    TorusGrid(int dim, int n, double period);
    int dim_;
    int n_;
    double period_;
    std::size_t total_;
    std::vector<std::size_t> stride_;
    std::vector<double> radius_;
    std::vector<std::int64_t> mode_norm2_;

    struct Engine;
    mutable std::unique_ptr<Engine> engine_;
    Engine& engine() const;
    friend class SpectralOps;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

class Spectrum;

// Real scalar field on a grid.
class Field {
public:
    Field() = default;
    explicit Field(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), v_(grid_->total(), fill) {}
    Field(GridPtr grid, std::vector<double> values);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    double mean() const;
    double max_abs() const;
    void subtract_mean();

    // value of the trigonometric interpolant at an arbitrary point (d <= 3)
    double evaluate(const Vec& x) const;

private:
    GridPtr grid_;
    std::vector<double> v_;
};

double dot(const Field& a, const Field& b);        // grid average of a*b
double norm_l2(const Field& a);                    // sqrt(avg a^2)
void axpy(double alpha, const Field& x, Field& y); // y += alpha x

// Complex Fourier coefficients, normalized so that f(x) = sum c_k e^{i<k,x>}.
class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(GridPtr grid)
        : grid_(std::move(grid)), c_(grid_->total(), {0.0, 0.0}) {}

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return c_.size(); }
    std::complex<double>& operator[](std::size_t i) { return c_[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return c_[i]; }

    void scale_by(const std::vector<double>& multiplier);  // entrywise real
    void zero_mode_out() { if (!c_.empty()) c_[0] = {0.0, 0.0}; }
    void dealias(int max_mode);

private:
    GridPtr grid_;
    std::vector<std::complex<double>> c_;
};

// Forward/backward transforms and spectral calculus.
class SpectralOps {
public:
    static Spectrum transform(const Field& f);
    static Field inverse_transform(const Spectrum& s);
    // partial derivative along one axis (i k multiplier, Nyquist dropped)
    static Spectrum derivative(const Spectrum& s, int axis);
    static std::vector<Field> spectral_gradient(const Field& f);
    // trigonometric-interpolant values at arbitrary points (one transform)
    static std::vector<double> evaluate_at(const Field& f, const std::vector<Vec>& points);
};

// Fourier multiplier of -L0 restricted to the grid: psi(|xi|) per mode,
// read off a SymbolTable tabulated on scale * (grid radii).
class NonlocalMultiplier {
public:
    NonlocalMultiplier(GridPtr grid, const SymbolTable& table, double scale = 1.0,
                       double value_scale = 1.0);
    const std::vector<double>& values() const { return mult_; }
    double max_quadrature_error() const { return max_err_; }

private:
    std::vector<double> mult_;
    double max_err_ = 0.0;
};

// Builds the table for exactly the radii a grid (optionally scaled) needs.
SymbolTable tabulate_for_grid(const LevyKernel& kernel, const TorusGrid& grid,
                              double scale = 1.0, double tol = 1e-10, int threads = 1);

// -L0 f evaluated spectrally (a nonnegative operator).
Field apply_nonlocal(const NonlocalMultiplier& mult, const Field& f);

// exact spectral resampling between grids (zero-pad or truncate modes;
// the source Nyquist is dropped when refining)
Field spectral_resample(const Field& f, const GridPtr& target);

// Matrix-free operator with an optional diagonal spectral preconditioner.
struct LinearOperator {
    std::string name;
    std::function<Field(const Field&)> apply;
    // inverse preconditioner (approximate inverse), optional
    std::function<Field(const Field&)> precondition;
};

// diag + dealias(b . grad): the workhorse for the corrector and resolvent
// solves. diag is the full spectral multiplier per mode (mass, Laplacian and
// nonlocal parts combined by the caller); drift may be empty. When
// mean_zero is set, input and output are projected onto mean-zero fields.
LinearOperator make_drifted_operator(GridPtr grid, std::vector<double> diag,
                                     std::vector<Field> drift, bool mean_zero,
                                     std::string name);

}  // namespace levyhom
