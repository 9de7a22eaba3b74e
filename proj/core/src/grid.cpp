#include "levyhom/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

namespace levyhom {

namespace {
// FFTW plan creation is not thread safe; executions on distinct buffers are.
std::mutex fftw_mutex;
}  // namespace

// ---------------------------------------------------------------------------
// TorusGrid
// ---------------------------------------------------------------------------

struct TorusGrid::Engine {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    fftw_complex* probe = nullptr;
    std::size_t total = 0;

    ~Engine() {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        if (probe) fftw_free(probe);
    }
};

TorusGrid::TorusGrid(int dim, int n, double period)
    : dim_(dim), n_(n), period_(period) {
    if (dim < 1 || dim > 3) throw ConfigError("grid: dim must be 1..3");
    if (n < 4 || n % 2 != 0) throw ConfigError("grid: n must be even and >= 4");
    if (!(period > 0.0)) throw ConfigError("grid: period must be positive");
    total_ = 1;
    for (int a = 0; a < dim; ++a) total_ *= static_cast<std::size_t>(n);
    stride_.assign(dim, 1);
    for (int a = dim - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * n;

    radius_.resize(total_);
    mode_norm2_.resize(total_);
    std::vector<int> idx(dim);
    const double base = 2.0 * std::numbers::pi / period_;
    for (std::size_t f = 0; f < total_; ++f) {
        unflatten(f, idx.data());
        std::int64_t m2 = 0;
        for (int a = 0; a < dim; ++a) {
            const std::int64_t q = freq(idx[a]);
            m2 += q * q;
        }
        mode_norm2_[f] = m2;
        radius_[f] = base * std::sqrt(static_cast<double>(m2));
    }
}

TorusGrid::~TorusGrid() = default;

std::shared_ptr<const TorusGrid> TorusGrid::make(int dim, int n, double period) {
    return std::shared_ptr<const TorusGrid>(new TorusGrid(dim, n, period));
}

void TorusGrid::unflatten(std::size_t flat, int* idx) const {
    for (int a = 0; a < dim_; ++a) {
        idx[a] = static_cast<int>(flat / stride_[a]);
        flat %= stride_[a];
    }
}

std::size_t TorusGrid::flatten(const int* idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) {
        int i = idx[a] % n_;
        if (i < 0) i += n_;
        f += static_cast<std::size_t>(i) * stride_[a];
    }
    return f;
}

Vec TorusGrid::point(std::size_t flat) const {
    std::vector<int> idx(dim_);
    unflatten(flat, idx.data());
    Vec x(dim_);
    for (int a = 0; a < dim_; ++a) x[a] = idx[a] * h();
    return x;
}

std::vector<double> TorusGrid::distinct_radii() const {
    std::vector<std::int64_t> m2(mode_norm2_);
    std::sort(m2.begin(), m2.end());
    m2.erase(std::unique(m2.begin(), m2.end()), m2.end());
    const double base = 2.0 * std::numbers::pi / period_;
    std::vector<double> out(m2.size());
    for (std::size_t i = 0; i < m2.size(); ++i)
        out[i] = base * std::sqrt(static_cast<double>(m2[i]));
    return out;
}

TorusGrid::Engine& TorusGrid::engine() const {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    if (!engine_) {
        auto eng = std::make_unique<Engine>();
        eng->total = total_;
        eng->probe = fftw_alloc_complex(total_);
        std::vector<int> dims(dim_, n_);
        eng->forward = fftw_plan_dft(dim_, dims.data(), eng->probe, eng->probe,
                                     FFTW_FORWARD, FFTW_ESTIMATE);
        eng->backward = fftw_plan_dft(dim_, dims.data(), eng->probe, eng->probe,
                                      FFTW_BACKWARD, FFTW_ESTIMATE);
        engine_ = std::move(eng);
    }
    return *engine_;
}

// ---------------------------------------------------------------------------
// Field
// ---------------------------------------------------------------------------

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_->total())
        throw ConfigError("field: value array length does not match the grid");
}

double Field::mean() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / static_cast<double>(v_.size());
}

double Field::max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

void Field::subtract_mean() {
    const double m = mean();
    for (double& x : v_) x -= m;
}

double dot(const Field& a, const Field& b) {
    if (a.size() != b.size()) throw ConfigError("field dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s / static_cast<double>(a.size());
}

double norm_l2(const Field& a) { return std::sqrt(std::max(0.0, dot(a, a))); }

void axpy(double alpha, const Field& x, Field& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double Field::evaluate(const Vec& x) const {
    return SpectralOps::evaluate_at(*this, {x})[0];
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

void Spectrum::scale_by(const std::vector<double>& multiplier) {
    if (multiplier.size() != c_.size())
        throw ConfigError("spectrum: multiplier length mismatch");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] *= multiplier[i];
}

void Spectrum::dealias(int max_mode) {
    const TorusGrid& g = *grid_;
    const int d = g.dim();
    std::vector<int> idx(d);
    for (std::size_t f = 0; f < c_.size(); ++f) {
        g.unflatten(f, idx.data());
        for (int a = 0; a < d; ++a) {
            const int q = g.freq(idx[a]);
            if (q > max_mode || q < -max_mode) {
                c_[f] = {0.0, 0.0};
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

Spectrum SpectralOps::transform(const Field& f) {
    const GridPtr& grid = f.grid();
    auto& eng = grid->engine();
    const std::size_t total = grid->total();

    fftw_complex* buf = fftw_alloc_complex(total);
    for (std::size_t i = 0; i < total; ++i) {
        buf[i][0] = f[i];
        buf[i][1] = 0.0;
    }
    fftw_execute_dft(eng.forward, buf, buf);
    Spectrum out(grid);
    const double inv = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i)
        out[i] = {buf[i][0] * inv, buf[i][1] * inv};
    fftw_free(buf);
    return out;
}

Field SpectralOps::inverse_transform(const Spectrum& s) {
    const GridPtr& grid = s.grid();
    auto& eng = grid->engine();
    const std::size_t total = grid->total();

    fftw_complex* buf = fftw_alloc_complex(total);
    for (std::size_t i = 0; i < total; ++i) {
        buf[i][0] = s[i].real();
        buf[i][1] = s[i].imag();
    }
    fftw_execute_dft(eng.backward, buf, buf);
    Field out(grid);
    for (std::size_t i = 0; i < total; ++i) out[i] = buf[i][0];
    fftw_free(buf);
    return out;
}

Spectrum SpectralOps::derivative(const Spectrum& s, int axis) {
    const TorusGrid& g = *s.grid();
    Spectrum out(s.grid());
    std::vector<int> idx(g.dim());
    for (std::size_t f = 0; f < s.size(); ++f) {
        g.unflatten(f, idx.data());
        const int q = g.freq(idx[axis]);
        if (q == -g.n() / 2) {
            out[f] = {0.0, 0.0};  // Nyquist has no well-defined derivative sign
            continue;
        }
        const double k = 2.0 * std::numbers::pi * q / g.period();
        const std::complex<double> v = s[f];
        out[f] = {-k * v.imag(), k * v.real()};  // i k v
    }
    return out;
}

std::vector<Field> SpectralOps::spectral_gradient(const Field& f) {
    Spectrum s = transform(f);
    std::vector<Field> grad;
    grad.reserve(f.grid()->dim());
    for (int a = 0; a < f.grid()->dim(); ++a)
        grad.push_back(inverse_transform(derivative(s, a)));
    return grad;
}

std::vector<double> SpectralOps::evaluate_at(const Field& f,
                                             const std::vector<Vec>& points) {
    const TorusGrid& g = *f.grid();
    const int d = g.dim();
    const int n = g.n();
    Spectrum s = transform(f);

    std::vector<double> out;
    out.reserve(points.size());
    std::vector<std::vector<std::complex<double>>> phase(d,
        std::vector<std::complex<double>>(n));
    std::vector<int> idx(d, 0);
    for (const Vec& x : points) {
        if (static_cast<int>(x.size()) != d)
            throw ConfigError("evaluate_at: point dimension mismatch");
        for (int a = 0; a < d; ++a)
            for (int i = 0; i < n; ++i)
                phase[a][i] = std::polar(1.0, g.wavenumber(i) * x[a]);
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t fl = 0; fl < s.size(); ++fl) {
            g.unflatten(fl, idx.data());
            std::complex<double> ph = phase[0][idx[0]];
            for (int a = 1; a < d; ++a) ph *= phase[a][idx[a]];
            acc += s[fl] * ph;
        }
        out.push_back(acc.real());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nonlocal multiplier
// ---------------------------------------------------------------------------

SymbolTable tabulate_for_grid(const LevyKernel& kernel, const TorusGrid& grid,
                              double scale, double tol, int threads) {
    std::vector<double> radii = grid.distinct_radii();
    for (double& r : radii) r *= scale;
    return SymbolTable::tabulate(kernel, std::move(radii), tol, threads);
}

NonlocalMultiplier::NonlocalMultiplier(GridPtr grid, const SymbolTable& table,
                                       double scale, double value_scale) {
    const std::size_t total = grid->total();
    mult_.resize(total);
    for (std::size_t f = 0; f < total; ++f) {
        const SymbolValue v = table.value_at(scale * grid->radius_flat(f));
        mult_[f] = value_scale * v.psi;
        max_err_ = std::max(max_err_, std::abs(value_scale) * v.error);
    }
}

Field apply_nonlocal(const NonlocalMultiplier& mult, const Field& f) {
    Spectrum s = SpectralOps::transform(f);
    s.scale_by(mult.values());
    return SpectralOps::inverse_transform(s);
}

Field spectral_resample(const Field& f, const GridPtr& target) {
    const GridPtr& src = f.grid();
    if (src->dim() != target->dim())
        throw ConfigError("resample: dimension mismatch");
    Spectrum in = SpectralOps::transform(f);
    Spectrum out(target);
    const int d = src->dim();
    std::vector<int> idx(d), tidx(d);
    const int tny = target->n() / 2;
    for (std::size_t i = 0; i < in.size(); ++i) {
        src->unflatten(i, idx.data());
        bool skip = false;
        for (int a = 0; a < d; ++a) {
            const int q = src->freq(idx[a]);
            if (q == -src->n() / 2 || q < -tny || q >= tny) skip = true;
            tidx[a] = q >= 0 ? q : q + target->n();
        }
        if (skip) continue;
        out[target->flatten(tidx.data())] = in[i];
    }
    return SpectralOps::inverse_transform(out);
}

// ---------------------------------------------------------------------------
// Drifted operator
// ---------------------------------------------------------------------------

LinearOperator make_drifted_operator(GridPtr grid, std::vector<double> diag,
                                     std::vector<Field> drift, bool mean_zero,
                                     std::string name) {
    if (diag.size() != grid->total())
        throw ConfigError("operator: diagonal multiplier length mismatch");
    const int kmax = grid->max_mode();

    auto diag_ptr = std::make_shared<std::vector<double>>(std::move(diag));
    auto drift_ptr = std::make_shared<std::vector<Field>>(std::move(drift));

    LinearOperator op;
    op.name = std::move(name);
    op.apply = [grid, diag_ptr, drift_ptr, mean_zero, kmax](const Field& f) {
        Spectrum s = SpectralOps::transform(f);
        if (mean_zero) s.zero_mode_out();

        Spectrum out = s;
        out.scale_by(*diag_ptr);

        if (!drift_ptr->empty()) {
            const int d = grid->dim();
            Field prod(grid);
            for (int a = 0; a < d; ++a) {
                Field ga = SpectralOps::inverse_transform(SpectralOps::derivative(s, a));
                const Field& ba = (*drift_ptr)[a];
                for (std::size_t i = 0; i < prod.size(); ++i) prod[i] += ba[i] * ga[i];
            }
            Spectrum ps = SpectralOps::transform(prod);
            ps.dealias(kmax);
            if (mean_zero) ps.zero_mode_out();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += ps[i];
        }
        return SpectralOps::inverse_transform(out);
    };

    std::vector<double> inv(diag_ptr->size());
    for (std::size_t i = 0; i < inv.size(); ++i)
        inv[i] = (*diag_ptr)[i] != 0.0 ? 1.0 / (*diag_ptr)[i] : 0.0;
    auto inv_ptr = std::make_shared<std::vector<double>>(std::move(inv));
    op.precondition = [grid, inv_ptr, mean_zero](const Field& f) {
        Spectrum s = SpectralOps::transform(f);
        s.scale_by(*inv_ptr);
        if (mean_zero) s.zero_mode_out();
        return SpectralOps::inverse_transform(s);
    };
    return op;
}

}  // namespace levyhom
