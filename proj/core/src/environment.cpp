#include "levyhom/environment.hpp"

#include <algorithm>
#include <cmath>

#include "levyhom/quadrature.hpp"
#include "levyhom/rng.hpp"

namespace levyhom {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------------------
// StreamField
// ---------------------------------------------------------------------------

StreamField::StreamField(int dim, double period, std::vector<StreamMode> modes,
                         std::uint64_t seed)
    : dim_(dim), period_(period), seed_(seed), modes_(std::move(modes)) {
    if (dim < 2) throw ConfigError("stream field: dim must be >= 2");
    if (!(period > 0.0)) throw ConfigError("stream field: period must be positive");
    const int np = pair_count(dim);
    for (const StreamMode& m : modes_) {
        if (static_cast<int>(m.m.size()) != dim || static_cast<int>(m.amp.size()) != np)
            throw ConfigError("stream field: malformed mode");
        bool zero = true;
        for (int v : m.m) zero = zero && v == 0;
        if (zero) throw ConfigError("stream field: zero mode breaks mean-zero invariant");
    }
}

int StreamField::pair_index(int j, int l, int d) {
    // pairs (j,l), j < l, lexicographic
    if (j < 0 || l <= j || l >= d) throw ConfigError("stream field: bad pair index");
    return j * d - j * (j + 1) / 2 + (l - j - 1);
}

double StreamField::eval_component(int j, int l, const Vec& x) const {
    if (j == l) return 0.0;
    const double sign = j < l ? 1.0 : -1.0;
    const int p = j < l ? pair_index(j, l, dim_) : pair_index(l, j, dim_);
    const double base = 2.0 * kPi / period_;
    double s = 0.0;
    for (const StreamMode& m : modes_) {
        double u = m.phase;
        for (int a = 0; a < dim_; ++a) u += base * m.m[a] * x[a];
        s += m.amp[p] * std::cos(u);
    }
    return sign * s;
}

std::vector<double> StreamField::eval(const Vec& x) const {
    std::vector<double> out(dim_ * dim_, 0.0);
    for (int j = 0; j < dim_; ++j)
        for (int l = j + 1; l < dim_; ++l) {
            const double v = eval_component(j, l, x);
            out[j * dim_ + l] = v;
            out[l * dim_ + j] = -v;
        }
    return out;
}

double StreamField::eval_derivative(int a, int j, int l, const Vec& x) const {
    if (j == l) return 0.0;
    const double sign = j < l ? 1.0 : -1.0;
    const int p = j < l ? pair_index(j, l, dim_) : pair_index(l, j, dim_);
    const double base = 2.0 * kPi / period_;
    double s = 0.0;
    for (const StreamMode& m : modes_) {
        double u = m.phase;
        for (int c = 0; c < dim_; ++c) u += base * m.m[c] * x[c];
        s -= m.amp[p] * base * m.m[a] * std::sin(u);
    }
    return sign * s;
}

Field StreamField::realize_component(const GridPtr& grid, int j, int l) const {
    Field out(grid);
    for (std::size_t f = 0; f < grid->total(); ++f)
        out[f] = eval_component(j, l, grid->point(f));
    return out;
}

double StreamField::sup_abs(int probe_per_axis) const {
    double sup = 0.0;
    const int n = probe_per_axis;
    if (dim_ == 2) {
        Vec x(2);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                x[0] = period_ * i / n;
                x[1] = period_ * k / n;
                for (int j = 0; j < dim_; ++j)
                    for (int l = j + 1; l < dim_; ++l)
                        sup = std::max(sup, std::abs(eval_component(j, l, x)));
            }
        return sup;
    }
    // low-discrepancy probe for d >= 3
    CounterRng rng(0x5eedf00dULL);
    Vec x(dim_);
    for (int i = 0; i < n * n; ++i) {
        for (int a = 0; a < dim_; ++a) x[a] = period_ * rng.next_uniform();
        for (int j = 0; j < dim_; ++j)
            for (int l = j + 1; l < dim_; ++l)
                sup = std::max(sup, std::abs(eval_component(j, l, x)));
    }
    return sup;
}

int StreamField::max_mode_index() const {
    int mx = 0;
    for (const StreamMode& m : modes_)
        for (int v : m.m) mx = std::max(mx, std::abs(v));
    return mx;
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

namespace {

// half-lattice enumeration ordered by (|m|^2, lex); first nonzero entry > 0
std::vector<std::vector<int>> half_lattice(int d, int count) {
    std::vector<std::vector<int>> out;
    int shell = 1;
    while (static_cast<int>(out.size()) < count && shell <= 1024) {
        std::vector<std::vector<int>> batch;
        std::vector<int> m(d, -shell);
        while (true) {
            int inf = 0;
            for (int v : m) inf = std::max(inf, std::abs(v));
            if (inf == shell) {
                int first = 0;
                for (int v : m) {
                    if (v != 0) {
                        first = v;
                        break;
                    }
                }
                if (first > 0) batch.push_back(m);
            }
            int a = d - 1;
            while (a >= 0 && m[a] == shell) m[a--] = -shell;
            if (a < 0) break;
            ++m[a];
        }
        std::sort(batch.begin(), batch.end(), [](const auto& x, const auto& y) {
            long nx = 0, ny = 0;
            for (int v : x) nx += static_cast<long>(v) * v;
            for (int v : y) ny += static_cast<long>(v) * v;
            if (nx != ny) return nx < ny;
            return x < y;
        });
        for (auto& m2 : batch) {
            out.push_back(std::move(m2));
            if (static_cast<int>(out.size()) == count) break;
        }
        ++shell;
    }
    if (static_cast<int>(out.size()) < count)
        throw ConfigError("synthesize: mode_count too large");
    return out;
}

}  // namespace

StreamField synthesize(const StreamSpec& spec, std::uint64_t seed) {
    if (spec.mode_count < 0) throw ConfigError("synthesize: mode_count must be >= 0");
    const int np = StreamField::pair_count(spec.dim);
    std::vector<StreamMode> modes;
    if (spec.mode_count > 0) {
        auto sites = half_lattice(spec.dim, spec.mode_count);
        CounterRng rng(mix_seed(seed, 0));
        const double base = 2.0 * kPi / spec.period;
        for (auto& site : sites) {
            StreamMode m;
            m.m = std::move(site);
            double k2 = 0.0;
            for (int v : m.m) k2 += static_cast<double>(v) * v;
            const double kmag = base * std::sqrt(k2);
            const double scale =
                spec.amplitude_scale * std::pow(kmag, -spec.spectrum_exponent);
            m.amp.resize(np);
            for (int p = 0; p < np; ++p) m.amp[p] = scale * rng.next_normal();
            m.phase = 2.0 * kPi * rng.next_uniform();
            modes.push_back(std::move(m));
        }
    }
    return StreamField(spec.dim, spec.period, std::move(modes), seed);
}

StreamField shear_stream(double period, double amplitude) {
    StreamMode m;
    m.m = {0, 1};
    m.amp = {amplitude};
    m.phase = 0.0;
    return StreamField(2, period, {m});
}

// ---------------------------------------------------------------------------
// Drift
// ---------------------------------------------------------------------------

DriftField drift(const StreamField& stream) {
    DriftField out;
    out.dim_ = stream.dim();
    out.period_ = stream.period();
    const int d = out.dim_;
    const double base = 2.0 * kPi / out.period_;
    for (const StreamMode& sm : stream.modes()) {
        DriftField::Mode m;
        m.m = sm.m;
        m.phase = sm.phase;
        m.amp = sm.amp;
        m.c.assign(d, 0.0);
        // b_j = -sum_l d_l H_{jl}; per mode the coefficient of sin(u) is
        // sum_l A_{jl} k_l (with A antisymmetric)
        for (int j = 0; j < d; ++j) {
            double c = 0.0;
            for (int l = 0; l < d; ++l) {
                if (l == j) continue;
                const double sign = j < l ? 1.0 : -1.0;
                const int p = j < l ? StreamField::pair_index(j, l, d)
                                    : StreamField::pair_index(l, j, d);
                c += sign * sm.amp[p] * base * sm.m[l];
            }
            m.c[j] = c;
        }
        out.modes_.push_back(std::move(m));
    }
    return out;
}

Vec DriftField::eval(const Vec& x) const {
    Vec b(dim_, 0.0);
    const double base = 2.0 * kPi / period_;
    for (const Mode& m : modes_) {
        double u = m.phase;
        for (int a = 0; a < dim_; ++a) u += base * m.m[a] * x[a];
        const double s = std::sin(u);
        for (int j = 0; j < dim_; ++j) b[j] += m.c[j] * s;
    }
    return b;
}

std::vector<Field> DriftField::realize(const GridPtr& grid) const {
    if (grid->dim() != dim_) throw ConfigError("drift realize: dimension mismatch");
    std::vector<Field> out(dim_, Field(grid));
    const double base = 2.0 * kPi / period_;
    // grid period must be an integer multiple of the drift period
    const double ratio = grid->period() / period_;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw ConfigError("drift realize: grid period is not a multiple of the field period");
    for (std::size_t f = 0; f < grid->total(); ++f) {
        const Vec x = grid->point(f);
        for (const Mode& m : modes_) {
            double u = m.phase;
            for (int a = 0; a < dim_; ++a) u += base * m.m[a] * x[a];
            const double s = std::sin(u);
            for (int j = 0; j < dim_; ++j) out[j][f] += m.c[j] * s;
        }
    }
    return out;
}

double DriftField::sup_abs(int probe_per_axis) const {
    CounterRng rng(0x5eedf00eULL);
    double sup = 0.0;
    Vec x(dim_);
    const int n = probe_per_axis * probe_per_axis;
    for (int i = 0; i < n; ++i) {
        for (int a = 0; a < dim_; ++a) x[a] = period_ * rng.next_uniform();
        const Vec b = eval(x);
        for (double v : b) sup = std::max(sup, std::abs(v));
    }
    return sup;
}

double DriftField::max_mode_divergence() const {
    // sum_j k_j c_j expands into ordered pairs (j,l) and (l,j); accumulating
    // them adjacently makes the antisymmetric cancellation exact in floating
    // point (w_j w_l equals w_l w_j bit for bit)
    const double base = 2.0 * kPi / period_;
    double worst = 0.0;
    for (const Mode& m : modes_) {
        double div = 0.0;
        for (int j = 0; j < dim_; ++j) {
            const double wj = base * m.m[j];
            for (int l = j + 1; l < dim_; ++l) {
                const double wl = base * m.m[l];
                const int p = StreamField::pair_index(j, l, dim_);
                div += (wj * wl) * m.amp[p];
                div += (wl * wj) * (-m.amp[p]);
            }
        }
        worst = std::max(worst, std::abs(div));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Moment report
// ---------------------------------------------------------------------------

MomentReport moment_report(const StreamField& stream, double r0, double q,
                           double alpha, double r, int grid_n) {
    MomentReport rep;
    const int d = stream.dim();
    rep.r0 = r0;
    rep.q = q;
    rep.alpha = alpha;
    rep.r = r;
    rep.q_in_range = q > 2.0 * d / (d + 2.0) && q < 2.0;
    rep.dim_ok = d > 4.0 * (alpha - 1.0);
    if (!rep.q_in_range) rep.warnings.push_back("q outside (2d/(d+2), 2)");
    if (!rep.dim_ok) rep.warnings.push_back("d <= 4(alpha-1)");

    rep.p0 = d * q / (d - q);
    rep.p0_prime = 2.0 * rep.p0 * alpha / (4.0 * (alpha - 1.0) + rep.p0 * (2.0 - alpha));
    rep.r_required = std::max(q / (q - 1.0),
                              2.0 * rep.p0_prime / (rep.p0_prime - 2.0));
    if (r < rep.r_required)
        rep.warnings.push_back("requested r below the admissibility threshold");

    if (stream.modes().empty()) {
        rep.n_sup = 0.0;
        rep.h_power_moments.assign(StreamField::pair_count(d), 0.0);
        rep.sobolev_moments.assign(StreamField::pair_count(d), 0.0);
        rep.pass = rep.q_in_range && rep.dim_ok;
        return rep;
    }

    // probe grid; a periodic field's sup over B(0,r0) is bounded by its sup
    // over the torus
    const int n = std::max(grid_n, 4 * (stream.max_mode_index() + 1));
    GridPtr grid = TorusGrid::make(d, n + (n % 2), stream.period());

    double nsup = 0.0;
    for (std::size_t f = 0; f < grid->total(); ++f) {
        const Vec x = grid->point(f);
        for (int j = 0; j < d; ++j)
            for (int l = 0; l < d; ++l) {
                if (j == l) continue;
                for (int a = 0; a < d; ++a)
                    nsup = std::max(nsup, std::abs(stream.eval_derivative(a, j, l, x)));
            }
    }
    rep.n_sup = nsup;

    const double sob_p = rep.p0 / (rep.p0 - 2.0);
    for (int j = 0; j < d; ++j) {
        for (int l = j + 1; l < d; ++l) {
            Field H = stream.realize_component(grid, j, l);
            double acc = 0.0;
            for (std::size_t f = 0; f < H.size(); ++f)
                acc += std::pow(std::abs(H[f]), r);
            rep.h_power_moments.push_back(acc / static_cast<double>(H.size()));

            // I(x) = int_{|z|<=1} |H(x+z)-H(x)|^2 / |z|^{d+2-alpha} dz via
            // FFT shifts over polar quadrature nodes (d = 2 or 3)
            Spectrum HS = SpectralOps::transform(H);
            std::vector<double> I(H.size(), 0.0);
            const GaussRule& rad = gauss_legendre(16);
            const int n_ang = 32;
            const int n_panels = 8;
            double lo = 1.0;
            for (int p = 0; p < n_panels; ++p) {
                const double hi = lo;
                const double plo = (p == n_panels - 1) ? 0.0 : lo * 0.5;
                for (std::size_t ir = 0; ir < rad.nodes.size(); ++ir) {
                    const double rho = plo + 0.5 * (hi - plo) * (1.0 + rad.nodes[ir]);
                    if (rho <= 0.0) continue;
                    const double wr = 0.5 * (hi - plo) * rad.weights[ir];
                    const double wgt_r =
                        wr * std::pow(rho, d - 1) * std::pow(rho, -(d + 2.0 - alpha));
                    for (int ia = 0; ia < n_ang; ++ia) {
                        Vec z(d, 0.0);
                        if (d == 2) {
                            const double th = 2.0 * kPi * (ia + 0.5) / n_ang;
                            z[0] = rho * std::cos(th);
                            z[1] = rho * std::sin(th);
                        } else {
                            // low-cost spherical spiral for d = 3
                            const double t = (ia + 0.5) / n_ang;
                            const double ct = 2.0 * t - 1.0;
                            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                            const double ph = 2.0 * kPi * 7.0 * t;
                            z[0] = rho * st * std::cos(ph);
                            z[1] = rho * st * std::sin(ph);
                            z[2] = rho * ct;
                        }
                        const double w = wgt_r * (d == 2 ? 2.0 * kPi / n_ang
                                                         : 4.0 * kPi / n_ang);
                        // shifted field by phase twist
                        Spectrum SS = HS;
                        for (std::size_t f = 0; f < SS.size(); ++f) {
                            std::vector<int> idx(d);
                            grid->unflatten(f, idx.data());
                            double ph2 = 0.0;
                            for (int a = 0; a < d; ++a)
                                ph2 += grid->wavenumber(idx[a]) * z[a];
                            SS[f] *= std::polar(1.0, ph2);
                        }
                        Field Hs = SpectralOps::inverse_transform(SS);
                        for (std::size_t f = 0; f < I.size(); ++f) {
                            const double dH = Hs[f] - H[f];
                            I[f] += w * dH * dH;
                        }
                    }
                }
                lo *= 0.5;
            }
            double acc2 = 0.0;
            for (double v : I) acc2 += std::pow(std::abs(v), sob_p);
            rep.sobolev_moments.push_back(acc2 / static_cast<double>(I.size()));
        }
    }

    bool finite = std::isfinite(rep.n_sup);
    for (double v : rep.h_power_moments) finite = finite && std::isfinite(v);
    for (double v : rep.sobolev_moments) finite = finite && std::isfinite(v);
    rep.pass = finite && rep.q_in_range && rep.dim_ok;
    return rep;
}

}  // namespace levyhom
