#include "levyhom/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "levyhom/quadrature.hpp"
#include "levyhom/rng.hpp"

namespace levyhom {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_area(int d) {
    // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2); sphere_area(1) = 2
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

// ---------------------------------------------------------------------------
// Tail density g(r) = r^{d-1} nu_tail(r) and its derivative, per family.
// ---------------------------------------------------------------------------

struct TailDensity {
    int d = 2;
    TailSpec spec;

    double nu(double r) const {
        switch (spec.kind) {
            case TailKind::Truncated:
                return 0.0;
            case TailKind::PowerLog:
                return std::pow(r, -(d + spec.beta1)) *
                       std::pow(std::log(2.0 + r), -spec.beta2);
            case TailKind::Exponential:
                return std::exp(-spec.a * std::pow(r, spec.beta));
        }
        return 0.0;
    }

    double log_nu(double r) const {
        switch (spec.kind) {
            case TailKind::Truncated:
                return -std::numeric_limits<double>::infinity();
            case TailKind::PowerLog:
                return -(d + spec.beta1) * std::log(r) -
                       spec.beta2 * std::log(std::log(2.0 + r));
            case TailKind::Exponential:
                return -spec.a * std::pow(r, spec.beta);
        }
        return 0.0;
    }

    double g(double r) const { return std::pow(r, d - 1) * nu(r); }

    double gprime(double r) const {
        switch (spec.kind) {
            case TailKind::Truncated:
                return 0.0;
            case TailKind::PowerLog: {
                const double L = std::log(2.0 + r);
                const double base = std::pow(r, -2.0 - spec.beta1) * std::pow(L, -spec.beta2);
                return base * (-(1.0 + spec.beta1) - spec.beta2 * r / ((2.0 + r) * L));
            }
            case TailKind::Exponential: {
                const double e = std::exp(-spec.a * std::pow(r, spec.beta));
                return e * std::pow(r, d - 2) *
                       ((d - 1) - spec.a * spec.beta * std::pow(r, spec.beta));
            }
        }
        return 0.0;
    }

    // r * g and its derivative, for the k-derivative integrals
    double rg(double r) const { return r * g(r); }
    double rgprime(double r) const { return g(r) + r * gprime(r); }
};

// ---------------------------------------------------------------------------
// Angular average over the unit sphere: A_d(u) = avg cos(u <e, zhat>), plus
// d/du. Power series for small u, panelled Gauss-Legendre in the polar angle
// otherwise.
// ---------------------------------------------------------------------------

struct AngularAverager {
    explicit AngularAverager(int dim) : d(dim) {
        mu[0] = 1.0;
        double num = 1.0, den = 1.0;
        for (int j = 1; j <= 5; ++j) {
            num *= (2.0 * j - 1.0);        // 1, 3, 15, 105, 945
            den *= (d + 2.0 * (j - 1.0));  // d, d(d+2), ...
            mu[j] = num / den;             // avg of cos(theta)^{2j} on S^{d-1}
        }
        z_norm = gl_panel([&](double t) { return weight(t); }, 0.0, kPi, 64);
    }

    int d;
    double mu[6];
    double z_norm;  // int_0^pi sin^{d-2}

    double weight(double theta) const {
        return d == 2 ? 1.0 : std::pow(std::sin(theta), d - 2);
    }

    double value(double u) const {
        u = std::abs(u);
        if (u <= 0.2) {
            const double u2 = u * u;
            return 1.0 + u2 * (-mu[1] / 2.0 +
                   u2 * (mu[2] / 24.0 +
                   u2 * (-mu[3] / 720.0 +
                   u2 * (mu[4] / 40320.0))));
        }
        const int panels = std::max(1, static_cast<int>(std::ceil(u / 6.0)));
        double s = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = kPi * p / panels;
            const double b = kPi * (p + 1) / panels;
            s += gl_panel([&](double t) { return std::cos(u * std::cos(t)) * weight(t); },
                          a, b, 32);
        }
        return s / z_norm;
    }

    double deriv(double u) const {
        const double sign = u < 0.0 ? -1.0 : 1.0;
        u = std::abs(u);
        if (u <= 0.2) {
            const double u2 = u * u;
            const double v = u * (-mu[1] +
                            u2 * (mu[2] / 6.0 +
                            u2 * (-mu[3] / 120.0 +
                            u2 * (mu[4] / 5040.0))));
            return sign * v;
        }
        const int panels = std::max(1, static_cast<int>(std::ceil(u / 6.0)));
        double s = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = kPi * p / panels;
            const double b = kPi * (p + 1) / panels;
            s += gl_panel([&](double t) {
                const double c = std::cos(t);
                return -c * std::sin(u * c) * weight(t);
            }, a, b, 32);
        }
        return sign * s / z_norm;
    }
};

// ---------------------------------------------------------------------------
// int_from^inf f(r) dr for nonnegative decaying f: geometric panels with a
// geometric-extrapolation remainder bound and divergence detection.
// ---------------------------------------------------------------------------

struct TailIntegral {
    double value = 0.0;
    double bound = 0.0;
    bool converged = false;
    std::vector<double> partials;
};

TailIntegral integrate_tail(const std::function<double(double)>& f, double from,
                            double tol, int max_panels = 200) {
    TailIntegral out;
    double lo = from;
    double prev = -1.0;
    int flat = 0;
    for (int p = 0; p < max_panels; ++p) {
        const double hi = lo * 2.0;
        const double c = gl_panel(f, lo, hi, 32);
        out.value += c;
        out.partials.push_back(out.value);
        const double ac = std::abs(c);
        if (p >= 1 && ac <= 0.25 * tol && prev <= 0.25 * tol) {
            const double q = prev > 0.0 ? std::min(0.9, ac / std::max(prev, 1e-300)) : 0.0;
            out.bound = ac + ac * q / (1.0 - q);
            out.converged = true;
            return out;
        }
        if (prev >= 0.0 && ac >= 0.999 * prev && ac > tol) {
            if (++flat >= 6) return out;  // contributions stopped shrinking
        } else {
            flat = 0;
        }
        prev = ac;
        lo = hi;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Oscillatory tail integral int_1^inf f(r) trig(w r) dr for f = g or r*g.
// Phase-capped geometric panels up to R, then the two-term endpoint
// asymptotics; the residual after two integrations by parts is bounded by
// |f'(R)| / w^2 for the monotone far tails at hand.
// ---------------------------------------------------------------------------

struct OscResult {
    double value = 0.0;
    double error = 0.0;
};

OscResult osc_tail_integral(const std::function<double(double)>& f,
                            const std::function<double(double)>& fprime,
                            double w, double tol, bool use_sin) {
    OscResult out;
    if (w == 0.0) {
        if (use_sin) return out;
        TailIntegral t = integrate_tail(f, 1.0, tol);
        out.value = t.value;
        out.error = t.bound + (t.converged ? 0.0 : std::abs(t.value));
        return out;
    }

    const double w2 = w * w;
    const double cap = kPi / w;
    auto fn = [&](double r) {
        return f(r) * (use_sin ? std::sin(w * r) : std::cos(w * r));
    };

    double lo = 1.0;
    double corr_bound = 0.0;
    while (true) {
        corr_bound = 2.0 * std::abs(fprime(lo)) / w2;
        if ((corr_bound <= 0.5 * tol && lo >= 4.0) || lo > 1e12) break;
        const double h = std::min(lo, cap);
        out.value += gl_panel(fn, lo, lo + h, 16);
        lo += h;
    }

    const double fr = f(lo);
    const double fp = fprime(lo);
    if (use_sin) {
        out.value += fr * std::cos(w * lo) / w - fp * std::sin(w * lo) / w2;
    } else {
        out.value += -fr * std::sin(w * lo) / w - fp * std::cos(w * lo) / w2;
    }
    out.error += corr_bound;
    return out;
}

// ---------------------------------------------------------------------------
// Small-jump part of the symbol:
//   S(k) = |S^{d-1}| int_0^1 r^{-1-alpha} (1 - A_d(k r)) dr
// with the sub-r_min slice summed analytically from the series of A_d.
// ---------------------------------------------------------------------------

struct PartValue {
    double value = 0.0;
    double deriv = 0.0;
    double error = 0.0;
};

PartValue small_jump_part(const AngularAverager& ang, int d, double alpha,
                          double k, double tol) {
    PartValue out;
    (void)d;
    if (k == 0.0) return out;

    const double r_min = std::min(0.2 / k, 0.2);

    double fact = 1.0;  // (2j)!
    for (int j = 1; j <= 4; ++j) {
        fact *= (2.0 * j - 1.0) * (2.0 * j);
        const double sgn = (j % 2 == 1) ? 1.0 : -1.0;
        const double p = 2.0 * j - alpha;
        out.value += sgn * ang.mu[j] * std::pow(k, 2.0 * j) *
                     std::pow(r_min, p) / (fact * p);
        out.deriv += sgn * ang.mu[j] * 2.0 * j * std::pow(k, 2.0 * j - 1.0) *
                     std::pow(r_min, p) / (fact * p);
    }
    {
        const double fact10 = 3628800.0;
        const double p = 10.0 - alpha;
        const double tail_term = ang.mu[5] * std::pow(r_min, p) / (fact10 * p);
        out.error += tail_term * std::pow(k, 10.0);
        out.error += tail_term * 10.0 * std::pow(k, 9.0);
    }

    if (r_min < 1.0) {
        const double share = 0.5 * tol;
        PanelResult v = integrate_adaptive(
            [&](double r) { return std::pow(r, -1.0 - alpha) * (1.0 - ang.value(k * r)); },
            r_min, 1.0, share);
        PanelResult dv = integrate_adaptive(
            [&](double r) { return -std::pow(r, -alpha) * ang.deriv(k * r); },
            r_min, 1.0, share);
        out.value += v.value;
        out.deriv += dv.value;
        out.error += v.error + dv.error;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tail part of the symbol:
//   T(k) = |S^{d-1}| ( G_total - avg_theta F(k cos theta) ),
//   F(w)  = int_1^inf g(r) cos(w r) dr.
// ---------------------------------------------------------------------------

PartValue tail_part(const AngularAverager& ang, const TailDensity& tail,
                    double k, double tol) {
    PartValue out;
    if (tail.spec.kind == TailKind::Truncated) return out;

    auto g = [&](double r) { return tail.g(r); };
    auto gp = [&](double r) { return tail.gprime(r); };
    auto rg = [&](double r) { return tail.rg(r); };
    auto rgp = [&](double r) { return tail.rgprime(r); };

    TailIntegral g_total = integrate_tail(g, 1.0, 0.25 * tol);
    if (k == 0.0) return out;

    const int panels = std::max(2, static_cast<int>(std::ceil(k / 6.0)) + 2);
    const GaussRule& rule = gauss_legendre(32);
    double favg = 0.0, davg = 0.0, ferr = 0.0;
    const double share = 0.25 * tol;
    for (int p = 0; p < panels; ++p) {
        const double a = 0.5 * kPi * p / panels;
        const double b = 0.5 * kPi * (p + 1) / panels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double theta = mid + half * rule.nodes[i];
            const double wgt = rule.weights[i] * half * ang.weight(theta);
            const double c = std::cos(theta);
            OscResult F = osc_tail_integral(g, gp, k * c, share, false);
            OscResult dF = osc_tail_integral(rg, rgp, k * c, share, true);
            favg += wgt * F.value;
            davg += wgt * c * dF.value;  // d/dk cos(kcr) = -c r sin(kcr)
            ferr += wgt * (F.error + dF.error);
        }
    }
    // [0, pi/2] doubled (the average is even about pi/2)
    const double norm2 = 2.0 / ang.z_norm;
    favg *= norm2;
    davg *= norm2;
    ferr *= norm2;

    out.value = g_total.value - favg;
    out.deriv = davg;
    out.error = g_total.bound + ferr + (g_total.converged ? 0.0 : std::abs(g_total.value));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TailSpec / LevyKernel
// ---------------------------------------------------------------------------

std::string TailSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case TailKind::Truncated:
            os << "truncated";
            break;
        case TailKind::PowerLog:
            os << "powerlog(beta1=" << beta1 << ", beta2=" << beta2 << ")";
            break;
        case TailKind::Exponential:
            os << "exponential(a=" << a << ", beta=" << beta << ")";
            break;
    }
    return os.str();
}

LevyKernel LevyKernel::create_unchecked(int dim, double alpha, TailSpec tail) {
    if (dim < 2) throw ConfigError("kernel: dim must be >= 2");
    if (!(alpha > 0.0 && alpha < 2.0))
        throw ConfigError("kernel: alpha must lie in (0,2)");
    return LevyKernel(dim, alpha, tail);
}

LevyKernel LevyKernel::create(int dim, double alpha, TailSpec tail) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ConfigError("kernel: alpha must lie in (1,2)");
    switch (tail.kind) {
        case TailKind::Truncated:
            break;
        case TailKind::PowerLog:
            if (!(tail.beta1 > 2.0))
                throw ConfigError("kernel: powerlog tail requires beta1 > 2");
            break;
        case TailKind::Exponential:
            if (!(tail.a > 0.0 && tail.beta > 0.0))
                throw ConfigError("kernel: exponential tail requires a > 0, beta > 0");
            break;
    }
    LevyKernel k = create_unchecked(dim, alpha, tail);
    k.second_moment_scalar(1e-10);  // throws if the tail moment diverges
    return k;
}

double LevyKernel::radial_density(double r) const {
    if (r <= 0.0) throw std::domain_error("nu is singular at the origin");
    if (r <= 1.0) return std::pow(r, -(dim_ + alpha_));
    return tail_density(r);
}

double LevyKernel::tail_density(double r) const {
    TailDensity t{dim_, tail_};
    return t.nu(r);
}

double LevyKernel::tail_log_density(double r) const {
    TailDensity t{dim_, tail_};
    return t.log_nu(r);
}

double LevyKernel::evaluate(const Vec& z) const {
    if (static_cast<int>(z.size()) != dim_)
        throw ConfigError("kernel: point dimension mismatch");
    return radial_density(norm(z));
}

double LevyKernel::surface_area() const { return sphere_area(dim_); }

double LevyKernel::second_moment_scalar(double tol, double* err_bound) const {
    const double sd = surface_area();
    // small jumps: int_0^1 r^{d+1} r^{-d-alpha} dr = 1/(2-alpha), closed form
    double m = 1.0 / (2.0 - alpha_);
    double err = 0.0;
    if (!tail_vanishes()) {
        TailDensity t{dim_, tail_};
        TailIntegral ti = integrate_tail(
            [&](double r) { return r * r * t.g(r); }, 1.0, tol * dim_ / sd);
        if (!ti.converged)
            throw QuadratureError("kernel: tail second moment does not converge",
                                  ti.value);
        m += ti.value;
        err += ti.bound;
    }
    m *= sd / dim_;
    err *= sd / dim_;
    if (err_bound) *err_bound = err;
    return m;
}

std::vector<double> LevyKernel::second_moment(double tol) const {
    const double m = second_moment_scalar(tol);
    std::vector<double> mat(dim_ * dim_, 0.0);
    for (int i = 0; i < dim_; ++i) mat[i * dim_ + i] = m;
    return mat;
}

// ---------------------------------------------------------------------------
// Symbol
// ---------------------------------------------------------------------------

SymbolValue symbol_radial(const LevyKernel& kernel, double k, double tol) {
    SymbolValue out;
    const double sign = k < 0.0 ? -1.0 : 1.0;
    k = std::abs(k);
    if (k == 0.0) return out;

    const double sd = sphere_area(kernel.dim());
    const double share = 0.5 * tol / sd;

    AngularAverager ang(kernel.dim());
    PartValue s = small_jump_part(ang, kernel.dim(), kernel.alpha(), k, share);
    out.psi = sd * s.value;
    out.dpsi_dk = sd * s.deriv;
    out.error = sd * s.error;

    if (!kernel.tail_vanishes()) {
        TailDensity t{kernel.dim(), kernel.tail()};
        PartValue tp = tail_part(ang, t, k, share);
        out.psi += sd * tp.value;
        out.dpsi_dk += sd * tp.deriv;
        out.error += sd * tp.error;
    }
    out.dpsi_dk *= sign;
    return out;
}

double symbol(const LevyKernel& kernel, const Vec& xi, double tol, double* error_bound) {
    if (tol <= 0.0) throw ConfigError("symbol: tol must be positive");
    SymbolValue v = symbol_radial(kernel, norm(xi), tol);
    if (error_bound) *error_bound = v.error;
    return v.psi;
}

Vec symbol_gradient(const LevyKernel& kernel, const Vec& xi, double tol) {
    if (tol <= 0.0) throw ConfigError("symbol_gradient: tol must be positive");
    const double k = norm(xi);
    Vec g(xi.size(), 0.0);
    if (k == 0.0) return g;
    SymbolValue v = symbol_radial(kernel, k, tol);
    for (std::size_t i = 0; i < xi.size(); ++i) g[i] = v.dpsi_dk * xi[i] / k;
    return g;
}

// ---------------------------------------------------------------------------
// SymbolTable
// ---------------------------------------------------------------------------

SymbolTable SymbolTable::tabulate(const LevyKernel& kernel, std::vector<double> radii,
                                  double tol, int threads) {
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    SymbolTable table(kernel, tol);
    table.radii_ = std::move(radii);
    const std::size_t n = table.radii_.size();
    table.psi_.assign(n, 0.0);
    table.dpsi_.assign(n, 0.0);
    table.err_.assign(n, 0.0);

    parallel_for_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            SymbolValue v = symbol_radial(kernel, table.radii_[i], tol);
            table.psi_[i] = v.psi;
            table.dpsi_[i] = v.dpsi_dk;
            table.err_[i] = v.error;
        }
    });
    return table;
}

std::size_t SymbolTable::index_of(double k) const {
    auto it = std::lower_bound(radii_.begin(), radii_.end(), k - 1e-9 * (1.0 + k));
    if (it == radii_.end() || std::abs(*it - k) > 1e-9 * (1.0 + k))
        throw InvariantError("symbol table: missing entry for requested radius");
    return static_cast<std::size_t>(it - radii_.begin());
}

SymbolValue SymbolTable::value_at(double k) const {
    const std::size_t i = index_of(k);
    return SymbolValue{psi_[i], dpsi_[i], err_[i]};
}

void SymbolTable::corrupt_entry_for_test(std::size_t i, double value) {
    if (i < psi_.size()) psi_[i] = value;
}

// ---------------------------------------------------------------------------
// Tail condition check
// ---------------------------------------------------------------------------

TailCandidate stock_tail_candidate(const LevyKernel& kernel) {
    TailCandidate c;
    switch (kernel.tail().kind) {
        case TailKind::Truncated:
        case TailKind::PowerLog:
            c.K0 = 2.0;
            c.log_gamma = [](double) { return 0.0; };
            c.description = "K0=2, gamma=1";
            break;
        case TailKind::Exponential: {
            const double beta = kernel.tail().beta;
            const double a = kernel.tail().a;
            const double K0 = 1.0 / (1.0 - std::pow(2.0, -1.0 / beta)) + 1.0;
            const double coef = a * (1.0 - std::pow(1.0 - 1.0 / K0, beta));
            c.K0 = K0;
            c.log_gamma = [coef, beta](double s) { return coef * std::pow(s, beta); };
            c.description = "stretched-exponential gamma";
            break;
        }
    }
    return c;
}

namespace {

// int_{B(x,r)} nu^2(z) dz / (r^d gamma^2(x) nu^2(x)), in log space so that
// exponential tails at |x| ~ 1e3 stay representable.
double ball_ratio(const LevyKernel& kernel, double x_mag, double r,
                  const TailCandidate& cand) {
    const int d = kernel.dim();
    if (kernel.tail_vanishes()) return 0.0;  // nu = 0 on the whole ball

    const double log_ref = 2.0 * kernel.tail_log_density(x_mag) +
                           2.0 * cand.log_gamma(x_mag);
    const double ang_area = sphere_area(d - 1);  // 2 when d = 2

    const GaussRule& rad = gauss_legendre(24);
    const GaussRule& angu = gauss_legendre(48);
    double acc = 0.0;
    for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
        const double rho = 0.5 * r * (1.0 + rad.nodes[i]);
        const double wr = 0.5 * r * rad.weights[i];
        for (std::size_t j = 0; j < angu.nodes.size(); ++j) {
            const double th = 0.5 * kPi * (1.0 + angu.nodes[j]);
            const double wt = 0.5 * kPi * angu.weights[j];
            const double zm = std::sqrt(std::max(1e-300,
                x_mag * x_mag + rho * rho + 2.0 * x_mag * rho * std::cos(th)));
            const double lg = 2.0 * kernel.tail_log_density(std::max(zm, 1.0)) - log_ref;
            const double shell = std::pow(rho, d - 1) * ang_area *
                                 (d == 2 ? 1.0 : std::pow(std::sin(th), d - 2));
            acc += wr * wt * shell * std::exp(std::min(lg, 700.0));
        }
    }
    return acc / std::pow(r, d);
}

}  // namespace

TailConditionReport check_tail_condition(const LevyKernel& kernel, double r,
                                         const TailCandidate& candidate) {
    if (r < 1.0) throw ConfigError("check_tail_condition: r must be >= 1");
    TailConditionReport rep;
    rep.r = r;
    rep.K0 = candidate.K0;

    const int n_mags = 24;
    const int n_dirs = 16;  // isotropic density: directions are a consistency check
    const double lo = candidate.K0 * r;
    const double hi = 1e3 * candidate.K0 * r;
    double c0 = 0.0;
    for (int im = 0; im < n_mags; ++im) {
        const double mag = lo * std::pow(hi / lo, static_cast<double>(im) / (n_mags - 1));
        double worst = 0.0;
        for (int id = 0; id < n_dirs; ++id)
            worst = std::max(worst, ball_ratio(kernel, mag, r, candidate));
        rep.samples.push_back({mag, worst});
        c0 = std::max(c0, worst);
    }
    rep.empirical_c0 = c0;

    // int_{|x| >= K0} |x|^2 gamma^2(x) nu(x) dx, radial, log space
    if (kernel.tail_vanishes()) {
        rep.moment_value = 0.0;
        rep.moment_converged = true;
    } else {
        const int d = kernel.dim();
        const double sd = sphere_area(d);
        auto f = [&](double s) {
            const double lg = (d + 1) * std::log(s) + 2.0 * candidate.log_gamma(s) +
                              kernel.tail_log_density(std::max(s, 1.0));
            return std::exp(std::min(lg, 700.0));
        };
        TailIntegral ti = integrate_tail(f, std::max(candidate.K0, 1.0), 1e-10, 120);
        rep.moment_value = sd * ti.value;
        rep.moment_converged = ti.converged;
        rep.moment_partial_sums = ti.partials;
    }

    rep.pass = rep.moment_converged && std::isfinite(rep.empirical_c0);
    if (!rep.moment_converged)
        rep.notes = "moment integral did not converge (partial sums recorded)";
    return rep;
}

// ---------------------------------------------------------------------------
// Envelope scan (two-regime bound)
// ---------------------------------------------------------------------------

EnvelopeReport envelope_scan(const LevyKernel& kernel, double kmin, double kmax,
                             int n_magnitudes, int n_directions, double tol) {
    EnvelopeReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.max_ratio = 0.0;
    CounterRng rng(0xe17e10feULL);
    const int d = kernel.dim();
    for (int im = 0; im < n_magnitudes; ++im) {
        const double k = kmin * std::pow(kmax / kmin,
                          static_cast<double>(im) / std::max(1, n_magnitudes - 1));
        const double g = k <= 1.0 ? k * k : std::pow(k, kernel.alpha());
        for (int id = 0; id < n_directions; ++id) {
            Vec xi(d, 0.0);
            double nn = 0.0;
            for (int c = 0; c < d; ++c) {
                xi[c] = rng.next_normal();
                nn += xi[c] * xi[c];
            }
            nn = std::sqrt(std::max(nn, 1e-30));
            for (int c = 0; c < d; ++c) xi[c] *= k / nn;
            const double psi = symbol(kernel, xi, tol);
            const double ratio = psi / g;
            rep.rows.push_back({k, psi, ratio});
            rep.min_ratio = std::min(rep.min_ratio, ratio);
            rep.max_ratio = std::max(rep.max_ratio, ratio);
        }
    }
    return rep;
}

}  // namespace levyhom
