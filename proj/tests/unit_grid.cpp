#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyhom/environment.hpp"
#include "levyhom/grid.hpp"
#include "levyhom/krylov.hpp"
#include "levyhom/quadrature.hpp"
#include "levyhom/rng.hpp"
#include "support/oracles.hpp"

using namespace levyhom;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kL = 2.0 * kPi;

Field random_field(const GridPtr& grid, std::uint64_t seed) {
    CounterRng rng(seed);
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.next_normal();
    return f;
}
}  // namespace

TEST_CASE("grid rejects bad parameters and odd sizes") {
    CHECK_THROWS_AS(TorusGrid::make(2, 3, kL), ConfigError);
    CHECK_THROWS_AS(TorusGrid::make(2, 7, kL), ConfigError);
    CHECK_THROWS_AS(TorusGrid::make(2, 8, -1.0), ConfigError);
    CHECK_NOTHROW(TorusGrid::make(2, 12, kL));  // non power of two is fine
}

TEST_CASE("transform round trip and Parseval") {
    GridPtr grid = TorusGrid::make(2, 32, kL);
    Field f = random_field(grid, 0x21ULL);
    Spectrum s = SpectralOps::transform(f);
    Field g = SpectralOps::inverse_transform(s);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(f[i] - g[i]));
    CHECK(worst / f.max_abs() < 1e-13);

    double par = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) par += std::norm(s[i]);
    CHECK(par == doctest::Approx(dot(f, f)).epsilon(1e-12));
}

TEST_CASE("constant and plane-wave transforms") {
    GridPtr grid = TorusGrid::make(2, 16, kL);
    Field c(grid, 3.5);
    Spectrum sc = SpectralOps::transform(c);
    CHECK(sc[0].real() == doctest::Approx(3.5).epsilon(1e-14));
    double off = 0.0;
    for (std::size_t i = 1; i < sc.size(); ++i) off = std::max(off, std::abs(sc[i]));
    CHECK(off < 1e-14);

    Field w(grid);
    for (std::size_t i = 0; i < w.size(); ++i) {
        Vec x = grid->point(i);
        w[i] = std::cos(2.0 * x[0] + x[1]);
    }
    Spectrum sw = SpectralOps::transform(w);
    int nonzero = 0;
    for (std::size_t i = 0; i < sw.size(); ++i)
        if (std::abs(sw[i]) > 1e-12) ++nonzero;
    CHECK(nonzero == 2);  // conjugate modes at +-(2,1)
}

TEST_CASE("spectral gradient is exact on band-limited fields") {
    GridPtr grid = TorusGrid::make(2, 32, kL);
    Field w(grid);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::cos(3.0 * grid->point(i)[0]);
    auto g = SpectralOps::spectral_gradient(w);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        worst = std::max(worst, std::abs(g[0][i] + 3.0 * std::sin(3.0 * grid->point(i)[0])));
        worst = std::max(worst, std::abs(g[1][i]));
    }
    CHECK(worst < 1e-12);

    Field c(grid, 2.0);
    auto gc = SpectralOps::spectral_gradient(c);
    CHECK(gc[0].max_abs() < 1e-14);
}

TEST_CASE("divergence of synthesized drift vanishes spectrally") {
    GridPtr grid = TorusGrid::make(2, 64, kL);
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = 60;
    auto bf = drift(synthesize(spec, 3)).realize(grid);
    auto g0 = SpectralOps::spectral_gradient(bf[0]);
    auto g1 = SpectralOps::spectral_gradient(bf[1]);
    double scale = std::max(bf[0].max_abs(), bf[1].max_abs());
    double worst = 0.0;
    for (std::size_t i = 0; i < g0[0].size(); ++i)
        worst = std::max(worst, std::abs(g0[0][i] + g1[1][i]));
    CHECK(worst / scale < 1e-12);
}

TEST_CASE("nonlocal operator: eigenfunctions and real-space quadrature oracle") {
    LevyKernel kern = LevyKernel::create(2, 1.4, TailSpec::truncated());
    GridPtr grid = TorusGrid::make(2, 16, kL);
    SymbolTable table = tabulate_for_grid(kern, *grid);
    NonlocalMultiplier mult(grid, table);

    Field c(grid, 1.0);
    CHECK(apply_nonlocal(mult, c).max_abs() < 1e-14);

    Field w(grid);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::cos(grid->point(i)[0]);
    Field Lw = apply_nonlocal(mult, w);
    const double psi1 = table.psi_at(1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        worst = std::max(worst, std::abs(Lw[i] - psi1 * w[i]));
    CHECK(worst < 1e-12);

    // real-space principal-value quadrature of L0 f at a few grid points;
    // for f = cos<k0,.> this is -psi(k0) f(x), by the symmetrized form
    // int (f(x+z) + f(x-z) - 2 f(x))/2 nu(z) dz = -psi(k0) cos(k0 x)
    auto pv_quad = [&](const Vec& x) {
        const double r_lo = 1e-6;
        auto integrand = [&](double r) {
            // angular average of cos(<k0, x+z>) over |z| = r:
            // cos(k0 x) * J0(r) with k0 = e_0
            return -r * std::pow(r, -3.4) * testing::one_minus_j0_trap(r, 512) *
                   std::cos(x[0]);
        };
        PanelResult res = integrate_adaptive(integrand, r_lo, 1.0, 1e-9);
        // analytic slice below r_lo: 1 - J0 = r^2/4 + O(r^4)
        const double slice = -std::pow(r_lo, 0.6) / (4.0 * 0.6) * std::cos(x[0]);
        return 2.0 * kPi * (res.value + slice);
    };
    for (std::size_t i : {std::size_t(0), std::size_t(5), std::size_t(100)}) {
        const Vec x = grid->point(i);
        CHECK(pv_quad(x) == doctest::Approx(-Lw[i]).epsilon(1e-6));
    }
}

TEST_CASE("nonlocal pairing is symmetric and nonnegative") {
    LevyKernel kern = LevyKernel::create(2, 1.4, TailSpec::truncated());
    GridPtr grid = TorusGrid::make(2, 32, kL);
    SymbolTable table = tabulate_for_grid(kern, *grid);
    NonlocalMultiplier mult(grid, table);
    Field f = random_field(grid, 0x31ULL);
    Field g = random_field(grid, 0x32ULL);
    Field Lf = apply_nonlocal(mult, f);
    Field Lg = apply_nonlocal(mult, g);
    CHECK(dot(Lf, g) == doctest::Approx(dot(f, Lg)).epsilon(1e-12));
    CHECK(dot(Lf, f) >= 0.0);
}

TEST_CASE("drifted operator is linear to round-off") {
    LevyKernel kern = LevyKernel::create(2, 1.4, TailSpec::truncated());
    GridPtr grid = TorusGrid::make(2, 32, kL);
    SymbolTable table = tabulate_for_grid(kern, *grid);
    std::vector<double> diag = NonlocalMultiplier(grid, table).values();
    auto bf = drift(shear_stream(kL, 2.0)).realize(grid);
    LinearOperator op = make_drifted_operator(grid, diag, bf, true, "probe");

    Field f = random_field(grid, 0x41ULL);
    Field g = random_field(grid, 0x42ULL);
    const double al = 0.3, be = -1.7;
    Field combo(grid);
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = al * f[i] + be * g[i];
    Field lhs = op.apply(combo);
    Field rf = op.apply(f), rg = op.apply(g);
    double worst = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i)
        worst = std::max(worst, std::abs(lhs[i] - al * rf[i] - be * rg[i]));
    CHECK(worst <= 1e-12 * (norm_l2(f) + norm_l2(g)) * 100.0);
}

TEST_CASE("krylov: identity, diagonal oracle, dense-LU oracle") {
    GridPtr grid = TorusGrid::make(2, 8, kL);

    LinearOperator id;
    id.name = "identity";
    id.apply = [](const Field& f) { return f; };
    Field rhs = random_field(grid, 0x51ULL);
    KrylovResult r1 = krylov_solve(id, rhs, 1e-13, 4);
    CHECK(r1.converged);
    CHECK(r1.iterations <= 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i)
        worst = std::max(worst, std::abs(r1.x[i] - rhs[i]));
    CHECK(worst < 1e-12);

    // diagonal spectral operator vs exact division
    LevyKernel kern = LevyKernel::create(2, 1.4, TailSpec::truncated());
    SymbolTable table = tabulate_for_grid(kern, *grid);
    std::vector<double> diag = NonlocalMultiplier(grid, table).values();
    const double theta = 0.3;
    for (double& v : diag) v += theta;
    LinearOperator dop = make_drifted_operator(grid, diag, {}, false, "diag");
    KrylovResult r2 = krylov_solve(dop, rhs, 1e-12, 200);
    CHECK(r2.converged);
    Spectrum rs = SpectralOps::transform(rhs);
    for (std::size_t fl = 0; fl < rs.size(); ++fl) rs[fl] /= diag[fl];
    Field exact = SpectralOps::inverse_transform(rs);
    worst = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i)
        worst = std::max(worst, std::abs(exact[i] - r2.x[i]));
    CHECK(worst < 1e-10);

    // full drifted operator vs dense LU on the mean-zero subspace
    auto bf = drift(shear_stream(kL, 2.0)).realize(grid);
    std::vector<double> diag0 = NonlocalMultiplier(grid, table).values();
    LinearOperator full = make_drifted_operator(grid, diag0, bf, true, "full");
    Field rhs0 = bf[0];
    rhs0.subtract_mean();
    for (std::size_t i = 0; i < rhs0.size(); ++i) rhs0[i] = -rhs0[i];
    Field dense = testing::dense_mean_zero_solve(full, rhs0);
    KrylovResult r3 = krylov_solve(full, rhs0, 1e-13, 2000);
    CHECK(r3.converged);
    worst = 0.0;
    for (std::size_t i = 0; i < dense.size(); ++i)
        worst = std::max(worst, std::abs(dense[i] - r3.x[i]));
    CHECK(worst < 1e-9);
}

TEST_CASE("krylov reports non-convergence with the residual trace") {
    GridPtr grid = TorusGrid::make(2, 8, kL);
    LevyKernel kern = LevyKernel::create(2, 1.4, TailSpec::truncated());
    SymbolTable table = tabulate_for_grid(kern, *grid);
    std::vector<double> diag = NonlocalMultiplier(grid, table).values();
    for (double& v : diag) v += 1.0;
    LinearOperator op = make_drifted_operator(grid, diag, {}, false, "starved");
    op.precondition = nullptr;  // make one iteration insufficient
    Field rhs = random_field(grid, 0x61ULL);
    KrylovResult res = krylov_solve(op, rhs, 1e-14, 1);
    CHECK_FALSE(res.converged);
    CHECK(res.residual_history.size() >= 2);
    CHECK_THROWS_AS(krylov_solve_or_throw(op, rhs, 1e-14, 1), ConvergenceError);
}

TEST_CASE("dealiasing keeps band-limited fields intact") {
    GridPtr grid = TorusGrid::make(2, 32, kL);
    Field w(grid);
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = std::sin(2.0 * grid->point(i)[1]);
    Spectrum s = SpectralOps::transform(w);
    s.dealias(grid->max_mode());
    Field back = SpectralOps::inverse_transform(s);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        worst = std::max(worst, std::abs(w[i] - back[i]));
    CHECK(worst < 1e-13);
}

TEST_CASE("field evaluate matches grid values and is periodic") {
    GridPtr grid = TorusGrid::make(2, 16, kL);
    Field w(grid);
    for (std::size_t i = 0; i < w.size(); ++i) {
        Vec x = grid->point(i);
        w[i] = std::cos(x[0]) * std::sin(2.0 * x[1]);
    }
    CHECK(w.evaluate({0.7, 1.3}) ==
          doctest::Approx(std::cos(0.7) * std::sin(2.6)).epsilon(1e-12));
    CHECK(w.evaluate({0.7 + kL, 1.3}) ==
          doctest::Approx(w.evaluate({0.7, 1.3})).epsilon(1e-12));
}
