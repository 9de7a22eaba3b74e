#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyhom/corrector.hpp"
#include "levyhom/rng.hpp"
#include "support/oracles.hpp"

using namespace levyhom;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kL = 2.0 * kPi;

LevyKernel kern() { return LevyKernel::create(2, 1.4, TailSpec::truncated()); }

StreamField multi_env(int modes = 40, std::uint64_t seed = 7) {
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = modes;
    return synthesize(spec, seed);
}
}  // namespace

TEST_CASE("stream clamp: identity window, saturation, derivative bound") {
    const double R = 2.0;
    CHECK(stream_clamp(1.5, R) == 1.5);
    CHECK(stream_clamp(-1.5, R) == -1.5);
    CHECK(stream_clamp(5.0, R) == doctest::Approx(1.5 * R));
    CHECK(stream_clamp(-5.0, R) == doctest::Approx(-1.5 * R));
    // |rho'| <= 2 sampled, and oddness
    for (double s = -6.0; s <= 6.0; s += 0.01) {
        const double h = 1e-6;
        const double der = (stream_clamp(s + h, R) - stream_clamp(s - h, R)) / (2 * h);
        CHECK(std::abs(der) <= 2.0 + 1e-6);
        CHECK(stream_clamp(-s, R) == doctest::Approx(-stream_clamp(s, R)).epsilon(1e-14));
    }
}

TEST_CASE("zero drift short-circuits to the zero corrector") {
    StreamField empty(2, kL, {});
    GridPtr grid = TorusGrid::make(2, 16, kL);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), empty, 0.0);
    CorrectorSolution sol = solve_regularized(p);
    for (const Field& phi : sol.phi) CHECK(phi.max_abs() == 0.0);
    for (double e : sol.energy) CHECK(e == 0.0);
}

TEST_CASE("shear corrector matches the closed form at theta = 0") {
    // b_0 = A sin(x_1), phi_0 = -(A / psi(1)) sin(x_1), phi_1 = 0
    const double A = 2.0;
    StreamField stream = shear_stream(kL, A);
    GridPtr grid = TorusGrid::make(2, 32, kL);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), stream, 0.0, 1e-12);
    CorrectorSolution sol = solve_regularized(p);
    const double psi1 = p.table->psi_at(1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid->total(); ++i) {
        const Vec x = grid->point(i);
        worst = std::max(worst, std::abs(sol.phi[0][i] + (A / psi1) * std::sin(x[1])));
        worst = std::max(worst, std::abs(sol.phi[1][i]));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("matrix-free solve matches the dense oracle (N=8, theta=0.1)") {
    StreamField stream = shear_stream(kL, 2.0);
    GridPtr grid = TorusGrid::make(2, 8, kL);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), stream, 0.1, 1e-13);
    CorrectorSolution sol = solve_regularized(p);

    std::vector<double> diag = sol.psi_mult;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double k2 = grid->radius_flat(i) * grid->radius_flat(i);
        diag[i] += 0.1 * (1.0 + k2);
    }
    LinearOperator op = make_drifted_operator(grid, diag, sol.drift_used, true, "dense");
    for (int k = 0; k < 2; ++k) {
        Field rhs(grid);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -sol.drift_used[k][i];
        Field dense = testing::dense_mean_zero_solve(op, rhs);
        double worst = 0.0;
        for (std::size_t i = 0; i < dense.size(); ++i)
            worst = std::max(worst, std::abs(dense[i] - sol.phi[k][i]));
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("inactive truncation level reproduces the untruncated solve") {
    StreamField stream = multi_env(20, 3);
    GridPtr grid = TorusGrid::make(2, 32, kL);
    CorrectorProblem p1 = CorrectorProblem::make(grid, kern(), stream, 0.0);
    CorrectorProblem p2 = p1;
    p2.truncation_level = 1e9;  // effectively no clamp
    CorrectorSolution s1 = solve_regularized(p1);  // default R = 2 sup|H|
    CorrectorSolution s2 = solve_regularized(p2);
    double worst = 0.0;
    for (int k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < s1.phi[k].size(); ++i)
            worst = std::max(worst, std::abs(s1.phi[k][i] - s2.phi[k][i]));
    CHECK(worst == 0.0);  // identical drift fields, identical deterministic solve
}

TEST_CASE("continuation: single-stage equality, bounded energy, final residual") {
    StreamField stream = multi_env();
    GridPtr grid = TorusGrid::make(2, 32, kL);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), stream, 1.0);

    CorrectorSolution single = solve_regularized(p);
    CorrectorSolution sched1 = continuation_solve(p, {1.0});
    for (int k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < single.phi[k].size(); ++i)
            CHECK(single.phi[k][i] == sched1.phi[k][i]);

    CHECK_THROWS_AS(continuation_solve(p, {0.1, 0.1}), ConfigError);

    CorrectorSolution sol = continuation_solve(p, {1.0, 0.1, 0.01, 0.0});
    CHECK(sol.theta == 0.0);
    CHECK(sol.theta_path.size() == 4);
    // energy a priori bound holds at every stage (discrete Cauchy-Schwarz)
    for (const CorrectorStage& st : sol.theta_path)
        for (int k = 0; k < 2; ++k)
            CHECK(st.energy[k] <= sol.energy_bound[k] * (1.0 + 1e-6));

    // theta = 0 operator reproduces -b_k
    std::vector<double> diag = sol.psi_mult;
    LinearOperator op = make_drifted_operator(grid, diag, sol.drift_used, true, "check");
    for (int k = 0; k < 2; ++k) {
        Field Ax = op.apply(sol.phi[k]);
        Field rhs(grid);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -sol.drift_used[k][i];
        rhs.subtract_mean();
        axpy(-1.0, rhs, Ax);
        CHECK(norm_l2(Ax) / norm_l2(rhs) < 1e-8);
    }

    // drift-term neutrality along the path
    for (const CorrectorStage& st : sol.theta_path)
        for (int k = 0; k < 2; ++k) {
            const double scale = std::max(st.energy[k], 1e-300);
            CHECK(std::abs(st.drift_pairing[k]) / scale < 1e-10);
        }
}

TEST_CASE("weak residual: solution-level defect, detector, zero case") {
    StreamField stream = multi_env(30, 11);
    GridPtr grid = TorusGrid::make(2, 32, kL);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), stream, 0.0, 1e-11);
    CorrectorSolution sol = solve_regularized(p);

    CounterRng rng(0x71ULL);
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.next_normal();
    {
        Spectrum fs = SpectralOps::transform(f);
        fs.dealias(grid->max_mode());
        f = SpectralOps::inverse_transform(fs);
    }
    for (int k = 0; k < 2; ++k) {
        const double res = weak_residual(p, sol, k, f);
        const double strong = sol.residual[k] * norm_l2(sol.drift_used[k]);
        CHECK(res <= 10.0 * (strong + 1e-12) * norm_l2(f) + 1e-10);
    }

    // phi = 0 with b != 0 detects a non-solution: residual = ||b_k||^2
    CorrectorSolution zero = sol;
    for (Field& phi : zero.phi) phi = Field(grid);
    const double res0 = weak_residual(p, zero, 0, zero.drift_used[0]);
    CHECK(res0 == doctest::Approx(dot(sol.drift_used[0], sol.drift_used[0])).epsilon(1e-10));

    // b = 0, phi = 0: residual 0
    StreamField empty(2, kL, {});
    CorrectorProblem p0 = CorrectorProblem::make(grid, kern(), empty, 0.0);
    CorrectorSolution sol0 = solve_regularized(p0);
    CHECK(weak_residual(p0, sol0, 0, f) == 0.0);
}

TEST_CASE("energy identity: shear closed form and polarization") {
    StreamField stream = shear_stream(kL, 2.0);
    GridPtr grid = TorusGrid::make(2, 64, kL);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), stream, 0.0, 1e-12);
    CorrectorSolution sol = solve_regularized(p);
    EnergyIdentityReport rep = energy_identity_check(sol, stream);

    CHECK(rep.rel_gap[0] < 1e-8);
    CHECK(rep.lhs[0] < 0.0);  // the pairing is strictly negative for phi != 0

    // polarized with k = l reduces to 4x the diagonal identity
    CHECK(rep.pol_lhs[0] == doctest::Approx(4.0 * rep.lhs[0]).epsilon(1e-12));
    CHECK(rep.pol_rhs[0] == doctest::Approx(4.0 * rep.rhs[0]).epsilon(1e-12));
    CHECK(rep.pol_gap[0] < 1e-8);
}

TEST_CASE("correctors are mean-zero and satisfy the lattice co-cycle identity") {
    StreamField stream = multi_env(25, 9);
    GridPtr grid = TorusGrid::make(2, 32, kL);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), stream, 0.0);
    CorrectorSolution sol = solve_regularized(p);
    for (const Field& phi : sol.phi) CHECK(std::abs(phi.mean()) < 1e-13);

    // D(x, z1+z2) = D(x, z1) + D(x+z1, z2) for lattice shifts
    const Field& phi = sol.phi[0];
    const int n = grid->n();
    auto at = [&](int i, int j) {
        const int idx[2] = {i, j};
        return phi[grid->flatten(idx)];
    };
    const double scale = std::max(phi.max_abs(), 1e-300);
    double worst = 0.0;
    for (int i = 0; i < n; i += 3)
        for (int j = 0; j < n; j += 3) {
            const double lhs = at(i + 5, j + 7) - at(i, j);
            const double rhs = (at(i + 2, j + 3) - at(i, j)) +
                               (at(i + 5, j + 7) - at(i + 2, j + 3));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    CHECK(worst / scale < 1e-12);
}

TEST_CASE("sublinearity scan: zero field, slope two, monotone decay") {
    StreamField empty(2, kL, {});
    GridPtr grid = TorusGrid::make(2, 32, kL);
    CorrectorProblem p0 = CorrectorProblem::make(grid, kern(), empty, 0.0);
    CorrectorSolution zero = solve_regularized(p0);
    SublinearityReport rep0 =
        sublinearity_scan(zero, {1.0, 0.5, 0.25}, 1.0, 3.0);
    for (const auto& row : rep0.rows) {
        CHECK(row.l2_value == 0.0);
        CHECK(row.p0_value == 0.0);
    }

    StreamField stream = shear_stream(kL, 2.0);
    CorrectorProblem p = CorrectorProblem::make(grid, kern(), stream, 0.0, 1e-11);
    CorrectorSolution sol = solve_regularized(p);
    SublinearityReport rep =
        sublinearity_scan(sol, {0.25, 0.125, 0.0625, 0.03125}, 1.0, 3.0);
    CHECK(rep.slope_l2 == doctest::Approx(2.0).epsilon(0.05));
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        CHECK(rep.rows[i].l2_value < rep.rows[i - 1].l2_value);
}
