#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyhom/environment.hpp"
#include "levyhom/rng.hpp"

using namespace levyhom;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kL = 2.0 * kPi;
}  // namespace

TEST_CASE("empty synthesis gives the zero field") {
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = 0;
    StreamField H = synthesize(spec, 1);
    CHECK(H.modes().empty());
    CHECK(H.eval_component(0, 1, {0.3, 0.4}) == 0.0);
    DriftField b = drift(H);
    CHECK(b.eval({0.3, 0.4})[0] == 0.0);
    CHECK(b.eval({0.3, 0.4})[1] == 0.0);
}

TEST_CASE("one-mode reconstruction matches the closed form") {
    // mode k = (2 pi / L, 0): H_01(x) = cos(x_0) at L = 2 pi
    StreamMode m;
    m.m = {1, 0};
    m.amp = {1.0};
    m.phase = 0.0;
    StreamField H(2, kL, {m});
    CounterRng rng(0x11ULL);
    for (int i = 0; i < 200; ++i) {
        Vec x = {kL * rng.next_uniform(), kL * rng.next_uniform()};
        CHECK(H.eval_component(0, 1, x) == doctest::Approx(std::cos(x[0])).epsilon(1e-14));
        CHECK(H.eval_component(1, 0, x) == -H.eval_component(0, 1, x));
    }
}

TEST_CASE("synthesis is deterministic in (spec, seed)") {
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = 25;
    StreamField a = synthesize(spec, 42);
    StreamField b = synthesize(spec, 42);
    REQUIRE(a.modes().size() == b.modes().size());
    for (std::size_t i = 0; i < a.modes().size(); ++i) {
        CHECK(a.modes()[i].m == b.modes()[i].m);
        CHECK(a.modes()[i].amp == b.modes()[i].amp);
        CHECK(a.modes()[i].phase == b.modes()[i].phase);
    }
    StreamField c = synthesize(spec, 43);
    bool differs = false;
    for (std::size_t i = 0; i < a.modes().size(); ++i)
        differs = differs || a.modes()[i].amp != c.modes()[i].amp;
    CHECK(differs);
}

TEST_CASE("drift of the one-mode field is the shear closed form") {
    StreamMode m;
    m.m = {1, 0};
    m.amp = {1.0};
    m.phase = 0.0;
    StreamField H(2, kL, {m});
    DriftField b = drift(H);

    CounterRng rng(0x12ULL);
    for (int i = 0; i < 200; ++i) {
        Vec x = {kL * rng.next_uniform(), kL * rng.next_uniform()};
        Vec bv = b.eval(x);
        CHECK(bv[0] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(bv[1] == doctest::Approx(-std::sin(x[0])).epsilon(1e-14));
    }
    // spec point: x = (L/4, 0) gives the extreme value -2 pi / L
    Vec bv = b.eval({kL / 4.0, 0.0});
    CHECK(bv[1] == doctest::Approx(-2.0 * kPi / kL).epsilon(1e-14));
}

TEST_CASE("drift is divergence-free mode by mode, exactly") {
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = 80;
    StreamField H = synthesize(spec, 7);
    DriftField b = drift(H);
    CHECK(b.max_mode_divergence() == 0.0);
}

TEST_CASE("evaluation is periodic and antisymmetric") {
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = 30;
    StreamField H = synthesize(spec, 5);
    DriftField b = drift(H);
    CounterRng rng(0x13ULL);
    for (int i = 0; i < 1000; ++i) {
        Vec x = {kL * rng.next_uniform(), kL * rng.next_uniform()};
        auto M = H.eval(x);
        CHECK(M[0 * 2 + 1] + M[1 * 2 + 0] == 0.0);
        CHECK(M[0] == 0.0);
        CHECK(M[3] == 0.0);

        Vec xs = {x[0] + kL, x[1]};
        Vec b1 = b.eval(x), b2 = b.eval(xs);
        CHECK(b1[0] == doctest::Approx(b2[0]).epsilon(1e-12));
        CHECK(b1[1] == doctest::Approx(b2[1]).epsilon(1e-12));
    }
}

TEST_CASE("realized drift has zero spatial average") {
    StreamSpec spec;
    spec.dim = 2;
    spec.mode_count = 30;
    StreamField H = synthesize(spec, 5);
    DriftField b = drift(H);
    GridPtr grid = TorusGrid::make(2, 64, kL);
    auto bf = b.realize(grid);
    for (const Field& comp : bf) CHECK(std::abs(comp.mean()) < 1e-13);
}

TEST_CASE("moment report: zero field, closed-form cos^8 moment, exponents") {
    StreamField zero(2, kL, {});
    MomentReport rep0 = moment_report(zero, 1.0, 1.2, 1.4, 8.0);
    CHECK(rep0.pass);
    CHECK(rep0.n_sup == 0.0);
    for (double v : rep0.h_power_moments) CHECK(v == 0.0);

    // avg |A cos|^8 = A^8 * 35 / 128
    const double A = 1.7;
    StreamField H = shear_stream(kL, A);
    MomentReport rep = moment_report(H, 1.0, 1.2, 1.4, 8.0);
    CHECK(rep.h_power_moments.size() == 1);
    CHECK(rep.h_power_moments[0] ==
          doctest::Approx(std::pow(A, 8.0) * 35.0 / 128.0).epsilon(1e-12));

    // N_sup = sup |d H| = A (unit wavenumber at L = 2 pi)
    CHECK(rep.n_sup == doctest::Approx(A).epsilon(1e-3));

    // p0 = dq/(d-q), p0' = 2 p0 alpha / (4(alpha-1) + p0 (2-alpha))
    CHECK(rep.p0 == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(rep.p0_prime == doctest::Approx(8.4 / 3.4).epsilon(1e-12));
    CHECK(rep.q_in_range);
    CHECK(rep.dim_ok);
    CHECK(std::isfinite(rep.sobolev_moments[0]));
    CHECK(rep.sobolev_moments[0] > 0.0);
}

TEST_CASE("moment report flags constraint violations without aborting") {
    StreamField H = shear_stream(kL, 1.0);
    MomentReport rep = moment_report(H, 1.0, 0.9, 1.4, 8.0);  // q too small
    CHECK_FALSE(rep.q_in_range);
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.warnings.empty());
}
