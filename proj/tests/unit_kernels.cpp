#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyhom/kernels.hpp"
#include "levyhom/rng.hpp"
#include "support/oracles.hpp"

using namespace levyhom;

namespace {
constexpr double kPi = std::numbers::pi;

LevyKernel truncated14() { return LevyKernel::create(2, 1.4, TailSpec::truncated()); }
}  // namespace

TEST_CASE("density evaluates the two-piece definition") {
    LevyKernel k = truncated14();
    CHECK(k.evaluate({0.5, 0.0}) == doctest::Approx(std::pow(0.5, -3.4)).epsilon(1e-14));
    CHECK(k.evaluate({2.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(k.evaluate({0.0, 0.0}), std::domain_error);

    // symmetry is exact: the density depends on |z| only
    CounterRng rng(0x5ULL);
    for (int i = 0; i < 10000; ++i) {
        Vec z = {3.0 * rng.next_normal(), 3.0 * rng.next_normal()};
        if (std::abs(z[0]) + std::abs(z[1]) == 0.0) continue;
        Vec mz = {-z[0], -z[1]};
        CHECK(k.evaluate(z) == k.evaluate(mz));
    }
}

TEST_CASE("construction validates parameter ranges") {
    CHECK_THROWS_AS(LevyKernel::create(2, 0.9, TailSpec::truncated()), ConfigError);
    CHECK_THROWS_AS(LevyKernel::create(2, 2.0, TailSpec::truncated()), ConfigError);
    CHECK_THROWS_AS(LevyKernel::create(2, 1.4, TailSpec::power_log(1.5, 0.0)),
                    ConfigError);
    CHECK_THROWS_AS(LevyKernel::create(2, 1.4, TailSpec::exponential(-1.0, 1.0)),
                    ConfigError);
    CHECK_NOTHROW(LevyKernel::create(2, 1.4, TailSpec::power_log(3.0, -1.0)));
}

TEST_CASE("second moment matches the radial closed forms") {
    LevyKernel k = truncated14();
    auto m2 = k.second_moment();
    const double expect = kPi / (2.0 - 1.4);
    CHECK(m2[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(m2[3] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(m2[1] == 0.0);
    CHECK(m2[2] == 0.0);

    LevyKernel pl = LevyKernel::create(2, 1.4, TailSpec::power_log(3.0, 0.0));
    CHECK(pl.second_moment_scalar() ==
          doctest::Approx(kPi / 0.6 + kPi).epsilon(1e-11));
}

TEST_CASE("symbol: zero, small-xi asymptotics, evenness") {
    LevyKernel k = truncated14();
    CHECK(symbol(k, {0.0, 0.0}, 1e-10) == 0.0);

    const double m = k.second_moment_scalar();
    // psi / (1/2 <M2 xi, xi>) -> 1 along a decreasing sequence
    double prev_dev = 1.0;
    for (double kk : {1e-2, 1e-3}) {
        const double psi = symbol(k, {kk, 0.0}, 1e-13);
        const double ratio = psi / (0.5 * m * kk * kk);
        CHECK(std::abs(ratio - 1.0) < 0.01);
        CHECK(std::abs(ratio - 1.0) <= prev_dev);
        prev_dev = std::abs(ratio - 1.0);
    }

    CHECK(symbol(k, {0.7, -0.3}, 1e-10) ==
          doctest::Approx(symbol(k, {-0.7, 0.3}, 1e-10)).epsilon(1e-13));
}

TEST_CASE("symbol agrees with the independent radial reduction") {
    LevyKernel k = truncated14();
    for (double kk : {0.25, 1.0, 3.0, 8.0}) {
        double err = 0.0;
        const double psi = symbol(k, {kk, 0.0}, 1e-11, &err);
        const double oracle = testing::symbol_oracle_truncated_2d(kk, 1.4);
        CHECK(std::abs(psi - oracle) < 1e-8);
    }
}

TEST_CASE("symbol error bound is honest against the oracle") {
    LevyKernel k = truncated14();
    for (double kk : {0.5, 2.0, 20.0}) {
        double err = 0.0;
        const double psi = symbol(k, {kk, 0.0}, 1e-9, &err);
        const double oracle = testing::symbol_oracle_truncated_2d(kk, 1.4);
        CHECK(std::abs(psi - oracle) <= err + 1e-8);
    }
}

TEST_CASE("symbol gradient: oddness, zero at origin, FD consistency") {
    LevyKernel k = truncated14();
    Vec g0 = symbol_gradient(k, {0.0, 0.0}, 1e-10);
    CHECK(g0[0] == 0.0);
    CHECK(g0[1] == 0.0);

    Vec gp = symbol_gradient(k, {1.0, 0.4}, 1e-10);
    Vec gm = symbol_gradient(k, {-1.0, -0.4}, 1e-10);
    CHECK(gp[0] == doctest::Approx(-gm[0]).epsilon(1e-12));
    CHECK(gp[1] == doctest::Approx(-gm[1]).epsilon(1e-12));

    // centered differences of symbol() at xi = (1,0): O(h^2)
    auto fd_err = [&](double h) {
        const double pp = symbol(k, {1.0 + h, 0.0}, 1e-13);
        const double pm = symbol(k, {1.0 - h, 0.0}, 1e-13);
        const Vec g = symbol_gradient(k, {1.0, 0.0}, 1e-13);
        return std::abs(g[0] - (pp - pm) / (2.0 * h));
    };
    const double e2 = fd_err(1e-2);
    const double e3 = fd_err(1e-3);
    CHECK(e2 < 1e-3);
    CHECK(e3 < e2 / 25.0 + 1e-12);
}

TEST_CASE("two-regime envelope stays within a bounded band") {
    LevyKernel k = truncated14();
    EnvelopeReport rep = envelope_scan(k, 1e-2, 1e2, 40, 4, 1e-8);
    CHECK(rep.min_ratio > 0.0);
    CHECK(std::isfinite(rep.max_ratio));
    CHECK(rep.max_ratio / rep.min_ratio < 50.0);
}

TEST_CASE("powerlog symbol: small-xi limit uses the full second moment") {
    LevyKernel pl = LevyKernel::create(2, 1.4, TailSpec::power_log(3.0, 0.0));
    const double m = pl.second_moment_scalar();
    const double kk = 1e-3;
    const double psi = symbol(pl, {0.0, kk}, 1e-12);
    CHECK(psi / (0.5 * m * kk * kk) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("tail condition: stock candidates pass, short tails trivially") {
    for (TailSpec spec : {TailSpec::truncated(), TailSpec::power_log(3.0, 0.0),
                          TailSpec::exponential(1.0, 1.0)}) {
        LevyKernel k = LevyKernel::create(2, 1.4, spec);
        TailCandidate cand = stock_tail_candidate(k);
        TailConditionReport rep = check_tail_condition(k, 1.0, cand);
        CHECK(rep.pass);
        CHECK(rep.moment_converged);
        CHECK(std::isfinite(rep.empirical_c0));
        if (spec.kind == TailKind::Truncated) {
            for (const auto& s : rep.samples) CHECK(s.ratio == 0.0);
            CHECK(rep.moment_value == 0.0);
        }
    }
    // the exponential example pins K0 = 1/(1-2^{-1/beta}) + 1
    LevyKernel ex = LevyKernel::create(2, 1.4, TailSpec::exponential(1.0, 1.0));
    CHECK(stock_tail_candidate(ex).K0 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("tail condition flags a divergent moment") {
    LevyKernel bad = LevyKernel::create_unchecked(2, 1.4, TailSpec::power_log(1.5, 0.0));
    TailConditionReport rep = check_tail_condition(bad, 1.0, stock_tail_candidate(bad));
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.moment_converged);
    CHECK(rep.moment_partial_sums.size() > 2);
    // the partial sums trace a growing sequence
    const auto& ps = rep.moment_partial_sums;
    CHECK(ps.back() > ps.front());
}

TEST_CASE("symbol table: tabulation, lookup, missing radius") {
    LevyKernel k = truncated14();
    SymbolTable t = SymbolTable::tabulate(k, {0.0, 1.0, 2.0, 1.0}, 1e-10);
    CHECK(t.size() == 3);  // deduplicated
    CHECK(t.psi_at(0.0) == 0.0);
    CHECK(t.psi_at(1.0) == doctest::Approx(symbol(k, {1.0, 0.0}, 1e-10)).epsilon(1e-12));
    CHECK_THROWS_AS(t.psi_at(3.0), InvariantError);
    for (double e : t.quadrature_error()) CHECK(e <= 1e-9);
}
