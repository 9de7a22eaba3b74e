#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyhom/montecarlo.hpp"

using namespace levyhom;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kL = 2.0 * kPi;

LevyKernel kern() { return LevyKernel::create(2, 1.4, TailSpec::truncated()); }

SimConfig base_config(const StreamField& stream, int particles = 20000) {
    SimConfig c{kern(), stream, 0.1, 0.0, 2.0, particles, 12345, 9, 32, 1, {}};
    return c;
}
}  // namespace

TEST_CASE("jump sampler: rates and inverse transform on the stable piece") {
    JumpSampler s = make_jump_sampler(kern(), 0.1);
    const double alpha = 1.4;
    const double expect_rate = 2.0 * kPi * (std::pow(0.1, -alpha) - 1.0) / alpha;
    CHECK(s.rate == doctest::Approx(expect_rate).epsilon(1e-12));
    CHECK(s.p_small == 1.0);  // truncated tail contributes nothing

    // the sampled radius at quantile u solves the closed-form equation
    for (double u : {0.0, 0.3, 0.9, 0.999}) {
        const double r = s.sample_radius(u);
        CHECK(r >= 0.1);
        CHECK(r <= 1.0);
        const double da = std::pow(0.1, -alpha);
        const double cdf = (da - std::pow(r, -alpha)) / (da - 1.0);
        CHECK(cdf == doctest::Approx(u).epsilon(1e-12));
    }

    // delta = 1 kills the compound-Poisson part entirely
    JumpSampler s1 = make_jump_sampler(kern(), 1.0);
    CHECK(s1.rate == 0.0);
    CHECK(s1.sigma ==
          doctest::Approx(std::sqrt(kPi / 0.6)).epsilon(1e-12));
}

TEST_CASE("deterministic transport with the test hooks") {
    StreamField empty(2, kL, {});
    SimConfig c = base_config(empty, 50);
    c.scheme.disable_jumps = true;
    c.scheme.constant_drift = {1.0, -2.0};
    c.scheme.uniform_start = false;
    PathStats st = simulate(c);
    for (std::size_t s = 0; s < st.times.size(); ++s) {
        const double t = st.times[s];
        CHECK(st.mean[s][0] == doctest::Approx(t * 1.0).epsilon(1e-12));
        CHECK(st.mean[s][1] == doctest::Approx(t * -2.0).epsilon(1e-12));
        // identical paths: covariance is zero up to summation round-off
        for (double v : st.cov[s]) CHECK(std::abs(v) < 1e-14);
    }
}

TEST_CASE("simulation is deterministic in (config, seed)") {
    StreamField stream = shear_stream(kL, 2.0);
    SimConfig c = base_config(stream, 500);
    PathStats a = simulate(c);
    PathStats b = simulate(c);
    for (std::size_t s = 0; s < a.times.size(); ++s)
        for (int i = 0; i < 4; ++i) CHECK(a.cov[s][i] == b.cov[s][i]);
    CHECK(a.big_jumps_observed == b.big_jumps_observed);

    // thread-count independence of the chunked reduction
    SimConfig c2 = c;
    c2.threads = 2;
    PathStats t2 = simulate(c2);
    for (std::size_t s = 0; s < a.times.size(); ++s)
        for (int i = 0; i < 4; ++i) CHECK(a.cov[s][i] == t2.cov[s][i]);

    SimConfig c3 = c;
    c3.seed = 999;
    PathStats other = simulate(c3);
    bool differs = false;
    for (std::size_t s = 1; s < a.times.size(); ++s)
        differs = differs || a.cov[s][0] != other.cov[s][0];
    CHECK(differs);
}

TEST_CASE("pure Gaussian surrogate reproduces the second-moment rate") {
    StreamField empty(2, kL, {});
    SimConfig c = base_config(empty, 20000);
    c.delta = 1.0;  // everything below the cutoff: Brownian surrogate only
    PathStats st = simulate(c);
    DiffusivityEstimate est = effective_diffusivity_mc(st, 0.5, 2.0);
    const double m = kPi / 0.6;
    for (int a = 0; a < 2; ++a) {
        const double z = std::abs(est.value[a * 2 + a] - m) /
                         std::max(est.stderr_[a * 2 + a], 1e-300);
        CHECK(z <= 3.0);
    }
    const double zoff = std::abs(est.value[1]) / std::max(est.stderr_[1], 1e-300);
    CHECK(zoff <= 3.0);
}

TEST_CASE("big-jump count is Poisson-consistent") {
    StreamField empty(2, kL, {});
    SimConfig c = base_config(empty, 4000);
    c.delta = 0.25;
    PathStats st = simulate(c);
    const double z = std::abs(st.big_jumps_observed - st.big_jumps_expected) /
                     std::sqrt(st.big_jumps_expected);
    CHECK(z <= 3.0);
}

TEST_CASE("doubling the particle count shrinks standard errors") {
    StreamField empty(2, kL, {});
    SimConfig c1 = base_config(empty, 8000);
    SimConfig c2 = base_config(empty, 16000);
    PathStats s1 = simulate(c1);
    PathStats s2 = simulate(c2);
    const std::size_t last = s1.times.size() - 1;
    const double r = s2.cov_stderr[last][0] / s1.cov_stderr[last][0];
    // CLT: ratio should sit near 1/sqrt(2), within 20%
    CHECK(r > 1.0 / std::sqrt(2.0) * 0.8);
    CHECK(r < 1.0 / std::sqrt(2.0) * 1.2);
}

TEST_CASE("mean displacement is statistically zero under the shear drift") {
    StreamField stream = shear_stream(kL, 2.0);
    SimConfig c = base_config(stream, 20000);
    PathStats st = simulate(c);
    const std::size_t last = st.times.size() - 1;
    for (int a = 0; a < 2; ++a) {
        const double z = std::abs(st.mean[last][a]) /
                         std::max(st.mean_stderr[last][a], 1e-300);
        CHECK(z <= 3.5);
    }
}

TEST_CASE("delta-robustness of the diffusivity estimate") {
    // common random numbers: the independence-based 3 sigma band is then
    // conservative for the difference
    StreamField stream = shear_stream(kL, 2.0);
    SimConfig c1 = base_config(stream, 20000);
    c1.delta = 0.2;
    SimConfig c2 = base_config(stream, 20000);
    c2.delta = 0.1;
    DiffusivityEstimate e1 = effective_diffusivity_mc(simulate(c1), 0.5, 2.0);
    DiffusivityEstimate e2 = effective_diffusivity_mc(simulate(c2), 0.5, 2.0);
    for (int i = 0; i < 4; ++i) {
        const double se = std::sqrt(e1.stderr_[i] * e1.stderr_[i] +
                                    e2.stderr_[i] * e2.stderr_[i]);
        CHECK(std::abs(e1.value[i] - e2.value[i]) <= 3.0 * std::max(se, 1e-12));
    }
}

TEST_CASE("rescaled paths: identity at eps = 1, stable slope for pure jumps") {
    StreamField empty(2, kL, {});
    SimConfig c = base_config(empty, 4000);
    PathStats plain = simulate(c);
    PathStats eps1 = rescaled_paths(c, 1.0);
    for (std::size_t s = 0; s < plain.times.size(); ++s)
        for (int i = 0; i < 4; ++i) CHECK(plain.cov[s][i] == eps1.cov[s][i]);

    SimConfig ch = base_config(empty, 4000);
    ch.horizon = 1.0;
    ch.slices = 5;
    DiffusivityEstimate d1 =
        effective_diffusivity_mc(rescaled_paths(ch, 1.0), 0.25, 1.0);
    DiffusivityEstimate dh =
        effective_diffusivity_mc(rescaled_paths(ch, 0.5), 0.25, 1.0);
    for (int a = 0; a < 2; ++a) {
        const int i = a * 2 + a;
        const double se = std::sqrt(d1.stderr_[i] * d1.stderr_[i] +
                                    dh.stderr_[i] * dh.stderr_[i]);
        CHECK(std::abs(d1.value[i] - dh.value[i]) <= 3.0 * se);
    }
}
