#include "levyhom/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levyhom/quadrature.hpp"
#include "levyhom/rng.hpp"

namespace levyhom {

namespace {
constexpr double kPi = std::numbers::pi;
}

double SimConfig::resolved_dt(double sup_drift) const {
    if (dt > 0.0) return dt;
    if (sup_drift <= 0.0) return 1e-2;
    const int n_eff = 2 * (stream.max_mode_index() + 1);
    return std::min(1e-2, 0.1 * stream.period() / (n_eff * sup_drift));
}

JumpSampler make_jump_sampler(const LevyKernel& kernel, double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw ConfigError("simulate: delta must lie in (0,1]");
    JumpSampler s;
    s.delta = delta;
    s.alpha = kernel.alpha();
    s.d = kernel.dim();
    const double sd = kernel.surface_area();
    const double alpha = kernel.alpha();
    const int d = kernel.dim();

    // small-jump Gaussian surrogate: per-axis variance rate
    s.sigma = std::sqrt(sd * std::pow(delta, 2.0 - alpha) / ((2.0 - alpha) * d));

    // rate of the (delta, 1] piece
    const double mass_mid = sd * (std::pow(delta, -alpha) - 1.0) / alpha;

    // tail piece r > 1: cumulative int_1^r s^{d-1} nu(s) ds on a log grid,
    // kept both as the inverse-CDF table and (times |S^{d-1}|) as the rate
    double mass_tail = 0.0;
    if (!kernel.tail_vanishes()) {
        const int nseg = 4096;
        const double r_hi = 1e6;
        double lo = 1.0;
        const double ratio = std::pow(r_hi, 1.0 / nseg);
        s.tail_u.push_back(0.0);
        s.tail_r.push_back(1.0);
        for (int i = 0; i < nseg; ++i) {
            const double hi = lo * ratio;
            mass_tail += gl_panel([&](double r) {
                return std::pow(r, d - 1) * kernel.tail_density(r);
            }, lo, hi, 16);
            s.tail_u.push_back(mass_tail);
            s.tail_r.push_back(hi);
            lo = hi;
        }
        for (double& u : s.tail_u) u /= mass_tail;
    }

    s.rate = mass_mid + sd * mass_tail;
    s.p_small = s.rate > 0.0 ? mass_mid / s.rate : 1.0;
    return s;
}

double JumpSampler::sample_radius(double u) const {
    if (u < p_small || tail_u.empty()) {
        // inverse CDF of r^{-1-alpha} on (delta, 1]
        const double v = p_small > 0.0 ? u / p_small : 0.0;
        const double da = std::pow(delta, -alpha);
        return std::pow(da - v * (da - 1.0), -1.0 / alpha);
    }
    const double v = (u - p_small) / std::max(1e-300, 1.0 - p_small);
    auto it = std::lower_bound(tail_u.begin(), tail_u.end(), v);
    std::size_t i = std::min<std::size_t>(tail_u.size() - 1,
        static_cast<std::size_t>(it - tail_u.begin()));
    if (i == 0) i = 1;
    const double u0 = tail_u[i - 1], u1 = tail_u[i];
    const double t = u1 > u0 ? (v - u0) / (u1 - u0) : 0.0;
    return tail_r[i - 1] + t * (tail_r[i] - tail_r[i - 1]);
}

namespace {

struct SliceAccum {
    // per batch, per slice: sums of displacement moments
    // layout: [batch][slice] with vectors of size d, d*d, d
    std::vector<std::vector<std::vector<double>>> sum1, sum2, sum4;
    std::vector<std::vector<double>> count;
    double jumps = 0.0;

    SliceAccum(int batches, int slices, int d)
        : sum1(batches, std::vector<std::vector<double>>(slices, std::vector<double>(d, 0.0))),
          sum2(batches, std::vector<std::vector<double>>(slices, std::vector<double>(d * d, 0.0))),
          sum4(batches, std::vector<std::vector<double>>(slices, std::vector<double>(d, 0.0))),
          count(batches, std::vector<double>(slices, 0.0)) {}

    void merge(const SliceAccum& o) {
        for (std::size_t b = 0; b < sum1.size(); ++b)
            for (std::size_t s = 0; s < sum1[b].size(); ++s) {
                for (std::size_t i = 0; i < sum1[b][s].size(); ++i)
                    sum1[b][s][i] += o.sum1[b][s][i];
                for (std::size_t i = 0; i < sum2[b][s].size(); ++i)
                    sum2[b][s][i] += o.sum2[b][s][i];
                for (std::size_t i = 0; i < sum4[b][s].size(); ++i)
                    sum4[b][s][i] += o.sum4[b][s][i];
                count[b][s] += o.count[b][s];
            }
        jumps += o.jumps;
    }
};

}  // namespace

PathStats simulate(const SimConfig& config) {
    const int d = config.kernel.dim();
    if (config.particles < 1) throw ConfigError("simulate: particles must be >= 1");
    if (!(config.horizon > 0.0)) throw ConfigError("simulate: horizon must be positive");
    if (config.slices < 2) throw ConfigError("simulate: need at least two slices");

    const DriftField bfield = drift(config.stream);
    const bool const_drift = !config.scheme.constant_drift.empty();
    if (const_drift && static_cast<int>(config.scheme.constant_drift.size()) != d)
        throw ConfigError("simulate: constant drift dimension mismatch");

    double supb = 0.0;
    if (const_drift) {
        for (double v : config.scheme.constant_drift) supb = std::max(supb, std::abs(v));
    } else {
        supb = bfield.sup_abs(64);
    }
    const double dt = config.resolved_dt(supb);

    JumpSampler sampler;
    if (!config.scheme.disable_jumps)
        sampler = make_jump_sampler(config.kernel, config.delta);

    const int slices = config.slices;
    std::vector<double> times(slices);
    for (int s = 0; s < slices; ++s)
        times[s] = config.horizon * s / (slices - 1);

    const int batches = config.batches;
    const std::size_t n_chunks =
        std::min<std::size_t>(64, static_cast<std::size_t>(config.particles));
    std::vector<SliceAccum> partial(n_chunks, SliceAccum(batches, slices, d));

    const std::size_t chunk_size =
        (static_cast<std::size_t>(config.particles) + n_chunks - 1) / n_chunks;

    auto run_chunk = [&](std::size_t c) {
        SliceAccum& acc = partial[c];
        const std::size_t pid_lo = c * chunk_size;
        const std::size_t pid_hi = std::min<std::size_t>(config.particles,
                                                         pid_lo + chunk_size);
        Vec x(d), x0(d), xm(d), bv(d);
        for (std::size_t pid = pid_lo; pid < pid_hi; ++pid) {
            CounterRng rng(mix_seed(config.seed, pid));
            const int batch = static_cast<int>(pid % batches);

            for (int a = 0; a < d; ++a)
                x[a] = config.scheme.uniform_start
                           ? config.stream.period() * rng.next_uniform()
                           : 0.0;
            x0 = x;

            double t = 0.0;
            int slice = 0;
            // record t = 0
            acc.count[batch][0] += 1.0;
            ++slice;

            double next_jump = config.scheme.disable_jumps || sampler.rate <= 0.0
                                   ? std::numeric_limits<double>::infinity()
                                   : rng.next_exponential() / sampler.rate;

            auto advance_to = [&](double target) {
                while (t < target - 1e-15) {
                    const double h = std::min(dt, target - t);
                    if (const_drift) {
                        for (int a = 0; a < d; ++a)
                            x[a] += h * config.scheme.constant_drift[a];
                    } else if (!config.stream.modes().empty()) {
                        // explicit midpoint
                        bv = bfield.eval(x);
                        for (int a = 0; a < d; ++a) xm[a] = x[a] + 0.5 * h * bv[a];
                        bv = bfield.eval(xm);
                        for (int a = 0; a < d; ++a) x[a] += h * bv[a];
                    }
                    if (!config.scheme.disable_jumps && sampler.sigma > 0.0) {
                        const double sq = sampler.sigma * std::sqrt(h);
                        for (int a = 0; a < d; ++a) x[a] += sq * rng.next_normal();
                    }
                    t += h;
                }
                t = target;
            };

            while (slice < slices) {
                const double t_slice = times[slice];
                if (next_jump < t_slice && next_jump <= config.horizon) {
                    advance_to(next_jump);
                    // big jump: radius by inverse transform, uniform direction
                    const double r = sampler.sample_radius(rng.next_uniform());
                    double nn = 0.0;
                    for (int a = 0; a < d; ++a) {
                        bv[a] = rng.next_normal();
                        nn += bv[a] * bv[a];
                    }
                    nn = std::sqrt(std::max(nn, 1e-300));
                    for (int a = 0; a < d; ++a) x[a] += r * bv[a] / nn;
                    acc.jumps += 1.0;
                    next_jump += rng.next_exponential() / sampler.rate;
                    continue;
                }
                advance_to(t_slice);
                for (int a = 0; a < d; ++a) {
                    const double da = x[a] - x0[a];
                    acc.sum1[batch][slice][a] += da;
                    acc.sum4[batch][slice][a] += da * da * da * da;
                    for (int b2 = 0; b2 < d; ++b2)
                        acc.sum2[batch][slice][a * d + b2] += da * (x[b2] - x0[b2]);
                }
                acc.count[batch][slice] += 1.0;
                ++slice;
            }
        }
    };

    parallel_for_chunks(n_chunks, config.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) run_chunk(c);
    });

    SliceAccum total(batches, slices, d);
    for (const SliceAccum& p : partial) total.merge(p);

    PathStats st;
    st.d = d;
    st.horizon = config.horizon;
    st.particles = config.particles;
    st.batches = batches;
    st.delta = config.delta;
    st.times = times;
    st.big_jump_rate = sampler.rate;
    st.big_jumps_expected = sampler.rate * config.horizon * config.particles;
    st.big_jumps_observed = total.jumps;
    st.effective_samples = config.particles;

    st.mean.assign(slices, std::vector<double>(d, 0.0));
    st.mean_stderr.assign(slices, std::vector<double>(d, 0.0));
    st.cov.assign(slices, std::vector<double>(d * d, 0.0));
    st.cov_stderr.assign(slices, std::vector<double>(d * d, 0.0));
    st.excess_kurtosis.assign(slices, std::vector<double>(d, 0.0));
    st.batch_cov.assign(batches, std::vector<std::vector<double>>(
                                     slices, std::vector<double>(d * d, 0.0)));
    st.batch_count.assign(batches, std::vector<double>(slices, 0.0));

    for (int s = 1; s < slices; ++s) {
        double n_all = 0.0;
        std::vector<double> m1(d, 0.0), m2(d * d, 0.0), m4(d, 0.0);
        std::vector<std::vector<double>> bmean(batches, std::vector<double>(d, 0.0));
        std::vector<std::vector<double>> bcov(batches, std::vector<double>(d * d, 0.0));
        for (int b = 0; b < batches; ++b) {
            const double nb = total.count[b][s];
            if (nb <= 0.0) continue;
            n_all += nb;
            for (int a = 0; a < d; ++a) {
                m1[a] += total.sum1[b][s][a];
                m4[a] += total.sum4[b][s][a];
                bmean[b][a] = total.sum1[b][s][a] / nb;
            }
            for (int i = 0; i < d * d; ++i) {
                m2[i] += total.sum2[b][s][i];
                bcov[b][i] = total.sum2[b][s][i] / nb;
            }
            st.batch_cov[b][s] = bcov[b];
            st.batch_count[b][s] = nb;
        }
        for (int a = 0; a < d; ++a) st.mean[s][a] = m1[a] / n_all;
        for (int i = 0; i < d * d; ++i) st.cov[s][i] = m2[i] / n_all;
        // center the covariance
        for (int a = 0; a < d; ++a)
            for (int b2 = 0; b2 < d; ++b2)
                st.cov[s][a * d + b2] -= st.mean[s][a] * st.mean[s][b2];
        for (int a = 0; a < d; ++a) {
            const double v = st.cov[s][a * d + a];
            const double mu4 = m4[a] / n_all;
            st.excess_kurtosis[s][a] = v > 0.0 ? mu4 / (v * v) - 3.0 : 0.0;
        }
        // batch-means standard errors
        int used = 0;
        std::vector<double> meandev(d, 0.0), covdev(d * d, 0.0);
        for (int b = 0; b < batches; ++b) {
            if (st.batch_count[b][s] <= 0.0) continue;
            ++used;
            for (int a = 0; a < d; ++a) {
                const double dev = bmean[b][a] - st.mean[s][a];
                meandev[a] += dev * dev;
            }
            for (int i = 0; i < d * d; ++i) {
                // compare raw second moments to the raw global second moment
                const double raw = st.cov[s][i] + st.mean[s][i / d] * st.mean[s][i % d];
                const double dev = bcov[b][i] - raw;
                covdev[i] += dev * dev;
            }
        }
        if (used > 1) {
            for (int a = 0; a < d; ++a)
                st.mean_stderr[s][a] =
                    std::sqrt(meandev[a] / (used * (used - 1.0)));
            for (int i = 0; i < d * d; ++i)
                st.cov_stderr[s][i] =
                    std::sqrt(covdev[i] / (used * (used - 1.0)));
        }
    }
    return st;
}

DiffusivityEstimate effective_diffusivity_mc(const PathStats& stats,
                                             double t_lo, double t_hi) {
    const int d = stats.d;
    DiffusivityEstimate est;
    est.d = d;
    est.t_lo = t_lo;
    est.t_hi = t_hi;
    est.value.assign(d * d, 0.0);
    est.stderr_.assign(d * d, 0.0);

    std::vector<int> window;
    for (std::size_t s = 1; s < stats.times.size(); ++s)
        if (stats.times[s] >= t_lo - 1e-12 && stats.times[s] <= t_hi + 1e-12)
            window.push_back(static_cast<int>(s));
    if (window.size() < 3)
        throw ConfigError("diffusivity: window covers fewer than 3 slices");

    // per-batch least-squares slope of cov vs t over the window
    auto slope_of = [&](const std::vector<std::vector<double>>& covs, int i) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(window.size());
        for (int s : window) {
            const double x = stats.times[s];
            const double y = covs[s][i];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };

    std::vector<std::vector<double>> bslope(stats.batches,
                                            std::vector<double>(d * d, 0.0));
    int used = 0;
    for (int b = 0; b < stats.batches; ++b) {
        bool ok = true;
        for (int s : window) ok = ok && stats.batch_count[b][s] > 0.0;
        if (!ok) continue;
        ++used;
        for (int i = 0; i < d * d; ++i) bslope[b][i] = slope_of(stats.batch_cov[b], i);
    }
    if (used < 4)
        throw ConfigError("diffusivity: not enough populated batches");

    for (int i = 0; i < d * d; ++i) {
        double m = 0.0;
        int cnt = 0;
        for (int b = 0; b < stats.batches; ++b) {
            bool ok = true;
            for (int s : window) ok = ok && stats.batch_count[b][s] > 0.0;
            if (!ok) continue;
            m += bslope[b][i];
            ++cnt;
        }
        m /= cnt;
        double var = 0.0;
        for (int b = 0; b < stats.batches; ++b) {
            bool ok = true;
            for (int s : window) ok = ok && stats.batch_count[b][s] > 0.0;
            if (!ok) continue;
            var += (bslope[b][i] - m) * (bslope[b][i] - m);
        }
        est.value[i] = m;
        est.stderr_[i] = std::sqrt(var / (cnt * (cnt - 1.0)));
    }
    // symmetrize
    for (int a = 0; a < d; ++a)
        for (int b2 = a + 1; b2 < d; ++b2) {
            const double v = 0.5 * (est.value[a * d + b2] + est.value[b2 * d + a]);
            est.value[a * d + b2] = est.value[b2 * d + a] = v;
            const double e = 0.5 * std::sqrt(est.stderr_[a * d + b2] * est.stderr_[a * d + b2] +
                                             est.stderr_[b2 * d + a] * est.stderr_[b2 * d + a]);
            est.stderr_[a * d + b2] = est.stderr_[b2 * d + a] = e;
        }
    return est;
}

PathStats rescaled_paths(const SimConfig& config, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw ConfigError("rescaled paths: epsilon must lie in (0,1]");
    SimConfig scaled = config;
    scaled.horizon = config.horizon / (epsilon * epsilon);
    PathStats st = simulate(scaled);
    // report in macroscopic time: t = eps^2 s, X = eps X_s
    st.horizon = config.horizon;
    const double e2 = epsilon * epsilon;
    for (double& t : st.times) t *= e2;
    for (auto& v : st.mean)
        for (double& x : v) x *= epsilon;
    for (auto& v : st.mean_stderr)
        for (double& x : v) x *= epsilon;
    for (auto& v : st.cov)
        for (double& x : v) x *= e2;
    for (auto& v : st.cov_stderr)
        for (double& x : v) x *= e2;
    for (auto& bc : st.batch_cov)
        for (auto& v : bc)
            for (double& x : v) x *= e2;
    // kurtosis is scale-free
    return st;
}

}  // namespace levyhom
