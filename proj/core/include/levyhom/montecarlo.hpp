#pragma once

#include <cstdint>
#include <vector>

#include "levyhom/environment.hpp"
#include "levyhom/kernels.hpp"

namespace levyhom {

struct SchemeOptions {
    bool disable_jumps = false;  // test hook: pure transport
    Vec constant_drift;          // test hook: overrides the environment drift
    bool uniform_start = true;   // uniform start in one period cell, else 0
};

struct SimConfig {
    LevyKernel kernel;
    StreamField stream;
    double delta = 0.1;      // small-jump cutoff in (0,1]
    double dt = 0.0;         // drift substep; 0 selects the default rule
    double horizon = 4.0;
    int particles = 10000;
    std::uint64_t seed = 1;
    int slices = 17;         // time slices including t = 0
    int batches = 32;
    int threads = 1;
    SchemeOptions scheme;

    double resolved_dt(double sup_drift) const;
};

struct PathStats {
    int d = 0;
    double horizon = 0.0;
    int particles = 0;
    int batches = 0;
    double delta = 0.0;
    std::vector<double> times;                     // per slice
    std::vector<std::vector<double>> mean;         // slice -> d (displacement)
    std::vector<std::vector<double>> mean_stderr;  // slice -> d
    std::vector<std::vector<double>> cov;          // slice -> d*d
    std::vector<std::vector<double>> cov_stderr;   // slice -> d*d
    std::vector<std::vector<double>> excess_kurtosis;  // slice -> d
    double big_jump_rate = 0.0;       // Lambda_delta
    double big_jumps_expected = 0.0;  // Lambda_delta * T * M
    double big_jumps_observed = 0.0;
    double effective_samples = 0.0;
    // per-batch covariance sums per slice, for windowed slope errors
    std::vector<std::vector<std::vector<double>>> batch_cov;  // batch->slice->d*d
    std::vector<std::vector<double>> batch_count;             // batch->slice
};

// Compound-Poisson big jumps + Gaussian small-jump surrogate + midpoint
// drift integration between jump epochs. Deterministic given (config, seed);
// particles use independent counter substreams and the reduction order is
// fixed by the chunk grid, not by the thread count.
PathStats simulate(const SimConfig& config);

struct DiffusivityEstimate {
    int d = 0;
    std::vector<double> value;   // d*d, symmetrized slope of cov vs t
    std::vector<double> stderr_; // d*d, batch means
    double t_lo = 0.0, t_hi = 0.0;
};

DiffusivityEstimate effective_diffusivity_mc(const PathStats& stats,
                                             double t_lo, double t_hi);

// statistics of eps X_{t/eps^2}; eps = 1 reproduces simulate()
PathStats rescaled_paths(const SimConfig& config, double epsilon);

// big-jump machinery exposed for tests
struct JumpSampler {
    double rate = 0.0;           // Lambda_delta
    double sigma = 0.0;          // per-axis Gaussian surrogate std-dev rate
    double p_small = 1.0;        // mass of the (delta,1] piece
    double delta = 0.1;
    double alpha = 1.8;
    int d = 2;
    // inverse-CDF table for the tail radius (r > 1)
    std::vector<double> tail_u, tail_r;

    double sample_radius(double u) const;
};

JumpSampler make_jump_sampler(const LevyKernel& kernel, double delta);

}  // namespace levyhom
