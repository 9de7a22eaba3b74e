#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levyhom/environment.hpp"
#include "levyhom/kernels.hpp"

namespace levyhom {

struct KernelConfig {
    int dim = 2;
    double alpha = 1.4;
    TailSpec tail;

    LevyKernel build() const { return LevyKernel::create(dim, alpha, tail); }
};

struct EnvironmentConfig {
    std::string kind = "spectrum";  // "spectrum" | "shear" | "none"
    double period = 2.0 * std::numbers::pi;
    int modes = 1404;  // half-lattice sites with |m|_inf <= 26
    double spectrum_exponent = 2.0;
    double amplitude_scale = 1.0;
    double amplitude = 2.0;  // shear amplitude
    std::uint64_t seed = 7;

    StreamField build(int dim) const;
};

struct CorrectorConfig {
    int grid_n = 128;
    std::vector<double> theta_schedule = {1.0, 0.1, 0.01, 0.001, 0.0};
    double truncation_level = 0.0;  // 0 = auto
    double tol = 1e-10;
    int max_iter = 4000;
};

struct ResolventConfig {
    double lambda = 1.0;
    std::vector<double> epsilons = {0.5, 0.25, 0.125, 0.0625};
    double p = 2.0;
    double ball_radius = 0.0;  // 0 = box/4
    int box_periods = 8;
    double source_width = 1.5;
    double source_amplitude = 1.0;
    double tol = 1e-11;
};

struct MonteCarloConfig {
    int particles = 20000;
    double delta = 0.1;
    double dt = 0.0;
    double horizon = 4.0;
    double window_lo = 1.0;
    double window_hi = 4.0;
    int batches = 32;
    std::string abar_file;  // optional: reuse a saved effective matrix
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output_dir = "out";
    KernelConfig kernel;
    EnvironmentConfig environment;
    CorrectorConfig corrector;
    ResolventConfig resolvent;
    MonteCarloConfig montecarlo;
    std::vector<std::string> stages = {"kernel-check", "env-gen", "corrector",
                                       "effective", "resolvent-sweep", "simulate"};
    // parse-time constraint warnings (not errors), e.g. d <= 4 (alpha - 1)
    std::vector<std::string> warnings;

    // canonical JSON serialization; the hash is FNV-1a over it
    std::string canonical_json() const;
    std::string hash() const;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig reference();  // the stock shear configuration
};

std::uint64_t fnv1a(const std::string& text);

}  // namespace levyhom
