#pragma once

#include <functional>
#include <string>
#include <vector>

#include "levyhom/common.hpp"

namespace levyhom {

enum class TailKind { Truncated, PowerLog, Exponential };

// Density for |z| > 1. The |z| <= 1 part is always |z|^{-d-alpha}.
struct TailSpec {
    TailKind kind = TailKind::Truncated;
    double beta1 = 0.0;  // PowerLog: 1/(|z|^{d+beta1} log^{beta2}(2+|z|)), beta1 > 2
    double beta2 = 0.0;
    double a = 0.0;      // Exponential: exp(-a |z|^beta), a > 0, beta > 0
    double beta = 0.0;

    static TailSpec truncated() { return {}; }
    static TailSpec power_log(double b1, double b2) {
        TailSpec t;
        t.kind = TailKind::PowerLog;
        t.beta1 = b1;
        t.beta2 = b2;
        return t;
    }
    static TailSpec exponential(double a, double beta) {
        TailSpec t;
        t.kind = TailKind::Exponential;
        t.a = a;
        t.beta = beta;
        return t;
    }
    std::string describe() const;
};

// Isotropic jump density nu(z), alpha in (1,2), finite second moment.
class LevyKernel {
public:
    // Validates parameter ranges and numerically checks the second moment.
    static LevyKernel create(int dim, double alpha, TailSpec tail);
    // Skips admissibility validation; used to probe the condition checker
    // with deliberately bad tails.
    static LevyKernel create_unchecked(int dim, double alpha, TailSpec tail);

    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    const TailSpec& tail() const { return tail_; }
    bool tail_vanishes() const { return tail_.kind == TailKind::Truncated; }

    double evaluate(const Vec& z) const;  // throws std::domain_error at z = 0
    double radial_density(double r) const;
    double tail_density(double r) const;      // |z| > 1 branch
    double tail_log_density(double r) const;  // log nu(r), r >= 1 (far-field safe)

    // M2 = m I by isotropy; returns m with the achieved quadrature bound.
    double second_moment_scalar(double tol = 1e-12, double* err_bound = nullptr) const;
    std::vector<double> second_moment(double tol = 1e-12) const;  // row-major d x d

    double surface_area() const;  // |S^{d-1}|

private:
    LevyKernel(int dim, double alpha, TailSpec tail)
        : dim_(dim), alpha_(alpha), tail_(tail) {}
    int dim_;
    double alpha_;
    TailSpec tail_;
};

struct SymbolValue {
    double psi = 0.0;
    double dpsi_dk = 0.0;
    double error = 0.0;
};

// psi(|xi|) = int (1 - cos<xi,z>) nu(z) dz and its radial derivative,
// small-jump and tail parts integrated separately.
SymbolValue symbol_radial(const LevyKernel& kernel, double k, double tol);

double symbol(const LevyKernel& kernel, const Vec& xi, double tol,
              double* error_bound = nullptr);
Vec symbol_gradient(const LevyKernel& kernel, const Vec& xi, double tol);

// Symbol values over a fixed set of radii (one entry per distinct |xi| on a
// grid). Immutable after tabulation, safe for concurrent reads.
class SymbolTable {
public:
    static SymbolTable tabulate(const LevyKernel& kernel, std::vector<double> radii,
                                double tol = 1e-10, int threads = 1);

    const LevyKernel& kernel() const { return kernel_; }
    double tol() const { return tol_; }
    std::size_t size() const { return radii_.size(); }
    const std::vector<double>& radii() const { return radii_; }
    const std::vector<double>& psi() const { return psi_; }
    const std::vector<double>& dpsi_dk() const { return dpsi_; }
    const std::vector<double>& quadrature_error() const { return err_; }

    std::size_t index_of(double k) const;  // throws InvariantError when missing
    double psi_at(double k) const { return psi_[index_of(k)]; }
    SymbolValue value_at(double k) const;

    // validation hook: inject a broken entry so the evenness/positivity
    // checks have a negative test
    void corrupt_entry_for_test(std::size_t i, double value);

private:
    SymbolTable(LevyKernel kernel, double tol) : kernel_(kernel), tol_(tol) {}
    LevyKernel kernel_;
    double tol_;
    std::vector<double> radii_, psi_, dpsi_, err_;
};

// Candidate (K0, gamma) for the large-jump regularity condition; gamma is
// radial and carried in log form so stretched-exponential candidates do not
// overflow.
struct TailCandidate {
    double K0 = 2.0;
    std::function<double(double)> log_gamma;
    std::string description;
};

// The stock candidates for the three built-in families.
TailCandidate stock_tail_candidate(const LevyKernel& kernel);

struct TailConditionSample {
    double x_mag = 0.0;
    double ratio = 0.0;  // ball integral of nu^2 over r^d gamma^2 nu^2(x)
};

struct TailConditionReport {
    double r = 1.0;
    double K0 = 2.0;
    std::vector<TailConditionSample> samples;
    double empirical_c0 = 0.0;
    double moment_value = 0.0;  // int_{|x|>=K0} |x|^2 gamma^2 nu dx
    bool moment_converged = false;
    std::vector<double> moment_partial_sums;
    bool pass = false;
    std::string notes;
};

TailConditionReport check_tail_condition(const LevyKernel& kernel, double r,
                                         const TailCandidate& candidate);

struct EnvelopeRow {
    double k = 0.0;
    double psi = 0.0;
    double ratio = 0.0;  // psi / (k^2 1_{k<=1} + k^alpha 1_{k>1})
};

struct EnvelopeReport {
    std::vector<EnvelopeRow> rows;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
};

// Samples the two-regime bound over log-spaced magnitudes; directions are
// sampled too (the density is isotropic, so they are a consistency check).
EnvelopeReport envelope_scan(const LevyKernel& kernel, double kmin, double kmax,
                             int n_magnitudes, int n_directions, double tol);

}  // namespace levyhom
