#include "levyhom/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyhom/quadrature.hpp"

namespace levyhom {

namespace {
constexpr double kPi = std::numbers::pi;
}

double stream_clamp(double s, double R) {
    const double a = std::abs(s);
    if (a <= R) return s;
    const double sign = s < 0.0 ? -1.0 : 1.0;
    if (a >= 2.0 * R) return sign * 1.5 * R;
    const double u = a - R;
    return sign * (R + u - u * u / (2.0 * R));
}

CorrectorProblem CorrectorProblem::make(GridPtr grid, const LevyKernel& kernel,
                                        const StreamField& stream, double theta,
                                        double tol, int threads) {
    if (theta < 0.0) throw ConfigError("corrector: theta must be >= 0");
    if (grid->dim() != kernel.dim() || grid->dim() != stream.dim())
        throw ConfigError("corrector: dimension mismatch");
    CorrectorProblem p{grid,
                       kernel,
                       std::make_shared<SymbolTable>(
                           tabulate_for_grid(kernel, *grid, 1.0, 1e-10, threads)),
                       stream,
                       theta,
                       0.0,
                       tol,
                       4000,
                       threads};
    return p;
}

namespace {

struct ProblemSetup {
    std::vector<double> psi_mult;   // psi per mode
    std::vector<Field> drift;       // b^R, band-limited
    double R = 0.0;
    std::vector<double> energy_bound;  // 2 W_k
};

// Realize the clamped drift: clamp H pointwise, differentiate spectrally,
// band-limit to the dealiasing cutoff.
ProblemSetup setup_problem(const CorrectorProblem& p) {
    ProblemSetup s;
    const GridPtr& grid = p.grid;
    const int d = grid->dim();

    s.psi_mult = NonlocalMultiplier(grid, *p.table).values();

    double R = p.truncation_level;
    if (R <= 0.0) R = std::max(1.0, 2.0 * p.stream.sup_abs());
    s.R = R;

    // clamped stream components, band-limited spectra
    const int kmax = grid->max_mode();
    std::vector<std::vector<Spectrum>> hs(d, std::vector<Spectrum>(d));
    for (int j = 0; j < d; ++j) {
        for (int l = j + 1; l < d; ++l) {
            Field H = p.stream.realize_component(grid, j, l);
            for (std::size_t i = 0; i < H.size(); ++i) H[i] = stream_clamp(H[i], R);
            Spectrum S = SpectralOps::transform(H);
            S.dealias(kmax);
            S.zero_mode_out();
            hs[j][l] = S;
        }
    }

    s.drift.assign(d, Field(grid));
    for (int j = 0; j < d; ++j) {
        Spectrum acc(grid);
        for (int l = 0; l < d; ++l) {
            if (l == j) continue;
            // b_j = -sum_l d_l H_jl with H_jl = -H_lj below the diagonal
            const Spectrum& S = j < l ? hs[j][l] : hs[l][j];
            const double sign = j < l ? -1.0 : 1.0;
            Spectrum der = SpectralOps::derivative(S, l);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sign * der[i];
        }
        s.drift[j] = SpectralOps::inverse_transform(acc);
    }

    // a priori energy bound 2 W_k, W_k = sum_xi |xi|^2 |H_k.(xi)|^2 / (2 psi)
    s.energy_bound.assign(d, 0.0);
    for (int k = 0; k < d; ++k) {
        double w = 0.0;
        for (int l = 0; l < d; ++l) {
            if (l == k) continue;
            const Spectrum& S = k < l ? hs[k][l] : hs[l][k];
            for (std::size_t i = 0; i < S.size(); ++i) {
                const double psi = s.psi_mult[i];
                if (psi <= 0.0) continue;
                const double k2 = grid->radius_flat(i) * grid->radius_flat(i);
                w += k2 * std::norm(S[i]) / (2.0 * psi);
            }
        }
        s.energy_bound[k] = 2.0 * w;
    }
    return s;
}

double spectral_energy(const std::vector<double>& psi_mult, const Spectrum& s) {
    double e = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) e += psi_mult[i] * std::norm(s[i]);
    return e;
}

std::vector<double> diag_multiplier(const CorrectorProblem& p,
                                    const std::vector<double>& psi_mult) {
    const GridPtr& grid = p.grid;
    std::vector<double> diag(psi_mult);
    if (p.theta > 0.0) {
        for (std::size_t i = 0; i < diag.size(); ++i) {
            const double k2 = grid->radius_flat(i) * grid->radius_flat(i);
            diag[i] += p.theta * (1.0 + k2);
        }
    }
    return diag;
}

}  // namespace

CorrectorSolution solve_regularized(const CorrectorProblem& problem) {
    return continuation_solve(problem, {problem.theta});
}

CorrectorSolution continuation_solve(const CorrectorProblem& problem,
                                     const std::vector<double>& schedule) {
    if (schedule.empty()) throw ConfigError("corrector: empty theta schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] < schedule[i - 1]))
            throw ConfigError("corrector: theta schedule must be strictly decreasing");

    const GridPtr& grid = problem.grid;
    const int d = grid->dim();
    const int kmax = grid->max_mode();

    ProblemSetup setup = setup_problem(problem);

    CorrectorSolution sol;
    sol.grid = grid;
    sol.truncation_level = setup.R;
    sol.drift_used = setup.drift;
    sol.psi_mult = setup.psi_mult;
    sol.energy_bound = setup.energy_bound;
    sol.phi.assign(d, Field(grid));
    sol.energy.assign(d, 0.0);
    sol.residual.assign(d, 0.0);

    // zero drift short-circuits to phi = 0 (unique mean-zero solution)
    double bmax = 0.0;
    for (const Field& b : setup.drift) bmax = std::max(bmax, b.max_abs());
    if (bmax == 0.0) {
        sol.theta = schedule.back();
        CorrectorStage st;
        st.theta = sol.theta;
        st.energy.assign(d, 0.0);
        st.residual.assign(d, 0.0);
        st.drift_pairing.assign(d, 0.0);
        st.iterations.assign(d, 0);
        sol.theta_path.push_back(st);
        return sol;
    }

    for (double theta : schedule) {
        CorrectorProblem stage_problem = problem;
        stage_problem.theta = theta;
        const std::vector<double> diag = diag_multiplier(stage_problem, setup.psi_mult);
        LinearOperator op = make_drifted_operator(grid, diag, setup.drift, true,
                                                  "corrector theta=" + std::to_string(theta));

        CorrectorStage stage;
        stage.theta = theta;
        stage.energy.assign(d, 0.0);
        stage.residual.assign(d, 0.0);
        stage.drift_pairing.assign(d, 0.0);
        stage.iterations.assign(d, 0);

        std::vector<std::string> failures(d);
        parallel_for_chunks(d, problem.threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) {
                Field rhs(grid);
                for (std::size_t i = 0; i < rhs.size(); ++i)
                    rhs[i] = -setup.drift[k][i];
                {
                    Spectrum rs = SpectralOps::transform(rhs);
                    rs.dealias(kmax);
                    rs.zero_mode_out();
                    rhs = SpectralOps::inverse_transform(rs);
                }

                // warm start: solve for the correction from the previous stage
                Field base = sol.phi[k];
                Field r0 = rhs;
                if (norm_l2(base) > 0.0) {
                    Field Ab = op.apply(base);
                    axpy(-1.0, Ab, r0);
                }
                const double scale = norm_l2(rhs);
                const double rel_target =
                    scale > 0.0 ? problem.tol * scale / std::max(norm_l2(r0), 1e-300)
                                : problem.tol;
                KrylovResult kres = krylov_solve(op, r0,
                                                 std::min(1.0, rel_target),
                                                 problem.max_iter);
                axpy(1.0, kres.x, base);
                base.subtract_mean();
                sol.phi[k] = base;
                stage.iterations[k] = kres.iterations;

                // true residual against the stage operator
                Field Ax = op.apply(sol.phi[k]);
                axpy(-1.0, rhs, Ax);
                stage.residual[k] = norm_l2(Ax) / std::max(scale, 1e-300);
                if (!kres.converged && stage.residual[k] > problem.tol * 10.0) {
                    std::ostringstream os;
                    os << "corrector k=" << k << " theta=" << theta
                       << " stalled at residual " << stage.residual[k];
                    if (theta == 0.0) os << " (consider theta continuation)";
                    failures[k] = os.str();
                }

                Spectrum ps = SpectralOps::transform(sol.phi[k]);
                stage.energy[k] = spectral_energy(setup.psi_mult, ps);

                // drift-term neutrality <b . grad phi, phi>
                Field prod(grid);
                for (int a = 0; a < d; ++a) {
                    Field ga = SpectralOps::inverse_transform(SpectralOps::derivative(ps, a));
                    for (std::size_t i = 0; i < prod.size(); ++i)
                        prod[i] += setup.drift[a][i] * ga[i];
                }
                {
                    Spectrum pps = SpectralOps::transform(prod);
                    pps.dealias(kmax);
                    prod = SpectralOps::inverse_transform(pps);
                }
                stage.drift_pairing[k] = dot(prod, sol.phi[k]);
            }
        });
        for (const std::string& f : failures)
            if (!f.empty()) throw ConvergenceError(f, stage.residual[0]);

        sol.theta = theta;
        sol.energy = stage.energy;
        sol.residual = stage.residual;
        sol.theta_path.push_back(std::move(stage));
    }
    return sol;
}

double weak_residual(const CorrectorProblem& problem,
                     const CorrectorSolution& solution, int k, const Field& test) {
    const GridPtr& grid = solution.grid;
    const int d = grid->dim();
    const Field& phi = solution.phi[k];
    const double theta = solution.theta;

    NonlocalMultiplier mult(grid, *problem.table);
    Field Lphi = apply_nonlocal(mult, phi);  // -L0 phi
    double acc = dot(Lphi, test);            // 1/2 <<phi, f>>_nu
    if (theta > 0.0) {
        acc += theta * dot(phi, test);
        auto gp = SpectralOps::spectral_gradient(phi);
        auto gt = SpectralOps::spectral_gradient(test);
        for (int a = 0; a < d; ++a) acc += theta * dot(gp[a], gt[a]);
    }
    auto gt = SpectralOps::spectral_gradient(test);
    for (int a = 0; a < d; ++a) {
        Field prod(grid);
        for (std::size_t i = 0; i < prod.size(); ++i)
            prod[i] = solution.drift_used[a][i] * phi[i];
        acc -= dot(prod, gt[a]);
    }
    acc += dot(solution.drift_used[k], test);
    return std::abs(acc);
}

EnergyIdentityReport energy_identity_check(const CorrectorSolution& solution,
                                           const StreamField& stream) {
    const GridPtr& grid = solution.grid;
    const int d = grid->dim();
    EnergyIdentityReport rep;
    rep.lhs.assign(d, 0.0);
    rep.rhs.assign(d, 0.0);
    rep.rel_gap.assign(d, 0.0);
    rep.pol_lhs.assign(d * d, 0.0);
    rep.pol_rhs.assign(d * d, 0.0);
    rep.pol_gap.assign(d * d, 0.0);

    // The pairing against the stream matrix is evaluated on a grid fine
    // enough to hold every stream mode exactly: environments the solve could
    // only represent by aliasing then show up as a genuine gap.
    int n_fine = grid->n();
    const int need = 2 * (stream.max_mode_index() + grid->max_mode()) + 4;
    while (n_fine < need) n_fine *= 2;
    GridPtr fine = n_fine == grid->n()
                       ? grid
                       : TorusGrid::make(d, n_fine, grid->period());

    std::vector<std::vector<Field>> H(d, std::vector<Field>(d, Field(fine)));
    for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l)
            if (j != l) H[j][l] = stream.realize_component(fine, j, l);

    std::vector<std::vector<Field>> grad(d);
    std::vector<Spectrum> spec;
    spec.reserve(d);
    for (int k = 0; k < d; ++k) {
        auto g = SpectralOps::spectral_gradient(solution.phi[k]);
        grad[k].reserve(d);
        for (int a = 0; a < d; ++a)
            grad[k].push_back(fine == grid ? std::move(g[a])
                                           : spectral_resample(g[a], fine));
        spec.push_back(SpectralOps::transform(solution.phi[k]));
    }

    for (int k = 0; k < d; ++k) {
        double lhs = 0.0;
        for (int j = 0; j < d; ++j) lhs += dot(grad[k][j], H[k][j]);
        rep.lhs[k] = lhs;
        rep.rhs[k] = -solution.energy[k];
        rep.rel_gap[k] = std::abs(rep.lhs[k] - rep.rhs[k]) /
                         std::max(std::abs(rep.rhs[k]), 1e-300);
    }

    for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
            double lhs = 0.0;
            Field gsum(fine), hsum(fine);
            for (int j = 0; j < d; ++j) {
                for (std::size_t i = 0; i < gsum.size(); ++i) {
                    gsum[i] = grad[k][j][i] + grad[l][j][i];
                    hsum[i] = H[k][j][i] + H[l][j][i];
                }
                lhs += dot(gsum, hsum);
            }
            double energy_kl = 0.0;
            for (std::size_t i = 0; i < spec[k].size(); ++i)
                energy_kl += solution.psi_mult[i] * std::norm(spec[k][i] + spec[l][i]);
            rep.pol_lhs[k * d + l] = lhs;
            rep.pol_rhs[k * d + l] = -energy_kl;
            rep.pol_gap[k * d + l] = std::abs(lhs + energy_kl) /
                                     std::max(energy_kl, 1e-300);
        }
    }
    return rep;
}

SublinearityReport sublinearity_scan(const CorrectorSolution& solution,
                                     const std::vector<double>& epsilons,
                                     double radius, double p0) {
    SublinearityReport rep;
    rep.p0 = p0;
    const GridPtr& grid = solution.grid;
    const int d = grid->dim();
    if (d != 2)
        throw ConfigError("sublinearity scan: implemented for d = 2");

    // polar quadrature nodes over B(0, radius)
    const GaussRule& rad = gauss_legendre(32);
    const int n_ang = 64;
    std::vector<Vec> base_pts;
    std::vector<double> weights;
    for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
        const double rho = 0.5 * radius * (1.0 + rad.nodes[i]);
        const double wr = 0.5 * radius * rad.weights[i] * rho;
        for (int a = 0; a < n_ang; ++a) {
            const double th = 2.0 * kPi * (a + 0.5) / n_ang;
            base_pts.push_back({rho * std::cos(th), rho * std::sin(th)});
            weights.push_back(wr * 2.0 * kPi / n_ang);
        }
    }

    for (double eps : epsilons) {
        if (!(eps > 0.0 && eps <= 1.0))
            throw ConfigError("sublinearity scan: eps must lie in (0,1]");
        std::vector<Vec> pts(base_pts);
        for (Vec& x : pts)
            for (double& c : x) c /= eps;
        std::vector<std::vector<double>> vals(d);
        for (int k = 0; k < d; ++k)
            vals[k] = SpectralOps::evaluate_at(solution.phi[k], pts);
        double i2 = 0.0, ip = 0.0;
        for (std::size_t q = 0; q < pts.size(); ++q) {
            double n2 = 0.0;
            for (int k = 0; k < d; ++k) n2 += vals[k][q] * vals[k][q];
            i2 += weights[q] * n2;
            ip += weights[q] * std::pow(n2, 0.5 * p0);
        }
        rep.rows.push_back({eps, eps * eps * i2, std::pow(eps, p0) * ip});
    }

    // least-squares slopes in log-log
    auto slope = [&](auto getter) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(rep.rows.size());
        for (const auto& row : rep.rows) {
            const double x = std::log(row.eps);
            const double y = std::log(std::max(getter(row), 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double den = n * sxx - sx * sx;
        return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    };
    rep.slope_l2 = slope([](const SublinearityRow& r) { return r.l2_value; });
    rep.slope_p0 = slope([](const SublinearityRow& r) { return r.p0_value; });
    return rep;
}

}  // namespace levyhom
