#include "levyhom/krylov.hpp"

#include <cmath>
#include <sstream>

namespace levyhom {

KrylovResult krylov_solve(const LinearOperator& op, const Field& rhs,
                          double tol, int max_iter) {
    if (tol <= 0.0) throw ConfigError("krylov: tol must be positive");
    KrylovResult res;
    res.x = Field(rhs.grid());

    const double bnorm = norm_l2(rhs);
    if (bnorm == 0.0) {
        res.converged = true;
        res.residual_history.push_back(0.0);
        return res;
    }

    auto prec = [&](const Field& f) {
        return op.precondition ? op.precondition(f) : f;
    };

    Field r = rhs;  // x0 = 0
    Field rhat = r;
    Field p(rhs.grid()), v(rhs.grid());
    double rho = 1.0, alpha = 1.0, omega = 1.0;

    double rel = 1.0;
    res.residual_history.push_back(rel);

    for (int it = 0; it < max_iter; ++it) {
        const double rho1 = dot(rhat, r);
        if (rho1 == 0.0) break;  // breakdown
        if (it == 0) {
            p = r;
        } else {
            const double beta = (rho1 / rho) * (alpha / omega);
            for (std::size_t i = 0; i < p.size(); ++i)
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        rho = rho1;

        Field phat = prec(p);
        v = op.apply(phat);
        const double rv = dot(rhat, v);
        if (rv == 0.0) break;
        alpha = rho1 / rv;

        Field s = r;
        axpy(-alpha, v, s);
        if (norm_l2(s) / bnorm < tol) {
            axpy(alpha, phat, res.x);
            rel = norm_l2(s) / bnorm;
            res.residual_history.push_back(rel);
            res.converged = true;
            res.iterations = it + 1;
            return res;
        }

        Field shat = prec(s);
        Field t = op.apply(shat);
        const double tt = dot(t, t);
        if (tt == 0.0) break;
        omega = dot(t, s) / tt;

        axpy(alpha, phat, res.x);
        axpy(omega, shat, res.x);
        r = s;
        axpy(-omega, t, r);

        rel = norm_l2(r) / bnorm;
        res.residual_history.push_back(rel);
        res.iterations = it + 1;
        if (rel < tol) {
            res.converged = true;
            return res;
        }
        if (omega == 0.0) break;
    }
    return res;
}

Field krylov_solve_or_throw(const LinearOperator& op, const Field& rhs,
                            double tol, int max_iter) {
    KrylovResult res = krylov_solve(op, rhs, tol, max_iter);
    if (!res.converged) {
        std::ostringstream os;
        os << "krylov: " << op.name << " did not reach tol " << tol << " in "
           << res.iterations << " iterations (residual "
           << (res.residual_history.empty() ? 1.0 : res.residual_history.back())
           << ")";
        throw ConvergenceError(os.str(),
            res.residual_history.empty() ? 1.0 : res.residual_history.back());
    }
    return std::move(res.x);
}

}  // namespace levyhom
