#include "levyhom/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace levyhom {

namespace {

GaussRule make_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Roots of P_n by Newton from the Chebyshev-like initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

std::mutex rule_mutex;
std::map<int, GaussRule> rule_cache;

}  // namespace

const GaussRule& gauss_legendre(int order) {
    std::lock_guard<std::mutex> lock(rule_mutex);
    auto it = rule_cache.find(order);
    if (it == rule_cache.end()) it = rule_cache.emplace(order, make_rule(order)).first;
    return it->second;
}

double gl_panel(const std::function<double(double)>& f, double a, double b, int order) {
    const GaussRule& rule = gauss_legendre(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

namespace {

void refine(const std::function<double(double)>& f, double a, double b,
            double tol, int depth, int max_depth, PanelResult& out) {
    const double coarse = gl_panel(f, a, b, 16);
    const double fine = gl_panel(f, a, b, 32);
    const double err = std::abs(fine - coarse);
    // the relative floor stops bisection once round-off dominates
    const double floor = 1e-14 * std::abs(fine);
    if (err <= tol || err <= floor || depth >= max_depth) {
        out.value += fine;
        out.error += err;
        if (err > tol && err > floor && depth >= max_depth) out.converged = false;
        return;
    }
    const double mid = 0.5 * (a + b);
    refine(f, a, mid, 0.5 * tol, depth + 1, max_depth, out);
    refine(f, mid, b, 0.5 * tol, depth + 1, max_depth, out);
}

}  // namespace

PanelResult integrate_adaptive(const std::function<double(double)>& f,
                               double a, double b, double abs_tol, int max_depth) {
    PanelResult out;
    if (a == b) return out;
    refine(f, a, b, abs_tol, 0, max_depth, out);
    return out;
}

}  // namespace levyhom
