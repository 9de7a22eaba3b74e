#include "levyhom/rng.hpp"

#include <cmath>
#include <numbers>

namespace levyhom {

// Box-Muller, written out so draws are identical on every platform
// (std::normal_distribution is implementation-defined).
double CounterRng::next_normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = next_uniform_pos();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
}

double CounterRng::next_exponential() {
    return -std::log(next_uniform_pos());
}

}  // namespace levyhom
