#include "levyhom/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace levyhom {

using nlohmann::json;

StreamField EnvironmentConfig::build(int dim) const {
    if (kind == "none") {
        return StreamField(dim, period, {});
    }
    if (kind == "shear") {
        if (dim != 2) throw ConfigError("environment: shear preset is 2-d");
        return shear_stream(period, amplitude);
    }
    if (kind == "spectrum") {
        StreamSpec spec;
        spec.dim = dim;
        spec.period = period;
        spec.mode_count = modes;
        spec.spectrum_exponent = spectrum_exponent;
        spec.amplitude_scale = amplitude_scale;
        return synthesize(spec, seed);
    }
    throw ConfigError("environment: unknown kind '" + kind + "'");
}

namespace {

json tail_to_json(const TailSpec& t) {
    json j;
    switch (t.kind) {
        case TailKind::Truncated:
            j["kind"] = "truncated";
            break;
        case TailKind::PowerLog:
            j["kind"] = "powerlog";
            j["beta1"] = t.beta1;
            j["beta2"] = t.beta2;
            break;
        case TailKind::Exponential:
            j["kind"] = "exponential";
            j["a"] = t.a;
            j["beta"] = t.beta;
            break;
    }
    return j;
}

TailSpec tail_from_json(const json& j) {
    const std::string kind = j.value("kind", "truncated");
    if (kind == "truncated") return TailSpec::truncated();
    if (kind == "powerlog")
        return TailSpec::power_log(j.value("beta1", 3.0), j.value("beta2", 0.0));
    if (kind == "exponential")
        return TailSpec::exponential(j.value("a", 1.0), j.value("beta", 1.0));
    throw ConfigError("kernel: unknown tail kind '" + kind + "'");
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["output_dir"] = c.output_dir;
    j["kernel"] = {{"dim", c.kernel.dim},
                   {"alpha", c.kernel.alpha},
                   {"tail", tail_to_json(c.kernel.tail)}};
    j["environment"] = {{"kind", c.environment.kind},
                        {"period", c.environment.period},
                        {"modes", c.environment.modes},
                        {"spectrum_exponent", c.environment.spectrum_exponent},
                        {"amplitude_scale", c.environment.amplitude_scale},
                        {"amplitude", c.environment.amplitude},
                        {"seed", c.environment.seed}};
    j["corrector"] = {{"grid_n", c.corrector.grid_n},
                      {"theta_schedule", c.corrector.theta_schedule},
                      {"truncation_level", c.corrector.truncation_level},
                      {"tol", c.corrector.tol},
                      {"max_iter", c.corrector.max_iter}};
    j["resolvent"] = {{"lambda", c.resolvent.lambda},
                      {"epsilons", c.resolvent.epsilons},
                      {"p", c.resolvent.p},
                      {"ball_radius", c.resolvent.ball_radius},
                      {"box_periods", c.resolvent.box_periods},
                      {"source", {{"width", c.resolvent.source_width},
                                  {"amplitude", c.resolvent.source_amplitude}}},
                      {"tol", c.resolvent.tol}};
    j["montecarlo"] = {{"particles", c.montecarlo.particles},
                       {"delta", c.montecarlo.delta},
                       {"dt", c.montecarlo.dt},
                       {"horizon", c.montecarlo.horizon},
                       {"window", {c.montecarlo.window_lo, c.montecarlo.window_hi}},
                       {"batches", c.montecarlo.batches},
                       {"abar_file", c.montecarlo.abar_file}};
    j["stages"] = c.stages;
    return j;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace

std::string ExperimentConfig::canonical_json() const { return to_json(*this).dump(2); }

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string ExperimentConfig::hash() const {
    std::ostringstream os;
    os << std::hex << fnv1a(canonical_json());
    return os.str();
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
        c.threads = get_or<int>(j, "threads", c.threads);
        c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
        if (j.contains("kernel")) {
            const json& k = j["kernel"];
            c.kernel.dim = get_or<int>(k, "dim", c.kernel.dim);
            c.kernel.alpha = get_or<double>(k, "alpha", c.kernel.alpha);
            if (k.contains("tail")) c.kernel.tail = tail_from_json(k["tail"]);
        }
        if (j.contains("environment")) {
            const json& e = j["environment"];
            c.environment.kind = get_or<std::string>(e, "kind", c.environment.kind);
            c.environment.period = get_or<double>(e, "period", c.environment.period);
            c.environment.modes = get_or<int>(e, "modes", c.environment.modes);
            c.environment.spectrum_exponent =
                get_or<double>(e, "spectrum_exponent", c.environment.spectrum_exponent);
            c.environment.amplitude_scale =
                get_or<double>(e, "amplitude_scale", c.environment.amplitude_scale);
            c.environment.amplitude = get_or<double>(e, "amplitude", c.environment.amplitude);
            c.environment.seed = get_or<std::uint64_t>(e, "seed", c.environment.seed);
        }
        if (j.contains("corrector")) {
            const json& co = j["corrector"];
            c.corrector.grid_n = get_or<int>(co, "grid_n", c.corrector.grid_n);
            if (co.contains("theta_schedule"))
                c.corrector.theta_schedule =
                    co["theta_schedule"].get<std::vector<double>>();
            c.corrector.truncation_level =
                get_or<double>(co, "truncation_level", c.corrector.truncation_level);
            c.corrector.tol = get_or<double>(co, "tol", c.corrector.tol);
            c.corrector.max_iter = get_or<int>(co, "max_iter", c.corrector.max_iter);
        }
        if (j.contains("resolvent")) {
            const json& r = j["resolvent"];
            c.resolvent.lambda = get_or<double>(r, "lambda", c.resolvent.lambda);
            if (r.contains("epsilons"))
                c.resolvent.epsilons = r["epsilons"].get<std::vector<double>>();
            c.resolvent.p = get_or<double>(r, "p", c.resolvent.p);
            c.resolvent.ball_radius = get_or<double>(r, "ball_radius", c.resolvent.ball_radius);
            c.resolvent.box_periods = get_or<int>(r, "box_periods", c.resolvent.box_periods);
            if (r.contains("source")) {
                c.resolvent.source_width = get_or<double>(r["source"], "width",
                                                          c.resolvent.source_width);
                c.resolvent.source_amplitude =
                    get_or<double>(r["source"], "amplitude", c.resolvent.source_amplitude);
            }
            c.resolvent.tol = get_or<double>(r, "tol", c.resolvent.tol);
        }
        if (j.contains("montecarlo")) {
            const json& m = j["montecarlo"];
            c.montecarlo.particles = get_or<int>(m, "particles", c.montecarlo.particles);
            c.montecarlo.delta = get_or<double>(m, "delta", c.montecarlo.delta);
            c.montecarlo.dt = get_or<double>(m, "dt", c.montecarlo.dt);
            c.montecarlo.horizon = get_or<double>(m, "horizon", c.montecarlo.horizon);
            if (m.contains("window")) {
                auto w = m["window"].get<std::vector<double>>();
                if (w.size() != 2) throw ConfigError("montecarlo.window needs two entries");
                c.montecarlo.window_lo = w[0];
                c.montecarlo.window_hi = w[1];
            }
            c.montecarlo.batches = get_or<int>(m, "batches", c.montecarlo.batches);
            c.montecarlo.abar_file = get_or<std::string>(m, "abar_file",
                                                         c.montecarlo.abar_file);
        }
        if (j.contains("stages")) c.stages = j["stages"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    // cross-stage validation
    if (c.kernel.dim < 2) throw ConfigError("config: kernel.dim must be >= 2");
    if (!(c.kernel.alpha > 1.0 && c.kernel.alpha < 2.0))
        throw ConfigError("config: kernel.alpha must lie in (1,2)");
    if (!(c.kernel.dim > 4.0 * (c.kernel.alpha - 1.0)))
        c.warnings.push_back(
            "d <= 4 (alpha - 1): the homogenization limit is outside the "
            "supported moment regime; sweeps may not converge");
    if (c.resolvent.ball_radius > 0.0 &&
        c.resolvent.ball_radius >
            0.25 * c.resolvent.box_periods * c.environment.period)
        c.warnings.push_back("resolvent.ball_radius exceeds box/4");
    for (const std::string& s : c.stages) {
        static const std::vector<std::string> known = {
            "kernel-check", "env-gen", "corrector", "effective",
            "resolvent-sweep", "simulate", "validate"};
        bool ok = false;
        for (const auto& k : known) ok = ok || k == s;
        if (!ok) throw ConfigError("config: unknown stage '" + s + "'");
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return from_json_text(os.str());
}

ExperimentConfig ExperimentConfig::reference() {
    ExperimentConfig c;
    c.seed = 20240811;
    c.kernel.dim = 2;
    c.kernel.alpha = 1.4;
    c.kernel.tail = TailSpec::truncated();
    c.environment.kind = "shear";
    c.environment.amplitude = 2.0;
    c.corrector.grid_n = 128;
    c.montecarlo.particles = 20000;
    return c;
}

}  // namespace levyhom
