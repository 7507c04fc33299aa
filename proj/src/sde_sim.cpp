#include "cournot/sde_sim.hpp"

#include <cmath>

#include "cournot/parallel.hpp"
#include "cournot/random.hpp"

namespace cournot {

const char* to_string(Scheme s) {
    return s == Scheme::EulerMaruyama ? "euler_maruyama" : "paper_taylor2";
}

WienerIncrements wiener_increments(const WienerSpec& spec, std::uint64_t stream) {
    if (!(spec.step_h > 0.0)) throw InvalidParams("Wiener step_h must be positive");
    const double sd = std::sqrt(spec.step_h);
    GaussianStream gauss(spec.seed, stream);
    WienerIncrements inc;
    inc.first.resize(spec.n_steps);
    const bool two = spec.wiring == NoiseWiring::IndependentWieners;
    if (two) inc.second.resize(spec.n_steps);
    for (std::size_t n = 0; n < spec.n_steps; ++n) {
        inc.first[n] = sd * gauss.next();
        if (two) inc.second[n] = sd * gauss.next();
    }
    return inc;
}

WienerIncrements coarsen(const WienerIncrements& inc, std::size_t factor) {
    if (factor == 0 || inc.size() % factor != 0) {
        throw InvalidParams("coarsening factor must divide the number of increments");
    }
    auto sum_blocks = [factor](const std::vector<double>& v) {
        std::vector<double> out(v.size() / factor, 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) out[i / factor] += v[i];
        return out;
    };
    WienerIncrements c;
    c.first = sum_blocks(inc.first);
    if (!inc.second.empty()) c.second = sum_blocks(inc.second);
    return c;
}

namespace {

std::optional<std::string> invalid_state(const Vec2& x) {
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) return "non_finite";
    if (!(x[0] + x[1] > kStateEpsilon)) return "singular_state";
    if (!(x[0] > 0.0) || !(x[1] > 0.0)) return "left_positive_quadrant";
    return std::nullopt;
}

// Second-order drift term L0 F for the duopoly drift.
Vec2 exact_bracket(const GameParams& p, const Vec2& x, const Vec2& f, const Vec2& g, bool shared) {
    const double x1 = x[0], x2 = x[1];
    const double s = x1 + x2;
    const double s3 = s * s * s, s4 = s3 * s;
    // Jacobian of (f1, f2) before k scaling.
    const double j11 = -2.0 * x2 / s3, j12 = (x1 - x2) / s3;
    const double j21 = (x2 - x1) / s3, j22 = -2.0 * x1 / s3;
    // Hessians.
    const double h1_11 = 6.0 * x2 / s4, h1_12 = (4.0 * x2 - 2.0 * x1) / s4, h1_22 = (2.0 * x2 - 4.0 * x1) / s4;
    const double h2_11 = (2.0 * x1 - 4.0 * x2) / s4, h2_12 = (4.0 * x1 - 2.0 * x2) / s4, h2_22 = 6.0 * x1 / s4;
    const double cross = shared ? 2.0 * g[0] * g[1] : 0.0;
    const double l1 = f[0] * j11 + f[1] * j12 +
                      0.5 * (g[0] * g[0] * h1_11 + cross * h1_12 + g[1] * g[1] * h1_22);
    const double l2 = f[0] * j21 + f[1] * j22 +
                      0.5 * (g[0] * g[0] * h2_11 + cross * h2_12 + g[1] * g[1] * h2_22);
    return {p.k1 * l1, p.k2 * l2};
}

Vec2 tabulated_bracket(const Vec2& x, const Vec2& f, const Vec2& g) {
    const double s = x[0] + x[1];
    const double w = x[0] * x[1] / (s * s * s);
    return {-2.0 * w * f[0] + g[0] * w, -2.0 * w * f[1] + g[1] * w};
}

}  // namespace

SdePath integrate_path(const GameParams& p, const Vec2& x_init, double h,
                       const WienerIncrements& inc, Scheme scheme, TaylorBracket bracket) {
    if (auto bad = invalid_state(x_init)) {
        throw InvalidParams("initial state must lie in the open positive quadrant (" + *bad + ")");
    }
    const bool shared = inc.second.empty();
    const std::size_t n_steps = inc.size();

    SdePath path;
    path.scheme = scheme;
    path.params = p;
    path.increments = inc;
    path.times.reserve(n_steps + 1);
    path.states.reserve(n_steps + 1);
    path.times.push_back(0.0);
    path.states.push_back(x_init);

    Vec2 x = x_init;
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double g1n = inc.first[n];
        const double g2n = shared ? g1n : inc.second[n];
        const Vec2 f = drift(p, x);
        const Vec2 g = diffusion(p, x);
        Vec2 next{x[0] + h * f[0] + g[0] * g1n, x[1] + h * f[1] + g[1] * g2n};
        if (scheme == Scheme::PaperTaylor2) {
            const double s = x[0] + x[1];
            const double s3 = s * s * s;
            const Vec2 br = bracket == TaylorBracket::Exact ? exact_bracket(p, x, f, g, shared)
                                                            : tabulated_bracket(x, f, g);
            next[0] += p.b.m11 * g[0] * (g1n * g1n - h) / 2.0 + br[0] * h * h / 2.0 +
                       (p.b.m11 - 2.0 * x[1] / s3) * g[0] * h * g1n / 2.0;
            next[1] += p.b.m22 * g[1] * (g2n * g2n - h) / 2.0 + br[1] * h * h / 2.0 +
                       (p.b.m21 - 2.0 * x[0] / s3) * g[1] * h * g2n / 2.0;
        }
        if (auto bad = invalid_state(next)) {
            path.truncation = Truncation{n, *bad};
            break;
        }
        x = next;
        path.times.push_back(static_cast<double>(n + 1) * h);
        path.states.push_back(x);
    }
    return path;
}

SdePath euler_maruyama(const GameParams& p, const Vec2& x_init, const WienerSpec& spec,
                       std::uint64_t stream) {
    SdePath path = integrate_path(p, x_init, spec.step_h, wiener_increments(spec, stream),
                                  Scheme::EulerMaruyama);
    path.seed = spec.seed;
    return path;
}

SdePath paper_taylor2(const GameParams& p, const Vec2& x_init, const WienerSpec& spec,
                      std::uint64_t stream, TaylorBracket bracket) {
    SdePath path = integrate_path(p, x_init, spec.step_h, wiener_increments(spec, stream),
                                  Scheme::PaperTaylor2, bracket);
    path.seed = spec.seed;
    return path;
}

std::vector<SdePath> simulate_ensemble(const GameParams& p, const Vec2& x_init,
                                       const WienerSpec& spec, Scheme scheme,
                                       std::size_t n_paths, unsigned threads) {
    std::vector<SdePath> paths(n_paths);
    parallel_for(
        n_paths,
        [&](std::size_t i) {
            paths[i] = scheme == Scheme::EulerMaruyama ? euler_maruyama(p, x_init, spec, i)
                                                       : paper_taylor2(p, x_init, spec, i);
        },
        threads);
    return paths;
}

EnsembleSeries ensemble_stats(std::span<const SdePath> paths, Observable observable) {
    if (paths.empty()) throw MismatchedPaths("ensemble is empty");
    const SdePath& ref = paths.front();
    for (const SdePath& path : paths) {
        const GameParams& a = path.params;
        const GameParams& b = ref.params;
        if (path.times != ref.times || a.c1 != b.c1 || a.c2 != b.c2 || a.k1 != b.k1 ||
            a.k2 != b.k2 || !(a.b == b.b)) {
            throw MismatchedPaths("ensemble members differ in time grid or parameters");
        }
    }

    const std::size_t nt = ref.times.size();
    const double count = static_cast<double>(paths.size());
    EnsembleSeries out;
    out.times = ref.times;
    switch (observable) {
        case Observable::Mean: out.channels = {"mean_x1", "mean_x2"}; break;
        case Observable::SecondMoment: out.channels = {"second_moment_x1", "second_moment_x2"}; break;
        case Observable::NormSqAboutX0: out.channels = {"norm_sq_about_x0"}; break;
    }
    out.values.assign(out.channels.size(), std::vector<double>(nt, 0.0));

    const Vec2 x0 = observable == Observable::NormSqAboutX0 ? stationary_state(ref.params).as_vec()
                                                            : Vec2{0.0, 0.0};
    for (std::size_t n = 0; n < nt; ++n) {
        for (const SdePath& path : paths) {
            const Vec2& x = path.states[n];
            switch (observable) {
                case Observable::Mean:
                    out.values[0][n] += x[0];
                    out.values[1][n] += x[1];
                    break;
                case Observable::SecondMoment:
                    out.values[0][n] += x[0] * x[0];
                    out.values[1][n] += x[1] * x[1];
                    break;
                case Observable::NormSqAboutX0: {
                    const double d0 = x[0] - x0[0], d1 = x[1] - x0[1];
                    out.values[0][n] += d0 * d0 + d1 * d1;
                    break;
                }
            }
        }
        for (auto& ch : out.values) ch[n] /= count;
    }
    return out;
}

}  // namespace cournot
