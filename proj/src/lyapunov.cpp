#include "cournot/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cournot/linear_sde.hpp"
#include "cournot/parallel.hpp"
#include "cournot/quadrature.hpp"
#include "cournot/random.hpp"

namespace cournot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_rotation_scale(const Mat2& b) { return b.m11 == b.m22 && b.m12 == -b.m21; }

}  // namespace

const char* to_string(McBiasCorrection c) {
    return c == McBiasCorrection::Richardson ? "richardson" : "none";
}

const char* to_string(LyapunovMethod m) {
    switch (m) {
        case LyapunovMethod::Quadrature: return "quadrature";
        case LyapunovMethod::DiscreteScheme: return "discrete";
        case LyapunovMethod::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

const char* to_string(SweepParameter p) {
    return p == SweepParameter::Alpha ? "alpha" : "beta";
}

LyapunovEstimate lambda_quadrature(const LinearSystem& sys, const PhaseDensity& density) {
    const TrigCoefficients q(sys);
    const std::size_t n = density.intervals();
    std::vector<double> integrand(n + 1), cos2(n + 1), sin2(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double t = density.theta[j];
        integrand[j] = q.growth_rate(t) * density.values[j];
        cos2[j] = std::cos(2.0 * t) * density.values[j];
        sin2[j] = std::sin(2.0 * t) * density.values[j];
    }
    const double h = density.spacing();

    LyapunovEstimate est;
    est.method = LyapunovMethod::Quadrature;
    est.value = simpson(integrand, h);
    est.n_used = n;
    est.density_variant = to_string(density.variant);
    est.diagnostics["fpe_residual"] = density.fpe_residual;
    est.diagnostics["normalization_error"] = density.normalization_error;

    const double c2 = simpson(cos2, h);
    const double s2 = simpson(sin2, h);
    est.diagnostics["c2"] = c2;
    est.diagnostics["s2"] = s2;
    if (is_rotation_scale(sys.b)) {
        const Mat2& a = sys.a;
        const double alpha = sys.b.m11, beta = sys.b.m21;
        const double closed = 0.5 * (a.m11 + a.m22 + beta * beta - alpha * alpha) +
                              0.5 * (a.m11 - a.m22) * c2 + 0.5 * (a.m12 + a.m21) * s2;
        est.diagnostics["rotation_scale_formula"] = closed;
        est.diagnostics["rotation_scale_gap"] = std::abs(closed - est.value);
    }
    return est;
}

LyapunovEstimate lambda_quadrature(const LinearSystem& sys, std::size_t n_grid,
                                   const DensityOptions& opts) {
    return lambda_quadrature(sys, density_closed_form(sys, n_grid, opts));
}

LyapunovEstimate lambda_discrete(const LinearSystem& sys, std::size_t N, const DensityOptions& opts) {
    const PhaseDensity d = density_backward_difference(sys, N, opts);
    const TrigCoefficients q(sys);
    const double h = std::numbers::pi / static_cast<double>(N);
    double mass = 0.0, acc = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
        mass += d.values[i] * h;
        acc += q.growth_rate(static_cast<double>(i) * h) * d.values[i] * h;
    }
    LyapunovEstimate est;
    est.method = LyapunovMethod::DiscreteScheme;
    est.value = acc / mass;
    est.n_used = N;
    est.density_variant = to_string(d.variant);
    est.diagnostics["fpe_residual"] = d.fpe_residual;
    est.diagnostics["periodicity_fallback"] = d.periodicity_fallback ? 1.0 : 0.0;
    // Sum runs over i = 0..N on [0, pi] against the half-period-normalized
    // density; both factors have period pi so this is the full-circle average.
    est.diagnostics["half_period_normalization"] = 1.0;
    return est;
}

LyapunovEstimate lambda_monte_carlo(const LinearSystem& sys, const MonteCarloSettings& s) {
    if (s.n_paths < 2) throw InvalidParams("Monte Carlo needs n_paths >= 2");
    if (!(s.step_h > 0.0) || !(s.horizon > 0.0)) throw InvalidParams("horizon and step_h must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(s.horizon / s.step_h));
    if (n_steps < 1000) throw InvalidParams("horizon / step_h must be at least 1000");
    const double horizon = static_cast<double>(n_steps) * s.step_h;
    const double sqrt_h = std::sqrt(s.step_h);
    const bool independent = sys.wiring == NoiseWiring::IndependentWieners;

    const bool extrapolate = s.bias_correction == McBiasCorrection::Richardson;
    if (extrapolate && !s.renormalize) {
        throw InvalidParams("Richardson extrapolation needs per-step renormalization");
    }

    // One renormalized EM chain; returns accumulated log growth.
    struct Chain {
        Vec2 x{1.0, 0.0};
        double log_growth = 0.0;
        void step(const LinearSystem& sys, double h, double dw1, double dw2, bool renormalize) {
            x = linear_em_step(sys, x, h, dw1, dw2);
            if (renormalize) {
                const double r = std::hypot(x[0], x[1]);
                log_growth += std::log(r);
                x = {x[0] / r, x[1] / r};
            }
        }
    };

    std::vector<double> rates(s.n_paths);
    parallel_for(
        s.n_paths,
        [&](std::size_t path) {
            GaussianStream gauss(s.seed, path);
            Chain coarse;
            if (!extrapolate) {
                for (std::size_t n = 0; n < n_steps; ++n) {
                    const double dw1 = sqrt_h * gauss.next();
                    const double dw2 = independent ? sqrt_h * gauss.next() : 0.0;
                    coarse.step(sys, s.step_h, dw1, dw2, s.renormalize);
                }
            } else {
                // The fine chain takes two half steps per coarse step on the same Brownian path.
                Chain fine;
                const double half = 0.5 * s.step_h;
                const double sqrt_half = std::sqrt(half);
                for (std::size_t n = 0; n < n_steps; ++n) {
                    const double a1 = sqrt_half * gauss.next();
                    const double a2 = independent ? sqrt_half * gauss.next() : 0.0;
                    const double b1 = sqrt_half * gauss.next();
                    const double b2 = independent ? sqrt_half * gauss.next() : 0.0;
                    fine.step(sys, half, a1, a2, true);
                    fine.step(sys, half, b1, b2, true);
                    coarse.step(sys, s.step_h, a1 + b1, a2 + b2, true);
                }
                rates[path] = (2.0 * fine.log_growth - coarse.log_growth) / horizon;
                return;
            }
            if (!s.renormalize) {
                const double r = std::hypot(coarse.x[0], coarse.x[1]);
                if (!std::isfinite(r) || !(r > 0.0)) {
                    throw NumericalOverflow("path norm left the floating-point range without renormalization");
                }
                coarse.log_growth = std::log(r);
            }
            rates[path] = coarse.log_growth / horizon;
        },
        s.threads);

    const double n = static_cast<double>(s.n_paths);
    const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : rates) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    LyapunovEstimate est;
    est.method = LyapunovMethod::MonteCarlo;
    est.value = mean;
    est.std_error = sd / std::sqrt(n);
    est.n_used = s.n_paths;
    est.diagnostics["horizon"] = horizon;
    est.diagnostics["step_h"] = s.step_h;
    est.diagnostics["seed"] = static_cast<double>(s.seed);
    est.diagnostics["richardson"] = extrapolate ? 1.0 : 0.0;
    return est;
}

double lambda_game_formula(const GameParams& p, double d2, double e2) {
    const double alpha = p.b.m11, beta = p.b.m21;
    const double s = p.c1 + p.c2;
    return -(p.k1 * p.c1 + p.k2 * p.c2) * s + 0.5 * (beta * beta - alpha * alpha) -
           (p.k1 * p.c1 - p.k2 * p.c2) * s * d2 +
           0.5 * (p.k2 - p.k1) * (p.c1 * p.c1 - p.c2 * p.c2) * e2;
}

double lambda_uncorrected_density(const GameParams& p, std::size_t n_grid) {
    if (!p.has_rotation_scale_noise()) throw InvalidParams("uncorrected density needs rotation-scale noise");
    const double alpha = p.b.m11, beta = p.b.m21;
    if (beta == 0.0) throw DegenerateNoise("uncorrected density needs beta != 0");
    if (n_grid < 16 || n_grid % 2 != 0) throw InvalidParams("n_grid must be even and >= 16");

    const double diff_sq = p.c1 * p.c1 - p.c2 * p.c2;
    const double lin = (p.k1 + p.k2) * diff_sq + alpha * beta;
    const double cos_coef = -(p.k1 * p.c1 - p.k2 * p.c2) * (p.c1 + p.c2);
    const double sin_coef = 0.5 * (p.k1 + p.k2) * diff_sq;
    const double h = kTwoPi / static_cast<double>(n_grid);

    std::vector<double> expo(n_grid + 1);
    for (std::size_t j = 0; j <= n_grid; ++j) {
        const double t = static_cast<double>(j) * h;
        expo[j] = (lin * t + cos_coef * std::cos(2.0 * t) + sin_coef * std::sin(2.0 * t)) / (beta * beta);
    }
    const double top = *std::max_element(expo.begin(), expo.end());
    std::vector<double> g(n_grid + 1), gc(n_grid + 1), gs(n_grid + 1);
    for (std::size_t j = 0; j <= n_grid; ++j) {
        const double t = static_cast<double>(j) * h;
        g[j] = std::exp(expo[j] - top);
        gc[j] = g[j] * std::cos(2.0 * t);
        gs[j] = g[j] * std::sin(2.0 * t);
    }
    const double mass = simpson(g, h);
    return lambda_game_formula(p, simpson(gc, h) / mass, simpson(gs, h) / mass);
}

namespace {

bool is_skippable(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::DegenerateNoise:
        case ErrorKind::ResidualExceeded:
        case ErrorKind::SchemeBreakdown:
        case ErrorKind::NonPositiveDensity:
            return true;
        default:
            return false;
    }
}

GameParams with_parameter(const GameParams& base, SweepParameter vary, double value) {
    double alpha = base.b.m11, beta = base.b.m21;
    (vary == SweepParameter::Alpha ? alpha : beta) = value;
    return GameParams::rotation_scale(base.c1, base.c2, base.k1, base.k2, alpha, beta);
}

// The curve whose sign changes are bracketed: quadrature lambda, or the
// uncorrected-density formula when that curve is requested.
double bracket_curve(const GameParams& p, const SweepSettings& s) {
    if (s.uncorrected_density) return lambda_uncorrected_density(p, s.n_grid);
    const Linearization lin = linearize(p, NoiseWiring::SharedWiener);
    return lambda_quadrature(lin.system, s.n_grid, s.density).value;
}

}  // namespace

SweepResult lambda_sweep(const GameParams& base, const SweepSettings& s) {
    base.validate();
    if (!base.has_rotation_scale_noise()) {
        throw InvalidParams("lambda sweeps need rotation-scale noise (b11 = b22, b12 = -b21)");
    }
    if (s.n_points == 0) throw InvalidParams("sweep needs at least one point");
    if (!(s.hi >= s.lo)) throw InvalidParams("sweep range must satisfy lo <= hi");
    const bool collapsed = s.n_points == 1 || s.lo == s.hi;
    const std::size_t count = collapsed ? 1 : s.n_points;

    SweepResult out;
    out.points.resize(count);
    std::vector<std::optional<double>> curve(count);
    parallel_for(
        count,
        [&](std::size_t i) {
            SweepPoint& pt = out.points[i];
            pt.parameter = collapsed ? s.lo
                                     : s.lo + (s.hi - s.lo) * static_cast<double>(i) /
                                                  static_cast<double>(count - 1);
            const GameParams p = with_parameter(base, s.vary, pt.parameter);
            try {
                if (s.uncorrected_density) {
                    pt.lambda = lambda_uncorrected_density(p, s.n_grid);
                    curve[i] = pt.lambda;
                    return;
                }
                const LinearSystem sys = linearize(p, NoiseWiring::SharedWiener).system;
                switch (s.method) {
                    case LyapunovMethod::Quadrature: {
                        const auto est = lambda_quadrature(sys, s.n_grid, s.density);
                        pt.lambda = est.value;
                        curve[i] = est.value;
                        pt.formula_gap = std::abs(
                            est.value - lambda_game_formula(p, est.diagnostics.at("c2"), est.diagnostics.at("s2")));
                        break;
                    }
                    case LyapunovMethod::DiscreteScheme:
                        pt.lambda = lambda_discrete(sys, s.N, s.density).value;
                        break;
                    case LyapunovMethod::MonteCarlo: {
                        MonteCarloSettings mc = s.mc;
                        mc.threads = 1;
                        const auto est = lambda_monte_carlo(sys, mc);
                        pt.lambda = est.value;
                        pt.std_error = est.std_error;
                        break;
                    }
                }
            } catch (const Error& e) {
                if (!is_skippable(e)) throw;
                pt.lambda.reset();
                pt.skip_reason = std::string(to_string(e.kind())) + ": " + e.what();
            }
        },
        s.threads);

    for (const auto& pt : out.points) out.n_skipped += pt.lambda ? 0 : 1;

    auto curve_at = [&](std::size_t i) -> std::optional<double> {
        if (curve[i]) return curve[i];
        if (!out.points[i].lambda) return std::nullopt;
        try {
            curve[i] = bracket_curve(with_parameter(base, s.vary, out.points[i].parameter), s);
        } catch (const Error& e) {
            if (!is_skippable(e)) throw;
        }
        return curve[i];
    };

    for (std::size_t i = 0; i + 1 < count; ++i) {
        const auto va = curve_at(i);
        const auto vb = curve_at(i + 1);
        if (!va || !vb || (*va < 0.0) == (*vb < 0.0)) continue;
        SignChange sc;
        sc.lo = out.points[i].parameter;
        sc.hi = out.points[i + 1].parameter;
        sc.lambda_lo = *va;
        sc.lambda_hi = *vb;
        while (sc.hi - sc.lo > s.bracket_width) {
            const double mid = 0.5 * (sc.lo + sc.hi);
            double vm;
            try {
                vm = bracket_curve(with_parameter(base, s.vary, mid), s);
            } catch (const Error& e) {
                if (!is_skippable(e)) throw;
                sc.converged = false;
                break;
            }
            if ((vm < 0.0) == (sc.lambda_lo < 0.0)) {
                sc.lo = mid;
                sc.lambda_lo = vm;
            } else {
                sc.hi = mid;
                sc.lambda_hi = vm;
            }
        }
        sc.root = 0.5 * (sc.lo + sc.hi);
        out.sign_changes.push_back(sc);
    }
    return out;
}

}  // namespace cournot
