#include "cournot/phase_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cournot/quadrature.hpp"
#include "cournot/random.hpp"

namespace cournot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxExponent = 650.0;

void require_shared_wiring(const LinearSystem& sys) {
    if (sys.wiring != NoiseWiring::SharedWiener) {
        throw InvalidParams(
            "the angular-process analysis needs a single shared Wiener process; "
            "use the Monte Carlo estimator for independent wiring");
    }
}

std::vector<double> uniform_grid(std::size_t n, double length) {
    std::vector<double> t(n + 1);
    const double h = length / static_cast<double>(n);
    for (std::size_t j = 0; j <= n; ++j) t[j] = static_cast<double>(j) * h;
    t[n] = length;
    return t;
}

void normalize_in_place(PhaseDensity& d) {
    const double mass = simpson(d.values, d.spacing());
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw NonPositiveDensity("density has non-positive or non-finite total mass");
    }
    for (double& v : d.values) v /= mass;
    d.normalization_error = std::abs(simpson(d.values, d.spacing()) - 1.0);
}

void check_nonnegative(const PhaseDensity& d) {
    for (double v : d.values) {
        if (!(v >= -1e-10) || !std::isfinite(v)) {
            throw NonPositiveDensity("density value " + std::to_string(v) +
                                     " is negative or not finite");
        }
    }
}

// Closed-form solution k/(D q4^2) (1 + eta int_0^t D) with
// D = exp(-2 int (q3 - q2 q4 - q4 q5)/q4^2). Returns false when D leaves the
// representable range.
bool product_formula(const TrigCoefficients& q, std::size_t n, std::vector<double>& values) {
    const double h = kTwoPi / static_cast<double>(n);
    auto a = [&](double t) {
        const double q4 = q.q4(t);
        return 2.0 * (q.q3(t) - q.q2(t) * q4 - q4 * q.q5(t)) / (q4 * q4);
    };
    const std::vector<double> phi = cumulative_integral(a, 0.0, h, n);
    for (double v : phi) {
        if (!std::isfinite(v) || std::abs(v) > kMaxExponent) return false;
    }

    std::vector<double> cum_d(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double t0 = static_cast<double>(j) * h;
        const double d0 = std::exp(-phi[j]);
        auto d_local = [&](double t) {
            return d0 * std::exp(-gauss_legendre8(a, t0, t));
        };
        cum_d[j + 1] = cum_d[j] + gauss_legendre8(d_local, t0, t0 + h);
    }
    const double d_end = std::exp(-phi[n]);
    const double eta = (d_end - 1.0) / cum_d[n];

    values.assign(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
        const double t = static_cast<double>(j) * h;
        const double q4 = q.q4(t);
        values[j] = (1.0 + eta * cum_d[j]) * std::exp(phi[j]) / (q4 * q4);
        if (!std::isfinite(values[j])) return false;
    }
    values[n] = values[0];
    return true;
}

// Periodic stationary solution of the FPE in log space. With
// a = 2 (q3 - q2 q4)/q4^2 and Phi = int_0 a, q4^2 p is proportional to
// int_t^{t+pi} exp(Phi(t) - Phi(u)) du (or the mirrored window t-pi..t when
// Phi(pi) < 0, which keeps the exponent bounded above).
std::vector<double> periodic_integral(const TrigCoefficients& q, std::size_t n) {
    const double h = kTwoPi / static_cast<double>(n);
    const std::size_t m = n / 2;
    auto a = [&](double t) {
        const double q4 = q.q4(t);
        return 2.0 * q.angular_drift(t) / (q4 * q4);
    };
    const std::vector<double> phi = cumulative_integral(a, 0.0, h, n);
    const double phi_half = phi[m];
    auto phi_at = [&](long idx) {
        return idx >= 0 ? phi[static_cast<std::size_t>(idx)]
                        : phi[static_cast<std::size_t>(idx + static_cast<long>(m))] - phi_half;
    };

    std::vector<double> log_p(n + 1);
    std::vector<double> expo(m + 1);
    std::vector<double> w(m + 1);
    for (std::size_t j = 0; j < m; ++j) {
        const long base = phi_half >= 0.0 ? static_cast<long>(j)
                                           : static_cast<long>(j) - static_cast<long>(m);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= m; ++k) {
            expo[k] = phi[j] - phi_at(base + static_cast<long>(k));
            top = std::max(top, expo[k]);
        }
        for (std::size_t k = 0; k <= m; ++k) w[k] = std::exp(expo[k] - top);
        const double q4 = q.q4(static_cast<double>(j) * h);
        log_p[j] = top + std::log(simpson(w, h)) - std::log(q4 * q4);
    }
    for (std::size_t j = m; j <= n; ++j) log_p[j] = log_p[j - m];

    const double top = *std::max_element(log_p.begin(), log_p.end());
    std::vector<double> values(n + 1);
    for (std::size_t j = 0; j <= n; ++j) values[j] = std::exp(log_p[j] - top);
    return values;
}

}  // namespace

double TrigCoefficients::q1(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    const Mat2& a = sys_.a;
    return a.m11 * c * c + (a.m12 + a.m21) * c * s + a.m22 * s * s;
}

double TrigCoefficients::q2(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    const Mat2& b = sys_.b;
    return b.m11 * c * c + (b.m12 + b.m21) * c * s + b.m22 * s * s;
}

double TrigCoefficients::q3(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    const Mat2& a = sys_.a;
    return a.m21 * c * c + (a.m22 - a.m11) * c * s - a.m12 * s * s;
}

double TrigCoefficients::q4(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    const Mat2& b = sys_.b;
    return b.m21 * c * c + (b.m22 - b.m11) * c * s - b.m12 * s * s;
}

double TrigCoefficients::q5(double t) const {
    const Mat2& b = sys_.b;
    return -(b.m12 + b.m21) * std::sin(2.0 * t) - (b.m22 - b.m11) * std::cos(2.0 * t);
}

double TrigCoefficients::q4_derivative(double t) const {
    const Mat2& b = sys_.b;
    return -(b.m12 + b.m21) * std::sin(2.0 * t) + (b.m22 - b.m11) * std::cos(2.0 * t);
}

double TrigCoefficients::growth_rate(double t) const {
    const double v2 = q2(t);
    const double v4 = q4(t);
    return q1(t) + 0.5 * (v4 * v4 - v2 * v2);
}

TrigCoefficients trig_coefficients(const LinearSystem& sys) { return TrigCoefficients(sys); }

const char* to_string(DensityMethod m) {
    switch (m) {
        case DensityMethod::ClosedForm: return "closed_form";
        case DensityMethod::BackwardDifference: return "backward_difference";
        case DensityMethod::McHistogram: return "mc_histogram";
    }
    return "unknown";
}

const char* to_string(DensityVariant v) {
    switch (v) {
        case DensityVariant::ProductFormula: return "product_formula";
        case DensityVariant::PeriodicIntegral: return "periodic_integral";
        case DensityVariant::SchemeTabulatedQ5: return "scheme_tabulated_q5";
        case DensityVariant::SchemeDerivativeQ5: return "scheme_derivative_q5";
        case DensityVariant::Histogram: return "histogram";
    }
    return "unknown";
}

double PhaseDensity::spacing() const {
    return intervals() == 0 ? 0.0 : (theta.back() - theta.front()) / static_cast<double>(intervals());
}

double PhaseDensity::value_at(double t) const {
    const std::size_t n = intervals();
    if (n == 0) return 0.0;
    double r = std::fmod(t, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    const double pos = r / spacing();
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= n) i = n - 1;
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * values[i] + frac * values[i + 1];
}

void require_angular_noise(const LinearSystem& sys, std::size_t n, double eps) {
    const TrigCoefficients q(sys);
    const double h = kTwoPi / static_cast<double>(n);
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) smallest = std::min(smallest, std::abs(q.q4(static_cast<double>(j) * h)));
    if (!(smallest > eps)) {
        throw DegenerateNoise("q4(theta) vanishes on the grid (min |q4| = " +
                              std::to_string(smallest) +
                              "); the angular SDE has no diffusion there");
    }
}

PhaseDensity density_closed_form(const LinearSystem& sys, std::size_t n_grid,
                                 const DensityOptions& opts) {
    require_shared_wiring(sys);
    if (n_grid < 16 || n_grid % 2 != 0) {
        throw InvalidParams("n_grid must be even and at least 16, got " + std::to_string(n_grid));
    }
    require_angular_noise(sys, n_grid, opts.eps_q4);
    const TrigCoefficients q(sys);

    PhaseDensity d;
    d.method = DensityMethod::ClosedForm;
    d.theta = uniform_grid(n_grid, kTwoPi);

    std::vector<double> values;
    if (product_formula(q, n_grid, values)) {
        d.values = values;
        d.variant = DensityVariant::ProductFormula;
        try {
            check_nonnegative(d);
            normalize_in_place(d);
            d.fpe_residual = fpe_residual(sys, d);
            if (d.fpe_residual < opts.residual_bound) return d;
        } catch (const NonPositiveDensity&) {
            // fall through to the periodic solution
        }
    }

    d.values = periodic_integral(q, n_grid);
    d.variant = DensityVariant::PeriodicIntegral;
    check_nonnegative(d);
    normalize_in_place(d);
    d.fpe_residual = fpe_residual(sys, d);
    if (!(d.fpe_residual < opts.residual_bound)) {
        throw ResidualExceeded("stationary FPE residual " + std::to_string(d.fpe_residual) +
                               " exceeds bound " + std::to_string(opts.residual_bound) +
                               " at n_grid = " + std::to_string(n_grid));
    }
    return d;
}

namespace {

struct SchemeRun {
    std::vector<double> half;  // p(0..N), unnormalized
    bool fallback = false;
};

SchemeRun run_backward_scheme(const TrigCoefficients& q, std::size_t N, bool tabulated_q5,
                              double eps_den) {
    const double h = std::numbers::pi / static_cast<double>(N);
    std::vector<double> alpha(N + 1), beta(N + 1);
    bool all_positive = true;
    double log_growth = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = static_cast<double>(i) * h;
        const double q4 = q.q4(t);
        const double q5 = tabulated_q5 ? q.q5(t) : q.q4_derivative(t);
        const double k = -q.q3(t) + q.q2(t) * q4 + q4 * q5;
        const double den = 2.0 * h * k + q4 * q4;
        if (!(std::abs(den) >= eps_den)) {
            throw SchemeBreakdown("F(i) denominator " + std::to_string(den) + " at i = " +
                                  std::to_string(i) + " is below the breakdown guard");
        }
        alpha[i] = q4 * q4 / den;
        beta[i] = 2.0 * h / den;
        if (i > 0) {
            all_positive = all_positive && alpha[i] > 0.0 && beta[i] > 0.0;
            log_growth += std::log(std::abs(alpha[i]));
        }
    }

    SchemeRun run;
    run.half.assign(N + 1, 0.0);
    // p(i) = alpha_i p(i-1) + beta_i c. Sweep in the contracting direction so
    // the periodic solution is a sum of same-signed terms.
    if (log_growth <= 0.0 || !all_positive) {
        double prod = 1.0, flux = 0.0;
        for (std::size_t i = 1; i <= N; ++i) {
            prod *= alpha[i];
            flux = alpha[i] * flux + beta[i];
        }
        const double det = 1.0 - prod;
        double c = 1.0, p0 = flux / det;
        if (std::abs(det) < 1e-12) {
            run.fallback = true;
            c = 0.0;
            p0 = 1.0;
        }
        run.half[0] = p0;
        for (std::size_t i = 1; i <= N; ++i) run.half[i] = alpha[i] * run.half[i - 1] + beta[i] * c;
    } else {
        // Reverse sweep: p(i-1) = p(i)/alpha_i - (beta_i/alpha_i) c, with c = -1.
        double prod = 1.0, flux = 0.0;
        for (std::size_t i = N; i >= 1; --i) {
            prod /= alpha[i];
            flux = flux / alpha[i] + beta[i] / alpha[i];
        }
        const double det = 1.0 - prod;
        double c = -1.0, pn = flux / det;
        if (std::abs(det) < 1e-12) {
            run.fallback = true;
            c = 0.0;
            pn = 1.0;
        }
        run.half[N] = pn;
        for (std::size_t i = N; i >= 1; --i) run.half[i - 1] = (run.half[i] - beta[i] * c) / alpha[i];
    }
    return run;
}

PhaseDensity extend_scheme(const SchemeRun& run, std::size_t N) {
    PhaseDensity d;
    d.method = DensityMethod::BackwardDifference;
    d.periodicity_fallback = run.fallback;
    d.theta = uniform_grid(2 * N, kTwoPi);
    d.values.assign(2 * N + 1, 0.0);
    for (std::size_t j = 0; j < 2 * N; ++j) d.values[j] = run.half[j % N];
    d.values[2 * N] = d.values[0];
    return d;
}

}  // namespace

PhaseDensity density_backward_difference(const LinearSystem& sys, std::size_t N,
                                         const DensityOptions& opts) {
    require_shared_wiring(sys);
    if (N < 16) throw InvalidParams("backward-difference scheme needs N >= 16, got " + std::to_string(N));
    require_angular_noise(sys, 2 * N, opts.eps_q4);
    const TrigCoefficients q(sys);

    auto build = [&](bool tabulated) {
        PhaseDensity d = extend_scheme(run_backward_scheme(q, N, tabulated, opts.eps_denominator), N);
        d.variant = tabulated ? DensityVariant::SchemeTabulatedQ5 : DensityVariant::SchemeDerivativeQ5;
        for (double v : d.values) {
            if (!(v >= -1e-10) || !std::isfinite(v)) {
                throw SchemeBreakdown("backward-difference recurrence produced value " +
                                      std::to_string(v));
            }
        }
        normalize_in_place(d);
        d.fpe_residual = fpe_residual(sys, d);
        return d;
    };

    PhaseDensity best = build(true);
    if (sys.b.m11 != sys.b.m22) {
        // Tabulated q5 and d q4/d theta differ in the cos 2t term; keep the
        // variant that better satisfies the stationary FPE.
        PhaseDensity alt = build(false);
        if (alt.fpe_residual < best.fpe_residual) best = std::move(alt);
    }
    return best;
}

std::vector<double> fpe_residual_profile(const LinearSystem& sys, const PhaseDensity& p) {
    const std::size_t n = p.intervals();
    if (n < 8) throw InvalidParams("FPE residual needs at least 8 grid intervals");
    const TrigCoefficients q(sys);
    const double h = p.spacing();
    std::vector<double> flux(n), spread(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = p.theta[j];
        const double q4 = q.q4(t);
        flux[j] = q.angular_drift(t) * p.values[j];
        spread[j] = q4 * q4 * p.values[j];
    }
    auto at = [n](const std::vector<double>& f, long j) {
        const long nn = static_cast<long>(n);
        return f[static_cast<std::size_t>(((j % nn) + nn) % nn)];
    };
    std::vector<double> r(n + 1);
    for (std::size_t jj = 0; jj < n; ++jj) {
        const long j = static_cast<long>(jj);
        const double d1 = (-at(flux, j + 2) + 8.0 * at(flux, j + 1) - 8.0 * at(flux, j - 1) +
                           at(flux, j - 2)) / (12.0 * h);
        const double d2 = (-at(spread, j + 2) + 16.0 * at(spread, j + 1) - 30.0 * at(spread, j) +
                           16.0 * at(spread, j - 1) - at(spread, j - 2)) / (12.0 * h * h);
        r[jj] = d1 - 0.5 * d2;
    }
    r[n] = r[0];
    return r;
}

double fpe_residual(const LinearSystem& sys, const PhaseDensity& p) {
    const auto r = fpe_residual_profile(sys, p);
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    return worst;
}

PhaseDensity mc_angle_histogram(const LinearSystem& sys, const HistogramSettings& s) {
    require_shared_wiring(sys);
    if (s.n_bins < 8 || s.n_bins % 2 != 0) throw InvalidParams("n_bins must be even and >= 8");
    if (!(s.step_h > 0.0) || s.n_samples == 0 || !(s.burn_in_time >= 0.0)) {
        throw InvalidParams("histogram needs step_h > 0, n_samples > 0 and burn_in_time >= 0");
    }
    require_angular_noise(sys, s.n_bins, DensityOptions{}.eps_q4);
    const TrigCoefficients q(sys);
    GaussianStream gauss(s.seed, 0);
    const double sqrt_h = std::sqrt(s.step_h);
    const double width = kTwoPi / static_cast<double>(s.n_bins);

    double theta = 0.0;
    auto step = [&] {
        theta += q.angular_drift(theta) * s.step_h + q.q4(theta) * sqrt_h * gauss.next();
        theta = std::fmod(theta, kTwoPi);
        if (theta < 0.0) theta += kTwoPi;
    };
    const auto burn = static_cast<std::size_t>(std::llround(s.burn_in_time / s.step_h));
    for (std::size_t i = 0; i < burn; ++i) step();

    std::vector<double> counts(s.n_bins, 0.0);
    for (std::size_t i = 0; i < s.n_samples; ++i) {
        step();
        auto bin = static_cast<std::size_t>(std::floor(theta / width + 0.5));
        counts[bin % s.n_bins] += 1.0;
    }

    PhaseDensity d;
    d.method = DensityMethod::McHistogram;
    d.variant = DensityVariant::Histogram;
    d.theta = uniform_grid(s.n_bins, kTwoPi);
    d.values.assign(s.n_bins + 1, 0.0);
    const double scale = 1.0 / (static_cast<double>(s.n_samples) * width);
    for (std::size_t j = 0; j < s.n_bins; ++j) d.values[j] = counts[j] * scale;
    d.values[s.n_bins] = d.values[0];
    d.normalization_error = std::abs(simpson(d.values, width) - 1.0);
    d.fpe_residual = fpe_residual(sys, d);
    return d;
}

}  // namespace cournot
