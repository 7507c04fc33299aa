#include "cournot/meansquare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cournot/linear_sde.hpp"
#include "cournot/parallel.hpp"
#include "cournot/random.hpp"

namespace cournot {

void QuadraticLyapunov::validate() const {
    if (!(w1 > 0.0) || !(w2 > 0.0)) throw InvalidParams("Lyapunov weights w1, w2 must be positive");
}

const char* to_string(MeanSquareVerdict v) {
    return v == MeanSquareVerdict::MeanSquareStable ? "MeanSquareStable" : "NotCertified";
}

QuadraticForm lv_coefficients(const LinearSystem& sys, const QuadraticLyapunov& v) {
    v.validate();
    const Mat2& a = sys.a;
    const Mat2& b = sys.b;
    return {
        a.m11 * v.w1 + 0.5 * b.m11 * b.m11 * v.w1 + 0.5 * b.m21 * b.m21 * v.w2,
        a.m12 * v.w1 + a.m21 * v.w2 + b.m11 * b.m12 * v.w1 + b.m21 * b.m22 * v.w2,
        a.m22 * v.w2 + 0.5 * b.m12 * b.m12 * v.w1 + 0.5 * b.m22 * b.m22 * v.w2,
    };
}

double lv_evaluate(const LinearSystem& sys, const QuadraticLyapunov& v, const Vec2& u) {
    v.validate();
    const Vec2 f = sys.a * u;
    const Vec2 g = sys.b * u;
    const Vec2 grad{v.w1 * u[0], v.w2 * u[1]};
    const double hess[2][2] = {{v.w1, 0.0}, {0.0, v.w2}};
    double second = g[0] * g[0] * hess[0][0] + g[1] * g[1] * hess[1][1];
    if (sys.wiring == NoiseWiring::SharedWiener) second += 2.0 * g[0] * g[1] * hess[0][1];
    return f[0] * grad[0] + f[1] * grad[1] + 0.5 * second;
}

PaperConditions paper_conditions(const LinearSystem& sys) {
    const Mat2& a = sys.a;
    const Mat2& b = sys.b;
    const double den = a.m12 + b.m11 * b.m12;
    if (std::abs(den) < 1e-12) {
        throw DivisionDegenerate("a12 + b11 b12 vanishes; A1 is undefined");
    }
    PaperConditions pc;
    pc.A1 = -(a.m21 + b.m21 * b.m22) / den;
    pc.q1 = (a.m11 + 0.5 * b.m11 * b.m11) * pc.A1 - 0.5 * b.m21 * b.m21;
    pc.q2 = -a.m22 - 0.5 * b.m22 * b.m22 + 0.5 * b.m12 * b.m12 * pc.A1;
    pc.passes = pc.A1 < 0.0 && pc.q1 > 0.0 && pc.q2 > 0.0;
    return pc;
}

namespace {

double margin(const QuadraticForm& f) {
    return std::min({-f.c11, -f.c22, 4.0 * f.c11 * f.c22 - f.c12 * f.c12});
}

double margin_at_log(const LinearSystem& sys, double log10_t) {
    return margin(lv_coefficients(sys, {std::pow(10.0, log10_t), 1.0}));
}

}  // namespace

std::optional<DefinitenessCertificate> definiteness_certificate(const LinearSystem& sys) {
    constexpr int kGrid = 1024;
    constexpr double kLo = -6.0, kHi = 6.0;
    const double step = (kHi - kLo) / (kGrid - 1);

    std::vector<double> xs;
    xs.reserve(kGrid + 1);
    for (int i = 0; i < kGrid; ++i) xs.push_back(kLo + step * i);
    xs.push_back(0.0);  // t = 1, so ties resolve to equal weights
    std::sort(xs.begin(), xs.end());

    std::size_t best = 0;
    double best_m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double m = margin_at_log(sys, xs[i]);
        const double tol = 1e-12 * std::max(1.0, std::abs(best_m));
        if (m > best_m + tol || (std::abs(m - best_m) <= tol && std::abs(xs[i]) < std::abs(xs[best]))) {
            best = i;
            best_m = m;
        }
    }

    // Golden-section refinement on the neighbouring bracket; kept only if it
    // strictly improves the margin.
    double lo = xs[best > 0 ? best - 1 : 0];
    double hi = xs[std::min(best + 1, xs.size() - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = margin_at_log(sys, x1), f2 = margin_at_log(sys, x2);
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = margin_at_log(sys, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = margin_at_log(sys, x1);
        }
    }
    double best_x = xs[best];
    const double refined_x = 0.5 * (lo + hi);
    const double refined_m = margin_at_log(sys, refined_x);
    if (refined_m > best_m + 1e-12 * std::max(1.0, std::abs(best_m))) {
        best_x = refined_x;
        best_m = refined_m;
    }

    if (!(best_m > 0.0)) return std::nullopt;
    DefinitenessCertificate cert;
    cert.w_ratio = best_x == 0.0 ? 1.0 : std::pow(10.0, best_x);
    cert.form = lv_coefficients(sys, {cert.w_ratio, 1.0});
    cert.margin = margin(cert.form);
    cert.negative_definite = cert.form.negative_definite();
    if (!cert.negative_definite) return std::nullopt;
    return cert;
}

SecondMomentCheck mc_second_moment_check(const LinearSystem& sys, const SecondMomentSettings& s) {
    if (s.n_paths < 100) throw InvalidParams("second-moment check needs n_paths >= 100");
    if (!(s.step_h > 0.0) || !(s.horizon > 0.0) || s.record_every == 0) {
        throw InvalidParams("horizon, step_h and record_every must be positive");
    }
    const auto n_steps = static_cast<std::size_t>(std::llround(s.horizon / s.step_h));
    const std::size_t n_records = n_steps / s.record_every + 1;
    const bool independent = sys.wiring == NoiseWiring::IndependentWieners;
    const double sqrt_h = std::sqrt(s.step_h);

    // log |u(t)|^2 per path and record time.
    std::vector<std::vector<double>> log_sq(s.n_paths, std::vector<double>(n_records, 0.0));
    parallel_for(
        s.n_paths,
        [&](std::size_t path) {
            GaussianStream gauss(s.seed, path);
            Vec2 x = path < s.n_paths / 2 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
            double log_r = 0.0;
            auto& rec = log_sq[path];
            rec[0] = 0.0;
            for (std::size_t n = 1; n <= n_steps; ++n) {
                const double dw1 = sqrt_h * gauss.next();
                const double dw2 = independent ? sqrt_h * gauss.next() : 0.0;
                x = linear_em_step(sys, x, s.step_h, dw1, dw2);
                const double r = std::hypot(x[0], x[1]);
                if (r > 0.0 && std::isfinite(r)) {
                    log_r += std::log(r);
                    x = {x[0] / r, x[1] / r};
                } else {
                    log_r = r > 0.0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
                }
                if (n % s.record_every == 0) rec[n / s.record_every] = 2.0 * log_r;
            }
        },
        s.threads);

    // log E|u|^2 via log-sum-exp across paths, fixed path order.
    std::vector<double> t, y;
    const std::size_t first = n_records / 2;
    for (std::size_t k = first; k < n_records; ++k) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < s.n_paths; ++p) top = std::max(top, log_sq[p][k]);
        if (!std::isfinite(top)) continue;
        double acc = 0.0;
        for (std::size_t p = 0; p < s.n_paths; ++p) acc += std::exp(log_sq[p][k] - top);
        t.push_back(static_cast<double>(k * s.record_every) * s.step_h);
        y.push_back(top + std::log(acc / static_cast<double>(s.n_paths)));
    }

    SecondMomentCheck out;
    const std::size_t n = t.size();
    if (n < 3) return out;
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (t[i] - tm) * (t[i] - tm);
        sxy += (t[i] - tm) * (y[i] - ym);
    }
    out.fit_rate = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (ym + out.fit_rate * (t[i] - tm));
        ssr += r * r;
    }
    out.fit_std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    out.decay_observed = out.fit_rate < -3.0 * out.fit_std_error;
    return out;
}

MeanSquareReport mean_square_report(const LinearSystem& sys,
                                    const std::optional<SecondMomentSettings>& mc) {
    MeanSquareReport r;
    r.wiring = sys.wiring;
    try {
        r.paper_conditions = paper_conditions(sys);
    } catch (const DivisionDegenerate&) {
        r.paper_conditions.reset();
    }
    r.certificate = definiteness_certificate(sys);
    if (mc) r.mc_check = mc_second_moment_check(sys, *mc);
    r.verdict = r.certificate && r.certificate->negative_definite ? MeanSquareVerdict::MeanSquareStable
                                                                  : MeanSquareVerdict::NotCertified;
    return r;
}

}  // namespace cournot
