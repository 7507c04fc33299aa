#include "cournot/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cournot {

bool Mat2::is_finite() const {
    return std::isfinite(m11) && std::isfinite(m12) && std::isfinite(m21) &&
           std::isfinite(m22);
}

const char* to_string(NoiseWiring wiring) {
    switch (wiring) {
        case NoiseWiring::SharedWiener: return "shared";
        case NoiseWiring::IndependentWieners: return "independent";
    }
    return "unknown";
}

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidParams: return "InvalidParams";
        case ErrorKind::SingularState: return "SingularState";
        case ErrorKind::DegenerateNoise: return "DegenerateNoise";
        case ErrorKind::NonPositiveDensity: return "NonPositiveDensity";
        case ErrorKind::SchemeBreakdown: return "SchemeBreakdown";
        case ErrorKind::ResidualExceeded: return "ResidualExceeded";
        case ErrorKind::DivisionDegenerate: return "DivisionDegenerate";
        case ErrorKind::MismatchedPaths: return "MismatchedPaths";
        case ErrorKind::NumericalOverflow: return "NumericalOverflow";
    }
    return "unknown";
}

GameParams GameParams::rotation_scale(double c1, double c2, double k1, double k2,
                                      double alpha, double beta) {
    return {c1, c2, k1, k2, Mat2{alpha, -beta, beta, alpha}};
}

bool GameParams::has_rotation_scale_noise() const {
    return b.m11 == b.m22 && b.m12 == -b.m21;
}

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidParams(std::string("parameter ") + name +
                            " must be a positive finite number, got " + std::to_string(v));
    }
}

// x0 without validation; shared by gamma_offsets and stationary_state so that
// diffusion(x0) cancels bit-for-bit.
Vec2 equilibrium(const GameParams& p) {
    const double s = p.c1 + p.c2;
    const double s2 = s * s;
    return {p.c2 / s2, p.c1 / s2};
}

}  // namespace

void GameParams::validate() const {
    require_positive(c1, "c1");
    require_positive(c2, "c2");
    require_positive(k1, "k1");
    require_positive(k2, "k2");
    if (!b.is_finite()) throw InvalidParams("noise matrix b must be finite");
}

LinearSystem rotation_scale_system(const Mat2& a, double alpha, double beta) {
    return {a, Mat2{alpha, -beta, beta, alpha}, NoiseWiring::SharedWiener};
}

Vec2 drift(const GameParams& p, const Vec2& x, double eps_state) {
    const double s = x[0] + x[1];
    if (!(s > eps_state)) {
        throw SingularState("x1 + x2 = " + std::to_string(s) +
                            " is at or below the inverse-demand singularity guard");
    }
    const double s2 = s * s;
    return {p.k1 * (x[1] / s2 - p.c1), p.k2 * (x[0] / s2 - p.c2)};
}

Vec2 gamma_offsets(const GameParams& p) {
    if (!(p.c1 + p.c2 > 0.0)) throw InvalidParams("gamma offsets need c1 + c2 > 0");
    const Vec2 x0 = equilibrium(p);
    return {-(p.b.m11 * x0[0] + p.b.m12 * x0[1]), -(p.b.m21 * x0[0] + p.b.m22 * x0[1])};
}

Vec2 diffusion(const GameParams& p, const Vec2& x) {
    const Vec2 g = gamma_offsets(p);
    return {(p.b.m11 * x[0] + p.b.m12 * x[1]) + g[0], (p.b.m21 * x[0] + p.b.m22 * x[1]) + g[1]};
}

StationaryState stationary_state(const GameParams& p) {
    require_positive(p.c1, "c1");
    require_positive(p.c2, "c2");
    const Vec2 x0 = equilibrium(p);
    return {x0[0], x0[1]};
}

Mat2 drift_jacobian_fd(const GameParams& p, const Vec2& x) {
    Mat2 j;
    for (int col = 0; col < 2; ++col) {
        const double step = 1e-6 * (1.0 + std::abs(x[col]));
        Vec2 lo = x;
        Vec2 hi = x;
        lo[col] -= step;
        hi[col] += step;
        const Vec2 fl = drift(p, lo);
        const Vec2 fh = drift(p, hi);
        const double d0 = (fh[0] - fl[0]) / (2.0 * step);
        const double d1 = (fh[1] - fl[1]) / (2.0 * step);
        if (col == 0) {
            j.m11 = d0;
            j.m21 = d1;
        } else {
            j.m12 = d0;
            j.m22 = d1;
        }
    }
    return j;
}

Linearization linearize(const GameParams& p, NoiseWiring wiring) {
    p.validate();
    const double s = p.c1 + p.c2;
    const double diff_sq = p.c1 * p.c1 - p.c2 * p.c2;
    Mat2 a{-2.0 * p.k1 * p.c1 * s, -p.k1 * diff_sq, p.k2 * diff_sq, -2.0 * p.k2 * p.c2 * s};

    const Mat2 fd = drift_jacobian_fd(p, stationary_state(p).as_vec());
    const double dev = std::max({std::abs(a.m11 - fd.m11), std::abs(a.m12 - fd.m12),
                                 std::abs(a.m21 - fd.m21), std::abs(a.m22 - fd.m22)});
    return {LinearSystem{a, p.b, wiring}, dev, dev < kJacobianTolerance};
}

CharacteristicRoots characteristic_roots(const LinearSystem& sys) {
    const double tr = sys.a.trace();
    const double det = sys.a.det();
    const double half = 0.5 * tr;
    const double disc = tr * tr - 4.0 * det;
    CharacteristicRoots r;
    r.half_trace = half;
    r.discriminant = disc;
    if (disc >= 0.0) {
        // Avoid cancellation: compute the larger-magnitude root first.
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (-tr + std::copysign(sq, -tr));
        double m1 = q;
        double m2 = (q != 0.0) ? det / q : 0.0;
        if (m2 > m1) std::swap(m1, m2);
        r.mu1 = {m1, 0.0};
        r.mu2 = {m2, 0.0};
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        r.mu1 = {half, im};
        r.mu2 = {half, -im};
    }
    return r;
}

}  // namespace cournot
