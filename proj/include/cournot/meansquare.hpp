#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "cournot/core_model.hpp"

namespace cournot {

/// V(u) = (w1 u1^2 + w2 u2^2) / 2 with w1, w2 > 0.
struct QuadraticLyapunov {
    double w1 = 1.0;
    double w2 = 1.0;

    void validate() const;
};

/// LV(u) = c11 u1^2 + c12 u1 u2 + c22 u2^2.
struct QuadraticForm {
    double c11 = 0.0;
    double c12 = 0.0;
    double c22 = 0.0;

    double operator()(const Vec2& u) const { return c11 * u[0] * u[0] + c12 * u[0] * u[1] + c22 * u[1] * u[1]; }
    bool negative_definite() const { return c11 < 0.0 && c22 < 0.0 && 4.0 * c11 * c22 > c12 * c12; }
};

QuadraticForm lv_coefficients(const LinearSystem& sys, const QuadraticLyapunov& v);

/// Generator applied to V at u, from f = A u, g = B u, grad V and the Hessian.
/// Independent wiring drops the g1 g2 cross term (irrelevant for diagonal V).
double lv_evaluate(const LinearSystem& sys, const QuadraticLyapunov& v, const Vec2& u);

struct PaperConditions {
    double A1 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
    bool passes = false;
};

/// A1 = -(a21 + b21 b22)/(a12 + b11 b12), q1 = (a11 + b11^2/2) A1 - b21^2/2,
/// q2 = -a22 - b22^2/2 + b12^2 A1 / 2; passes = A1 < 0 && q1 > 0 && q2 > 0.
/// Throws DivisionDegenerate when |a12 + b11 b12| < 1e-12.
PaperConditions paper_conditions(const LinearSystem& sys);

struct DefinitenessCertificate {
    double w_ratio = 1.0;  ///< w1 / w2 with w2 = 1
    QuadraticForm form;
    double margin = 0.0;   ///< min(-c11, -c22, 4 c11 c22 - c12^2)
    bool negative_definite = false;
};

/// Searches w1/w2 over 10^[-6, 6] (1024 log-spaced points plus 1) and refines
/// the best point by golden section. Empty when no ratio makes LV negative definite.
std::optional<DefinitenessCertificate> definiteness_certificate(const LinearSystem& sys);

struct SecondMomentSettings {
    std::uint64_t seed = 1;
    std::size_t n_paths = 500;
    double horizon = 20.0;
    double step_h = 1e-3;
    std::size_t record_every = 10;
    unsigned threads = 0;
};

struct SecondMomentCheck {
    bool decay_observed = false;
    double fit_rate = 0.0;       ///< slope of log E|u|^2 over the second half of [0, T]
    double fit_std_error = 0.0;
};

/// Euler-Maruyama ensemble of the linear SDE from |u(0)| = 1 (half the paths
/// along e1, half along e2). Per-path log radii keep the estimate finite for
/// fast decay. decay_observed = fit_rate < -3 fit_std_error.
SecondMomentCheck mc_second_moment_check(const LinearSystem& sys, const SecondMomentSettings& s);

enum class MeanSquareVerdict { MeanSquareStable, NotCertified };

const char* to_string(MeanSquareVerdict v);

struct MeanSquareReport {
    std::optional<PaperConditions> paper_conditions;  ///< empty if DivisionDegenerate
    std::optional<DefinitenessCertificate> certificate;
    std::optional<SecondMomentCheck> mc_check;
    MeanSquareVerdict verdict = MeanSquareVerdict::NotCertified;
    NoiseWiring wiring = NoiseWiring::IndependentWieners;
};

/// The verdict depends only on the certificate.
MeanSquareReport mean_square_report(const LinearSystem& sys,
                                    const std::optional<SecondMomentSettings>& mc = std::nullopt);

}  // namespace cournot
