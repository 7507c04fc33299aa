#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "cournot/core_model.hpp"

namespace cournot {

/// Angular-process coefficients of the linear SDE in polar form.
///
/// With e = (cos t, sin t) and e' = (-sin t, cos t):
///   q1 = e.Ae,  q2 = e.Be,  q3 = e'.Ae,  q4 = e'.Be,
/// and the auxiliary q5 = -(b12 + b21) sin 2t - (b22 - b11) cos 2t. Every coefficient has period pi.
class TrigCoefficients {
public:
    static constexpr double period = std::numbers::pi;

    explicit TrigCoefficients(const LinearSystem& sys) : sys_(sys) {}

    double q1(double theta) const;
    double q2(double theta) const;
    double q3(double theta) const;
    double q4(double theta) const;
    double q5(double theta) const;

    /// d q4 / d theta. Coincides with q5 only when b11 == b22.
    double q4_derivative(double theta) const;

    /// Angular drift q3 - q2 q4.
    double angular_drift(double theta) const { return q3(theta) - q2(theta) * q4(theta); }

    /// Log-radius growth integrand q1 + (q4^2 - q2^2) / 2.
    double growth_rate(double theta) const;

    const LinearSystem& system() const { return sys_; }

private:
    LinearSystem sys_;
};

TrigCoefficients trig_coefficients(const LinearSystem& sys);

enum class DensityMethod { ClosedForm, BackwardDifference, McHistogram };

/// Which concrete formula produced a density.
enum class DensityVariant {
    ProductFormula,      ///< k/(D q4^2) (1 + eta int D), with q5 inside D
    PeriodicIntegral,    ///< log-space periodic solution of the stationary FPE
    SchemeTabulatedQ5,   ///< backward-difference recurrence with tabulated q5
    SchemeDerivativeQ5,  ///< backward-difference recurrence with d q4/d theta
    Histogram,
};

const char* to_string(DensityMethod m);
const char* to_string(DensityVariant v);

/// Stationary angle density on the closed grid [0, 2 pi] (first and last value equal).
struct PhaseDensity {
    std::vector<double> theta;
    std::vector<double> values;
    double normalization_error = 0.0;
    double fpe_residual = 0.0;
    DensityMethod method = DensityMethod::ClosedForm;
    DensityVariant variant = DensityVariant::PeriodicIntegral;
    /// Backward-difference only: periodicity system was singular and the
    /// constant-flux term was dropped.
    bool periodicity_fallback = false;

    std::size_t intervals() const { return theta.empty() ? 0 : theta.size() - 1; }
    double spacing() const;
    /// Periodic linear interpolation.
    double value_at(double theta) const;
};

struct DensityOptions {
    double eps_q4 = 1e-8;           ///< min |q4| on the grid
    double residual_bound = 1e-4;   ///< closed form must satisfy the stationary FPE to this
    double eps_denominator = 1e-12; ///< backward-difference F(i) denominator guard
};

/// Closed-form stationary density on n_grid intervals over [0, 2 pi].
/// n_grid must be even and >= 16. Throws DegenerateNoise, ResidualExceeded,
/// NonPositiveDensity.
PhaseDensity density_closed_form(const LinearSystem& sys, std::size_t n_grid,
                                 const DensityOptions& opts = {});

/// Backward-difference recurrence with h = pi / N on [0, pi], made periodic and
/// extended to [0, 2 pi]. N >= 16. Throws SchemeBreakdown, DegenerateNoise.
PhaseDensity density_backward_difference(const LinearSystem& sys, std::size_t N,
                                         const DensityOptions& opts = {});

/// Max over the periodic grid of |d/dt[(q3 - q2 q4) p] - 1/2 d^2/dt^2[q4^2 p]|,
/// fourth-order central differences.
double fpe_residual(const LinearSystem& sys, const PhaseDensity& p);

/// Pointwise residual on the closed grid (the last entry repeats the first).
std::vector<double> fpe_residual_profile(const LinearSystem& sys, const PhaseDensity& p);

struct HistogramSettings {
    std::uint64_t seed = 1;
    std::size_t n_samples = 1'000'000;
    double burn_in_time = 50.0;
    double step_h = 1e-2;
    std::size_t n_bins = 64;
};

/// Euler-Maruyama on the angle SDE d theta = (q3 - q2 q4) dt + q4 dw, binned
/// mod 2 pi into n_bins cells centred on the grid nodes.
PhaseDensity mc_angle_histogram(const LinearSystem& sys, const HistogramSettings& settings);

/// Throws DegenerateNoise if min |q4| over the n-interval grid is <= eps.
void require_angular_noise(const LinearSystem& sys, std::size_t n, double eps);

}  // namespace cournot
