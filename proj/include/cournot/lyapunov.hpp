#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cournot/core_model.hpp"
#include "cournot/phase_density.hpp"

namespace cournot {

enum class LyapunovMethod { Quadrature, DiscreteScheme, MonteCarlo };

const char* to_string(LyapunovMethod m);

/// Top Lyapunov exponent estimate (units 1/time).
struct LyapunovEstimate {
    double value = 0.0;
    LyapunovMethod method = LyapunovMethod::Quadrature;
    double std_error = 0.0;  ///< across-path standard error; zero unless MonteCarlo
    std::size_t n_used = 0;  ///< grid intervals or path count
    std::string density_variant;
    std::map<std::string, double> diagnostics;
};

/// Simpson quadrature of q1 + (q4^2 - q2^2)/2 against the density on [0, 2 pi].
/// For rotation-scale noise also records c2 = <cos 2t>, s2 = <sin 2t> and the
/// equivalent closed form (a11 + a22 + beta^2 - alpha^2)/2 + (a11 - a22) c2/2 +
/// (a12 + a21) s2/2.
LyapunovEstimate lambda_quadrature(const LinearSystem& sys, const PhaseDensity& density);

/// Convenience: closed-form density on n_grid intervals, then quadrature.
LyapunovEstimate lambda_quadrature(const LinearSystem& sys, std::size_t n_grid = 2048,
                                   const DensityOptions& opts = {});

/// lambda(N) = sum_{i=0}^{N} (q1 + (q4^2 - q2^2)/2)(ih) p(i) h with h = pi/N and
/// p normalized so that sum_{i=0}^{N} p(i) h = 1 on the half period.
LyapunovEstimate lambda_discrete(const LinearSystem& sys, std::size_t N = 2000,
                                 const DensityOptions& opts = {});

/// Euler-Maruyama overestimates lambda by O(h) (about 48 h on the reference
/// game). Richardson combines step h with step h/2 on the same Brownian
/// path, per path: 2 L(h/2) - L(h).
enum class McBiasCorrection { None, Richardson };

const char* to_string(McBiasCorrection c);

struct MonteCarloSettings {
    std::uint64_t seed = 1;
    std::size_t n_paths = 200;
    double horizon = 200.0;
    double step_h = 1e-3;
    bool renormalize = true;
    McBiasCorrection bias_correction = McBiasCorrection::Richardson;
    unsigned threads = 0;
};

/// Mean over paths of log|X(T)|/T for Euler-Maruyama paths of the linear SDE,
/// renormalizing |X| to one after every step. Path i draws from stream i.
LyapunovEstimate lambda_monte_carlo(const LinearSystem& sys, const MonteCarloSettings& s);

/// Closed form for the game with rotation-scale noise (alpha = b11, beta = b21)
/// given D2 = <cos 2t> and E2 = <sin 2t>.
double lambda_game_formula(const GameParams& p, double d2, double e2);

/// The game's rotation-scale exponent evaluated with the uncorrected density:
///   g(t) = exp{[((k1+k2)(c1^2-c2^2) + alpha beta) t - (k1c1 - k2c2)(c1+c2) cos 2t
///               + (k1+k2)(c1^2-c2^2) sin 2t / 2] / beta^2},
/// normalized on [0, 2 pi]. This density does not satisfy the stationary FPE;
/// it reproduces the older threshold curves and is not an estimator.
double lambda_uncorrected_density(const GameParams& p, std::size_t n_grid = 2048);

enum class SweepParameter { Alpha, Beta };

const char* to_string(SweepParameter p);

struct SweepSettings {
    SweepParameter vary = SweepParameter::Alpha;
    double lo = -3.0;
    double hi = 3.0;
    std::size_t n_points = 61;
    LyapunovMethod method = LyapunovMethod::Quadrature;
    std::size_t n_grid = 2048;
    std::size_t N = 2000;
    MonteCarloSettings mc;
    DensityOptions density;
    double bracket_width = 1e-3;
    /// Evaluate lambda_uncorrected_density instead of an estimator (values and brackets).
    bool uncorrected_density = false;
    unsigned threads = 0;
};

struct SweepPoint {
    double parameter = 0.0;
    std::optional<double> lambda;  ///< empty when skipped
    double std_error = 0.0;
    std::string skip_reason;
    /// |quadrature - game closed form|, when the quadrature method is used.
    std::optional<double> formula_gap;
};

struct SignChange {
    double lo = 0.0;
    double hi = 0.0;
    double root = 0.0;  ///< bracket midpoint
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    bool converged = true;  ///< false if bisection hit a degenerate midpoint
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<SignChange> sign_changes;
    std::size_t n_skipped = 0;
};

/// lambda over equally spaced alpha or beta values for rotation-scale noise,
/// with sign changes of the quadrature curve bracketed by bisection.
SweepResult lambda_sweep(const GameParams& base, const SweepSettings& settings);

}  // namespace cournot
