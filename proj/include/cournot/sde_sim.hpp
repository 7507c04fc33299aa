#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cournot/core_model.hpp"

namespace cournot {

struct WienerSpec {
    std::uint64_t seed = 1;
    double step_h = 1e-3;
    std::size_t n_steps = 1000;
    NoiseWiring wiring = NoiseWiring::SharedWiener;
};

/// G(n) = w((n+1)h) - w(nh). `second` is empty for shared wiring.
struct WienerIncrements {
    std::vector<double> first;
    std::vector<double> second;

    std::size_t size() const { return first.size(); }
};

/// Deterministic in (spec, stream): i.i.d. N(0, step_h) draws.
WienerIncrements wiener_increments(const WienerSpec& spec, std::uint64_t stream = 0);

/// Sums consecutive blocks of `factor` increments (same Brownian path on a coarser grid).
WienerIncrements coarsen(const WienerIncrements& inc, std::size_t factor);

enum class Scheme { EulerMaruyama, PaperTaylor2 };

const char* to_string(Scheme s);

/// Second-order drift bracket of the Taylor scheme (the h^2/2 term).
enum class TaylorBracket {
    /// (F . grad) F + 1/2 sum g_j g_l d_jl F with F = (k1 f1, k2 f2): the
    /// deterministic second-order Taylor term.
    Exact,
    /// -2 x1 x2/s^3 F_i + g_i x1 x2/s^3, term-for-term as tabulated for the scheme.
    AsTabulated,
};

struct Truncation {
    std::size_t step = 0;  ///< index of the last valid state
    std::string reason;
};

struct SdePath {
    std::vector<double> times;
    std::vector<Vec2> states;
    WienerIncrements increments;
    Scheme scheme = Scheme::EulerMaruyama;
    GameParams params;
    std::uint64_t seed = 0;
    std::optional<Truncation> truncation;

    bool truncated() const { return truncation.has_value(); }
};

/// x(n+1) = x(n) + h F(x(n)) + g(x(n)) G(n).
SdePath euler_maruyama(const GameParams& p, const Vec2& x_init, const WienerSpec& spec,
                       std::uint64_t stream = 0);

/// Second-order scheme:
///   x_i(n+1) = x_i + h F_i + g_i G + b_ii g_i (G^2 - h)/2 + B_i h^2/2
///              + (m_i - 2 x_j / s^3) g_i h G / 2,
/// with s = x1 + x2, j the other firm, B_i the bracket selected above, and
/// mixed-term coefficients m_1 = b11, m_2 = b21 as tabulated.
SdePath paper_taylor2(const GameParams& p, const Vec2& x_init, const WienerSpec& spec,
                      std::uint64_t stream = 0, TaylorBracket bracket = TaylorBracket::Exact);

/// Integrate with caller-supplied increments (for pathwise comparisons).
SdePath integrate_path(const GameParams& p, const Vec2& x_init, double step_h,
                       const WienerIncrements& increments, Scheme scheme,
                       TaylorBracket bracket = TaylorBracket::Exact);

/// n_paths independent paths; path i uses stream i of spec.seed.
std::vector<SdePath> simulate_ensemble(const GameParams& p, const Vec2& x_init,
                                       const WienerSpec& spec, Scheme scheme,
                                       std::size_t n_paths, unsigned threads = 0);

enum class Observable { Mean, SecondMoment, NormSqAboutX0 };

/// One row per time; `values[c][n]` is channel c at time n.
struct EnsembleSeries {
    std::vector<double> times;
    std::vector<std::string> channels;
    std::vector<std::vector<double>> values;
};

/// Pointwise-in-time sample statistic. Mean and SecondMoment give one channel
/// per component; NormSqAboutX0 gives |x - x0|^2. Throws MismatchedPaths.
EnsembleSeries ensemble_stats(std::span<const SdePath> paths, Observable observable);

}  // namespace cournot
