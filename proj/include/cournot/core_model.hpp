#pragma once

#include <complex>

#include "cournot/types.hpp"

namespace cournot {

/// Guard on x1 + x2 below which the inverse demand 1/x is treated as singular.
inline constexpr double kStateEpsilon = 1e-9;

/// Constants of the stochastic Cournot duopoly with inverse demand 1/x and
/// affine costs c_i x_i. `b` holds the noise coefficients b_ij.
struct GameParams {
    double c1 = 1.0;
    double c2 = 1.0;
    double k1 = 1.0;
    double k2 = 1.0;
    Mat2 b = Mat2::zero();

    /// b = alpha*I + beta*J, i.e. b11 = b22 = alpha, b12 = -beta, b21 = beta.
    static GameParams rotation_scale(double c1, double c2, double k1, double k2,
                                     double alpha, double beta);

    bool has_rotation_scale_noise() const;

    /// Throws InvalidParams naming the first offending field.
    void validate() const;
};

struct StationaryState {
    double x10 = 0.0;
    double x20 = 0.0;

    Vec2 as_vec() const { return {x10, x20}; }
};

/// Linear SDE dX = A X dt + B X dW around the stationary state.
struct LinearSystem {
    Mat2 a;
    Mat2 b;
    NoiseWiring wiring;
};

LinearSystem rotation_scale_system(const Mat2& a, double alpha, double beta);

/// Result of linearize(): the system plus the finite-difference cross-check.
struct Linearization {
    LinearSystem system;
    double jacobian_deviation = 0.0;  ///< max |A - FD Jacobian| over entries
    bool jacobian_verified = false;   ///< deviation < kJacobianTolerance
};

inline constexpr double kJacobianTolerance = 1e-6;

struct CharacteristicRoots {
    std::complex<double> mu1;  ///< larger real part
    std::complex<double> mu2;
    double half_trace = 0.0;
    double discriminant = 0.0;  ///< trace^2 - 4 det
};

/// Effective drift (k1 f1, k2 f2). Throws SingularState if x1 + x2 <= eps_state.
Vec2 drift(const GameParams& p, const Vec2& x, double eps_state = kStateEpsilon);

/// Offsets gamma that make the diffusion vanish at the stationary state.
Vec2 gamma_offsets(const GameParams& p);

/// (b11 x1 + b12 x2 + gamma1, b21 x1 + b22 x2 + gamma2).
Vec2 diffusion(const GameParams& p, const Vec2& x);

StationaryState stationary_state(const GameParams& p);

Linearization linearize(const GameParams& p, NoiseWiring wiring);

/// Central-difference Jacobian of drift() at x.
Mat2 drift_jacobian_fd(const GameParams& p, const Vec2& x);

CharacteristicRoots characteristic_roots(const LinearSystem& sys);

}  // namespace cournot
