#pragma once

#include "cournot/core_model.hpp"

namespace cournot {

/// One Euler-Maruyama step of dX = A X dt + B X dW. With shared wiring both
/// rows use dw1; with independent wiring row i uses dw_i.
inline Vec2 linear_em_step(const LinearSystem& sys, const Vec2& x, double h, double dw1,
                           double dw2) {
    const Vec2 ax = sys.a * x;
    const Vec2 bx = sys.b * x;
    const double n2 = sys.wiring == NoiseWiring::SharedWiener ? dw1 : dw2;
    return {x[0] + ax[0] * h + bx[0] * dw1, x[1] + ax[1] * h + bx[1] * n2};
}

}  // namespace cournot
