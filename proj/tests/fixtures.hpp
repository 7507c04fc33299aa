#pragma once

#include "cournot/core_model.hpp"

namespace fixture {

inline cournot::GameParams ref_game(double alpha = 2.0, double beta = 2.0) {
    return cournot::GameParams::rotation_scale(0.2, 2.0, 0.2, 0.4, alpha, beta);
}

inline cournot::Mat2 ref_a() { return {-0.176, 0.792, -1.584, -3.52}; }

inline cournot::LinearSystem ref_system(double alpha = 2.0, double beta = 2.0) {
    return cournot::linearize(ref_game(alpha, beta), cournot::NoiseWiring::SharedWiener).system;
}

/// A = 0 with pure rotation noise beta J: lambda = beta^2 / 2, uniform angle law.
inline cournot::LinearSystem skew(double beta = 1.0) {
    return cournot::rotation_scale_system(cournot::Mat2::zero(), 0.0, beta);
}

inline cournot::LinearSystem linear(const cournot::Mat2& a, const cournot::Mat2& b,
                                    cournot::NoiseWiring w = cournot::NoiseWiring::SharedWiener) {
    return {a, b, w};
}

}  // namespace fixture
