#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace cournot {

using Vec2 = std::array<double, 2>;

/// Row-major 2x2 real matrix.
struct Mat2 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m21 = 0.0;
    double m22 = 0.0;

    static constexpr Mat2 zero() { return {}; }
    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr double trace() const { return m11 + m22; }
    constexpr double det() const { return m11 * m22 - m12 * m21; }
    constexpr Vec2 operator*(const Vec2& v) const {
        return {m11 * v[0] + m12 * v[1], m21 * v[0] + m22 * v[1]};
    }

    bool is_finite() const;
    friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

/// How the noise term B·X enters: one Wiener process for both rows, or one per row.
enum class NoiseWiring { SharedWiener, IndependentWieners };

const char* to_string(NoiseWiring wiring);

enum class ErrorKind {
    InvalidParams,
    SingularState,
    DegenerateNoise,
    NonPositiveDensity,
    SchemeBreakdown,
    ResidualExceeded,
    DivisionDegenerate,
    MismatchedPaths,
    NumericalOverflow,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for usage/parameter problems, false for numerical failures.
    bool is_usage_error() const noexcept { return kind_ == ErrorKind::InvalidParams; }

private:
    ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
public:
    explicit TypedError(const std::string& what) : Error(K, what) {}
};

using InvalidParams = TypedError<ErrorKind::InvalidParams>;
using SingularState = TypedError<ErrorKind::SingularState>;
using DegenerateNoise = TypedError<ErrorKind::DegenerateNoise>;
using NonPositiveDensity = TypedError<ErrorKind::NonPositiveDensity>;
using SchemeBreakdown = TypedError<ErrorKind::SchemeBreakdown>;
using ResidualExceeded = TypedError<ErrorKind::ResidualExceeded>;
using DivisionDegenerate = TypedError<ErrorKind::DivisionDegenerate>;
using MismatchedPaths = TypedError<ErrorKind::MismatchedPaths>;
using NumericalOverflow = TypedError<ErrorKind::NumericalOverflow>;

}  // namespace cournot
