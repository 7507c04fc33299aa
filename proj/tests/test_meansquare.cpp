#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"

#include "cournot/meansquare.hpp"

using namespace cournot;

namespace {

void check_form(const QuadraticForm& f, double c11, double c12, double c22) {
    CHECK(f.c11 == doctest::Approx(c11).epsilon(1e-12));
    CHECK(f.c12 == doctest::Approx(c12).epsilon(1e-12));
    CHECK(f.c22 == doctest::Approx(c22).epsilon(1e-12));
}

SecondMomentSettings short_horizon(std::size_t paths) {
    SecondMomentSettings s;
    s.n_paths = paths;
    s.horizon = 0.5;
    return s;
}

}  // namespace

TEST_SUITE("meansquare") {

TEST_CASE("generator coefficients on reference systems") {
    check_form(lv_coefficients(fixture::linear({-1, 0, 0, -1}, Mat2::zero()), {}), -1, 0, -1);
    check_form(lv_coefficients(fixture::linear(Mat2::zero(), Mat2::identity()), {}), 0.5, 0, 0.5);
    check_form(lv_coefficients(fixture::ref_system(), {}), 3.824, -0.792, 0.48);
    check_form(lv_coefficients(fixture::linear({1, 2, 3, 4}, Mat2::zero()), {2.0, 0.5}), 2.0, 4.0 + 1.5, 2.0);
}

TEST_CASE("coefficients agree with direct evaluation of the generator") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.1, 5.0);
    for (int draw = 0; draw < 100; ++draw) {
        const LinearSystem shared = fixture::linear({u(rng), u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng), u(rng)});
        LinearSystem indep = shared;
        indep.wiring = NoiseWiring::IndependentWieners;
        const QuadraticLyapunov v{w(rng), w(rng)};
        const QuadraticForm f = lv_coefficients(shared, v);
        const Vec2 x{u(rng), u(rng)};
        const double direct = lv_evaluate(shared, v, x);
        CHECK(std::abs(f(x) - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
        CHECK(std::abs(lv_evaluate(indep, v, x) - direct) < 1e-12 * std::max(1.0, std::abs(direct)));
        CHECK(lv_evaluate(shared, v, {-x[0], -x[1]}) == doctest::Approx(direct).epsilon(1e-14));
    }
    CHECK_THROWS_AS((QuadraticLyapunov{0.0, 1.0}.validate()), InvalidParams);
    CHECK_THROWS_AS(lv_coefficients(fixture::skew(), {1.0, -2.0}), InvalidParams);
}

TEST_CASE("tabulated sufficient conditions") {
    const PaperConditions f = paper_conditions(fixture::ref_system());
    CHECK(f.A1 == doctest::Approx(0.7531172069825436).epsilon(1e-12));
    CHECK(f.q1 == doctest::Approx(-0.6263142144638407).epsilon(1e-12));
    CHECK(f.q2 == doctest::Approx(3.0262344139650876).epsilon(1e-12));
    CHECK_FALSE(f.passes);

    // A1 > 0 here, so the conditions fail although A + A^T = -2I is mean-square stable.
    const LinearSystem spiral = fixture::linear({-1, 1, -1, -1}, Mat2::zero());
    const PaperConditions s = paper_conditions(spiral);
    CHECK(s.A1 == doctest::Approx(1.0));
    CHECK(s.q1 == doctest::Approx(-1.0));
    CHECK(s.q2 == doctest::Approx(1.0));
    CHECK_FALSE(s.passes);
    CHECK(definiteness_certificate(spiral).has_value());

    const LinearSystem ok = fixture::linear({-2, 1, 0.5, -2}, Mat2::zero());
    const PaperConditions o = paper_conditions(ok);
    CHECK(o.A1 == doctest::Approx(-0.5));
    CHECK(o.q1 == doctest::Approx(1.0));
    CHECK(o.q2 == doctest::Approx(2.0));
    CHECK(o.passes);

    CHECK_THROWS_AS(paper_conditions(fixture::linear({-1, 0, 0, -1}, Mat2::zero())), DivisionDegenerate);
    CHECK_THROWS_AS(paper_conditions(fixture::linear({-1, 1, 0, -1}, {1, -1, 0, 1})), DivisionDegenerate);
}

TEST_CASE("definiteness certificate") {
    const auto id = definiteness_certificate(fixture::linear({-1, 0, 0, -1}, Mat2::zero()));
    REQUIRE(id.has_value());
    CHECK(id->negative_definite);
    CHECK(id->margin > 0.0);
    CHECK(id->form.negative_definite());

    // Strong coupling needs w1 / w2 below 0.04.
    const LinearSystem coupled = fixture::linear({-1, 10, 0, -1}, Mat2::zero());
    CHECK_FALSE(lv_coefficients(coupled, {}).negative_definite());
    const auto c = definiteness_certificate(coupled);
    REQUIRE(c.has_value());
    CHECK(c->w_ratio < 0.04);
    const QuadraticForm again = lv_coefficients(coupled, {c->w_ratio, 1.0});
    check_form(c->form, again.c11, again.c12, again.c22);

    CHECK_FALSE(definiteness_certificate(fixture::skew()).has_value());
    CHECK_FALSE(definiteness_certificate(fixture::linear({1, 0, 0, -1}, Mat2::zero())).has_value());
}

TEST_CASE("second-moment rates on reference systems") {
    SecondMomentSettings s;
    const SecondMomentCheck det = mc_second_moment_check(fixture::linear({-1, 0, 0, -1}, Mat2::zero()), s);
    CHECK(std::abs(det.fit_rate + 2.0) < 0.05);
    CHECK(det.decay_observed);

    // E|u|^2 grows at rate 2a + sigma^2 for A = aI, B = sigma I.
    const SecondMomentCheck scalar =
        mc_second_moment_check(fixture::linear({-1, 0, 0, -1}, Mat2::identity()), short_horizon(100000));
    CHECK(std::abs(scalar.fit_rate + 1.0) < 0.1);

    // Rotation noise alone: d|u|^2 = beta^2 |u|^2 dt.
    const SecondMomentCheck skew = mc_second_moment_check(fixture::skew(), short_horizon(1000));
    CHECK(std::abs(skew.fit_rate - 1.0) < 0.05);
    CHECK_FALSE(skew.decay_observed);

    CHECK_THROWS_AS(mc_second_moment_check(fixture::skew(), short_horizon(99)), InvalidParams);
}

TEST_CASE("a certificate predicts observed decay") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0), d(-3.0, -0.5);
    int certified = 0;
    for (int draw = 0; draw < 40 && certified < 5; ++draw) {
        const LinearSystem sys = fixture::linear({d(rng), u(rng), u(rng), d(rng)}, {u(rng), u(rng), u(rng), u(rng)});
        if (!definiteness_certificate(sys)) continue;
        ++certified;
        const SecondMomentCheck m = mc_second_moment_check(sys, {});
        CHECK(m.fit_rate < 0.0);
        CHECK(m.decay_observed);
    }
    CHECK(certified == 5);
}

TEST_CASE("verdict follows the certificate only") {
    const MeanSquareReport fig = mean_square_report(fixture::ref_system());
    CHECK(fig.paper_conditions.has_value());
    CHECK(fig.verdict == (fig.certificate ? MeanSquareVerdict::MeanSquareStable : MeanSquareVerdict::NotCertified));
    CHECK_FALSE(fig.mc_check.has_value());
    CHECK(fig.wiring == NoiseWiring::SharedWiener);

    const MeanSquareReport diag = mean_square_report(fixture::linear({-1, 0, 0, -1}, Mat2::zero()), SecondMomentSettings{});
    CHECK_FALSE(diag.paper_conditions.has_value());
    CHECK(diag.verdict == MeanSquareVerdict::MeanSquareStable);
    REQUIRE(diag.mc_check.has_value());
    CHECK(diag.mc_check->decay_observed);

    const MeanSquareReport spiral = mean_square_report(fixture::linear({-1, 1, -1, -1}, Mat2::zero()));
    CHECK_FALSE(spiral.paper_conditions->passes);
    CHECK(spiral.verdict == MeanSquareVerdict::MeanSquareStable);

    CHECK(mean_square_report(fixture::skew()).verdict == MeanSquareVerdict::NotCertified);
    CHECK(std::string(to_string(MeanSquareVerdict::NotCertified)) != to_string(MeanSquareVerdict::MeanSquareStable));
}

}  // TEST_SUITE
