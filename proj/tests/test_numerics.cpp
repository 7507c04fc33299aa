#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "cournot/parallel.hpp"
#include "cournot/quadrature.hpp"
#include "cournot/random.hpp"

using namespace cournot;

TEST_SUITE("numerics") {

TEST_CASE("simpson is exact for cubics, including an odd interval count") {
    for (std::size_t n : {2u, 3u, 7u, 10u}) {
        const double h = 2.0 / static_cast<double>(n);
        std::vector<double> y(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const double x = -1.0 + h * static_cast<double>(i);
            y[i] = 3.0 * x * x * x - x * x + 2.0;
        }
        CHECK(simpson(y, h) == doctest::Approx(-2.0 / 3.0 + 4.0).epsilon(1e-13));
    }
    const std::vector<double> two{1.0, 3.0};
    CHECK(simpson(two, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("periodic integrands converge fast") {
    const std::size_t n = 256;
    const double h = 2.0 * std::numbers::pi / n;
    std::vector<double> y(n + 1);
    for (std::size_t i = 0; i <= n; ++i) y[i] = std::exp(std::cos(h * static_cast<double>(i)));
    // 2 pi I0(1)
    CHECK(simpson(y, h) == doctest::Approx(2.0 * std::numbers::pi * 1.2660658777520082).epsilon(1e-13));
}

TEST_CASE("gauss-legendre and cumulative integral") {
    CHECK(gauss_legendre8([](double x) { return std::pow(x, 15); }, 0.0, 1.0) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    const auto c = cumulative_integral([](double x) { return std::cos(x); }, 0.0, 0.1, 30);
    CHECK(c.front() == 0.0);
    for (std::size_t j = 0; j <= 30; ++j) CHECK(c[j] == doctest::Approx(std::sin(0.1 * static_cast<double>(j))).epsilon(1e-14));
}

TEST_CASE("philox known-answer vector") {
    // Random123 reference: key = (0, 0), counter = (0, 0, 0, 0).
    Philox4x32 g(0, 0);
    const auto b = g.next_block();
    CHECK(b[0] == 0x6627e8d5u);
    CHECK(b[1] == 0xe169c58du);
    CHECK(b[2] == 0xbc57ac4cu);
    CHECK(b[3] == 0x9b00dbd8u);
}

TEST_CASE("streams are reproducible and distinct") {
    GaussianStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    std::set<double> firsts;
    for (int i = 0; i < 100; ++i) {
        const double x = a.next();
        CHECK(x == b.next());
        if (i == 0) {
            firsts.insert(x);
            firsts.insert(c.next());
            firsts.insert(d.next());
        }
    }
    CHECK(firsts.size() == 3);
}

TEST_CASE("gaussian moments") {
    GaussianStream g(9, 0);
    const int n = 400000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = g.next();
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("parallel_for covers every index once and rethrows") {
    for (unsigned threads : {1u, 2u, 5u}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, threads);
        for (auto& h : hits) CHECK(h.load() == 1);
    }
    CHECK_THROWS_AS(parallel_for(50, [](std::size_t i) { if (i == 17) throw std::runtime_error("x"); }, 3),
                    std::runtime_error);
    parallel_for(0, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_threads(3) == 3);
    ::setenv(kThreadsEnvVar, "2", 1);
    CHECK(resolve_threads(0) == 2);
    ::unsetenv(kThreadsEnvVar);
    CHECK(resolve_threads(0) >= 1);
}

}  // TEST_SUITE
