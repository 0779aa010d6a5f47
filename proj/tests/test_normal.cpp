#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lmpot/errors.hpp"
#include "lmpot/normal.hpp"

using lmpot::std_normal_cdf;
using lmpot::std_normal_quantile;

TEST_CASE("cdf reference values") {
    REQUIRE(std_normal_cdf(0.0) == 0.5);
    REQUIRE(std_normal_cdf(1.0) == Catch::Approx(0.84134474606854295).margin(1e-15));
    REQUIRE(std_normal_cdf(-2.0) == Catch::Approx(0.022750131948179207).margin(1e-15));
    REQUIRE(std_normal_cdf(3.0) == Catch::Approx(0.99865010196836991).margin(1e-15));
    REQUIRE(std_normal_cdf(2.057) == Catch::Approx(0.98015688706581271).margin(1e-15));
    REQUIRE(std_normal_cdf(-0.559) == Catch::Approx(0.28808086009144119).margin(1e-15));
}

TEST_CASE("quantile reference values") {
    REQUIRE(std_normal_quantile(0.5) == 0.0);
    REQUIRE(std_normal_quantile(0.975) == Catch::Approx(1.9599639845400542).margin(1e-12));
    REQUIRE(std_normal_quantile(0.025) == Catch::Approx(-1.9599639845400542).margin(1e-12));
    REQUIRE(std_normal_quantile(0.95) == Catch::Approx(1.6448536269514722).margin(1e-12));
}

// The right tail of quantile(cdf(z)) is limited by how finely doubles near 1
// resolve the upper tail, so the grid stops at z = 5.5 there; the left tail
// keeps full relative resolution down to z = -8.
TEST_CASE("quantile inverts cdf") {
    for (double z = -8.0; z <= 5.5; z += 0.25)
        REQUIRE(std_normal_quantile(std_normal_cdf(z)) == Catch::Approx(z).margin(1e-8));
}

TEST_CASE("cdf inverts quantile") {
    for (double p : {1e-12, 1e-9, 1e-6, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999})
        REQUIRE(std_normal_cdf(std_normal_quantile(p)) == Catch::Approx(p).margin(1e-12));
}

TEST_CASE("quantile domain") {
    REQUIRE_THROWS_AS(std_normal_quantile(0.0), lmpot::domain_error);
    REQUIRE_THROWS_AS(std_normal_quantile(1.0), lmpot::domain_error);
    REQUIRE_THROWS_AS(std_normal_quantile(-0.5), lmpot::domain_error);
    REQUIRE_THROWS_AS(std_normal_quantile(std::nan("")), lmpot::domain_error);
}
