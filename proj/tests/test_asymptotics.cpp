#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lmpot/asymptotics.hpp"
#include "lmpot/errors.hpp"
#include "lmpot/gpd.hpp"
#include "lmpot/lmoments.hpp"

using lmpot::ConfidenceBand;
using lmpot::GpdParams;
using lmpot::LmomCovMatrix;
using lmpot::PwmCovMatrix;
using lmpot::RatioCov;

namespace {

// Full plug-in chain at the population point of GPd(sigma, xi).
RatioCov ratio_chain(double sigma, double xi) {
    const GpdParams p{sigma, xi};
    const lmpot::PopulationLmoments lm = gpd_population_lmoments(p);
    return ratio_acov(lmom_acov(pwm_acov(p)), lm.l2, lm.t3, lm.t4);
}

struct RatioFixture {
    double xi, t33, t34, t44, rho2; // exact rational chain, evaluated in binary
};

const RatioFixture ratio_fixtures[] = {
    {-0.2, 0.173319327731092, 0.093995931706016, 0.113655500810363, 0.448518806968963},
    {0.0, 0.237037037037037, 0.185185185185185, 0.211640211640212, 0.683593750000000},
    {0.2, 0.442290628626032, 0.462335964133937, 0.554889785976657, 0.870965368769941},
};

} // namespace

TEST_CASE("pwm covariance entries at xi = 0") {
    const PwmCovMatrix c = pwm_acov(GpdParams{1.0, 0.0});
    REQUIRE(c.a[0][0] == Catch::Approx(1.0).epsilon(1e-15));
    REQUIRE(c.a[0][1] == Catch::Approx(0.25).epsilon(1e-15));
    REQUIRE(c.a[1][1] == Catch::Approx(1.0 / 12.0).epsilon(1e-15));
    REQUIRE(c.asymptotics_valid);

    // scale enters as sigma^2
    const PwmCovMatrix c3 = pwm_acov(GpdParams{3.0, 0.0});
    for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s)
            REQUIRE(c3.a[r][s] == Catch::Approx(9 * c.a[r][s]).epsilon(1e-14));
}

TEST_CASE("pwm covariance validity boundaries") {
    REQUIRE_THROWS_AS(pwm_acov(GpdParams{1.0, 0.5}), lmpot::nonexistent_variance_error);
    REQUIRE_THROWS_AS(pwm_acov(GpdParams{1.0, 0.7}), lmpot::nonexistent_variance_error);
    const PwmCovMatrix c = pwm_acov(GpdParams{1.0, -0.6});
    REQUIRE_FALSE(c.asymptotics_valid);
    REQUIRE(c.a[0][0] == Catch::Approx(1.0 / (1.6 * 1.6 * 2.2)).epsilon(1e-14));
}

TEST_CASE("lmoment covariance from the pwm map") {
    const LmomCovMatrix lc = lmom_acov(pwm_acov(GpdParams{1.0, 0.0}));
    REQUIRE(lc.lam[0][0] == Catch::Approx(1.0).epsilon(1e-14));
    // Var(l2) = A00 - 4 A01 + 4 A11 = 1 - 1 + 1/3
    REQUIRE(lc.lam[1][1] == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            REQUIRE(lc.lam[i][j] == lc.lam[j][i]);
    REQUIRE_FALSE(lmom_acov(pwm_acov(GpdParams{1.0, -0.55})).asymptotics_valid);
}

TEST_CASE("ratio covariance against the exact chain") {
    for (const RatioFixture& fx : ratio_fixtures) {
        const RatioCov rc = ratio_chain(1.0, fx.xi);
        REQUIRE(rc.t33 == Catch::Approx(fx.t33).epsilon(1e-12));
        REQUIRE(rc.t34 == Catch::Approx(fx.t34).epsilon(1e-12));
        REQUIRE(rc.t44 == Catch::Approx(fx.t44).epsilon(1e-12));
        REQUIRE(rc.rho34_sq == Catch::Approx(fx.rho2).epsilon(1e-12));
        REQUIRE_FALSE(rc.degenerate_correlation);
    }
}

TEST_CASE("ratio covariance is scale invariant") {
    const RatioCov a = ratio_chain(1.0, 0.2);
    const RatioCov b = ratio_chain(5.0, 0.2);
    REQUIRE(a.t33 == Catch::Approx(b.t33).epsilon(1e-12));
    REQUIRE(a.t34 == Catch::Approx(b.t34).epsilon(1e-12));
    REQUIRE(a.t44 == Catch::Approx(b.t44).epsilon(1e-12));
}

TEST_CASE("squared correlation stays inside (0,1) across the shape range") {
    for (double xi = -0.49; xi < 0.495; xi += 0.02) {
        const RatioCov rc = ratio_chain(1.0, xi);
        REQUIRE(rc.rho34_sq > 0.0);
        REQUIRE(rc.rho34_sq < 1.0);
        REQUIRE_FALSE(rc.degenerate_correlation);
    }
}

TEST_CASE("ratio covariance needs positive l2") {
    const LmomCovMatrix lc = lmom_acov(pwm_acov(GpdParams{1.0, 0.0}));
    REQUIRE_THROWS_AS(ratio_acov(lc, 0.0, 0.3, 0.2), lmpot::domain_error);
}

TEST_CASE("band geometry") {
    const RatioCov rc = ratio_chain(1.0, 0.2);
    const double t3 = (1 + 0.2) / (3 - 0.2);
    const std::size_t n_u = 100;
    const ConfidenceBand b4 = ci_tau4_given_t3(t3, n_u, 0.05, rc);

    REQUIRE(b4.center == Catch::Approx(lmpot::gpd_g(t3)).epsilon(1e-15));
    REQUIRE(b4.level == 0.95);
    REQUIRE(b4.upper - b4.center == Catch::Approx(b4.center - b4.lower).margin(1e-15));

    const double hw_expected = 1.9599639845400542 *
                               std::sqrt(0.554889785976657 * (1 - 0.870965368769941) / 100.0);
    REQUIRE(b4.upper - b4.center == Catch::Approx(hw_expected).epsilon(1e-12));

    // quadrupling n_u halves the width
    const ConfidenceBand b4n = ci_tau4_given_t3(t3, 4 * n_u, 0.05, rc);
    REQUIRE(b4.upper - b4.lower == Catch::Approx(2 * (b4n.upper - b4n.lower)).epsilon(1e-12));

    // smaller alpha widens the band
    const ConfidenceBand tight = ci_tau4_given_t3(t3, n_u, 0.10, rc);
    const ConfidenceBand wide = ci_tau4_given_t3(t3, n_u, 0.01, rc);
    REQUIRE(wide.upper - wide.lower > b4.upper - b4.lower);
    REQUIRE(b4.upper - b4.lower > tight.upper - tight.lower);

    const ConfidenceBand b3 = ci_tau3_given_t4(0.2, n_u, 0.05, rc);
    REQUIRE(b3.center == Catch::Approx(lmpot::gpd_g_inv(0.2)).epsilon(1e-15));
    const double hw3 = 1.9599639845400542 *
                       std::sqrt(0.442290628626032 * (1 - 0.870965368769941) / 100.0);
    REQUIRE(b3.upper - b3.center == Catch::Approx(hw3).epsilon(1e-12));
}

TEST_CASE("band argument validation") {
    const RatioCov rc = ratio_chain(1.0, 0.0);
    REQUIRE_THROWS_AS(ci_tau4_given_t3(0.3, 3, 0.05, rc), lmpot::insufficient_sample_error);
    REQUIRE_THROWS_AS(ci_tau4_given_t3(0.3, 100, 0.0, rc), lmpot::domain_error);
    REQUIRE_THROWS_AS(ci_tau4_given_t3(0.3, 100, 1.0, rc), lmpot::domain_error);
    // the tau3 band needs an invertible ordinate
    REQUIRE_THROWS_AS(ci_tau3_given_t4(0.0, 100, 0.05, rc), lmpot::domain_error);
    REQUIRE_THROWS_AS(ci_tau3_given_t4(-0.1, 100, 0.05, rc), lmpot::domain_error);
}
