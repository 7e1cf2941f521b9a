#include <cmath>

#include "doctest.h"
#include "pfsim/quadrature.hpp"

using namespace pfsim;

TEST_CASE("rule integrates polynomials up to degree 2n-1 exactly") {
    // integral of x^k over [-1,1]
    for (int order : {2, 4, 6, 10}) {
        const GaussLegendreRule& r = gauss_legendre(order);
        REQUIRE(r.order() == order);
        for (int k = 0; k <= 2 * order - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < order; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
            double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("weights are positive and symmetric") {
    const GaussLegendreRule& r = gauss_legendre(7);
    double total = 0.0;
    for (int i = 0; i < 7; ++i) {
        CHECK(r.weights[i] > 0.0);
        CHECK(r.nodes[i] == doctest::Approx(-r.nodes[6 - i]).epsilon(1e-14).scale(1.0));
        total += r.weights[i];
    }
    CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("cached rule returns the same object") {
    const GaussLegendreRule& a = gauss_legendre(12);
    const GaussLegendreRule& b = gauss_legendre(12);
    CHECK(&a == &b);
}

TEST_CASE("mapped rule integrates on an arbitrary interval") {
    MappedRule r = gauss_legendre_on(0.5, 2.5, 8);
    double s = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * std::exp(r.x[i]);
    CHECK(s == doctest::Approx(std::exp(2.5) - std::exp(0.5)).epsilon(1e-10));
}
