#pragma once

#include <vector>

namespace pfsim {

// Gauss-Legendre rule on [-1, 1]
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int order() const { return static_cast<int>(nodes.size()); }
};

// Nodes by Newton iteration on P_n; cached per order, thread-safe.
const GaussLegendreRule& gauss_legendre(int order);

// Same rule mapped to [a, b].
struct MappedRule {
    std::vector<double> x;
    std::vector<double> w;
};
MappedRule gauss_legendre_on(double a, double b, int order);

}  // namespace pfsim
