#pragma once
// Gauss-Legendre rules and composite rules along straight complex segments.

#include <complex>
#include <vector>

namespace pk {

struct QuadRule {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // weights
};

// n-point Gauss-Legendre on [-1, 1] (Newton on P_n, cached per n).
const QuadRule& gauss_legendre(int n);
// Mapped to [a, b].
QuadRule gauss_legendre(int n, double a, double b);

struct PathNode {
  std::complex<double> z;
  std::complex<double> dz;  // quadrature weight times dz/ds
};

// Composite Gauss-Legendre on the segment a -> b: `panels` uniform panels,
// with extra geometric refinement (ratio 1/2, down to length `hmin`) toward
// an endpoint when grade_a / grade_b is set.
std::vector<PathNode> segment_nodes(std::complex<double> a, std::complex<double> b, int order, int panels,
                                    bool grade_a, bool grade_b, double hmin);

}  // namespace pk
