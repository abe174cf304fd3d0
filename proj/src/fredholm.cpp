#include <cmath>

#include "pk/error.hpp"
#include "pk/kernels.hpp"
#include "pk/quadrature.hpp"

namespace pk {

double fredholm_det(const std::vector<double>& times, const std::vector<std::pair<double, double>>& intervals,
                    const KernelBlockFn& kernel, int m) {
  if (times.size() != intervals.size()) fail(Errc::InvalidArgument, "one time per interval");
  struct Block {
    double time;
    std::vector<double> x, sw;
  };
  std::vector<Block> blocks;
  for (size_t k = 0; k < times.size(); ++k) {
    const auto [a, b] = intervals[k];
    if (!(a <= b)) fail(Errc::InvalidArgument, "interval endpoints out of order");
    if (a == b) continue;  // empty
    const QuadRule q = gauss_legendre(m, a, b);
    Block bl{times[k], q.x, {}};
    for (double w : q.w) bl.sw.push_back(std::sqrt(w));
    blocks.push_back(std::move(bl));
  }
  if (blocks.empty()) return 1.0;
  const auto dim = static_cast<Eigen::Index>(blocks.size()) * m;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(dim, dim);
  for (size_t i = 0; i < blocks.size(); ++i)
    for (size_t j = 0; j < blocks.size(); ++j) {
      const Eigen::MatrixXd K = kernel(blocks[i].time, blocks[i].x, blocks[j].time, blocks[j].x);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          A(static_cast<Eigen::Index>(i) * m + a, static_cast<Eigen::Index>(j) * m + b) -=
              blocks[i].sw[static_cast<size_t>(a)] * K(a, b) * blocks[j].sw[static_cast<size_t>(b)];
    }
  return A.partialPivLu().determinant();
}

FredholmResult fredholm_gap(const std::vector<double>& times, const std::vector<std::pair<double, double>>& intervals,
                            const KernelBlockFn& kernel, int m, double tol, int max_order) {
  if (m < 1 || !(tol > 0)) fail(Errc::InvalidArgument, "need m >= 1 and tol > 0");
  bool any = false;
  for (const auto& [a, b] : intervals) any = any || a < b;
  if (!any) {
    if (times.size() != intervals.size()) fail(Errc::InvalidArgument, "one time per interval");
    return {1.0, 0.0, 0};
  }
  double prev = fredholm_det(times, intervals, kernel, m);
  for (int order = 2 * m; order <= max_order; order *= 2) {
    const double cur = fredholm_det(times, intervals, kernel, order);
    if (std::abs(cur - prev) < tol) return {cur, std::abs(cur - prev), order};
    prev = cur;
  }
  fail(Errc::NotConverged, "Nystrom determinant did not settle under order doubling");
}

}  // namespace pk
