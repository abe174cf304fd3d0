#include "pk/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "pk/error.hpp"

namespace pk {

const QuadRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  if (n < 1) fail(Errc::InvalidArgument, "Gauss-Legendre order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  QuadRule r;
  r.x.resize(static_cast<size_t>(n));
  r.w.resize(static_cast<size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1);
    const double w = 2 / ((1 - x * x) * dp * dp);
    r.x[static_cast<size_t>(i)] = -x;
    r.x[static_cast<size_t>(n - 1 - i)] = x;
    r.w[static_cast<size_t>(i)] = w;
    r.w[static_cast<size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) r.x[static_cast<size_t>(n / 2)] = 0.0;
  return cache.emplace(n, std::move(r)).first->second;
}

QuadRule gauss_legendre(int n, double a, double b) {
  const QuadRule& s = gauss_legendre(n);
  QuadRule r = s;
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (size_t k = 0; k < r.x.size(); ++k) {
    r.x[k] = m + h * s.x[k];
    r.w[k] = h * s.w[k];
  }
  return r;
}

std::vector<PathNode> segment_nodes(std::complex<double> a, std::complex<double> b, int order, int panels,
                                    bool grade_a, bool grade_b, double hmin) {
  if (panels < 1) fail(Errc::InvalidArgument, "need at least one panel");
  const double L = std::abs(b - a);
  if (L == 0) return {};
  // Breakpoints in arclength fraction s in [0, 1].
  std::vector<double> br;
  const double h = 1.0 / panels;
  const double smin = std::max(hmin / L, 1e-14);
  if (grade_a) {
    std::vector<double> g;
    for (double s = h / 2; s > smin; s /= 2) g.push_back(s);
    br.push_back(0);
    for (auto it = g.rbegin(); it != g.rend(); ++it) br.push_back(*it);
  } else {
    br.push_back(0);
  }
  for (int k = 1; k < panels; ++k) br.push_back(k * h);
  if (grade_b) {
    std::vector<double> g;
    for (double s = h / 2; s > smin; s /= 2) g.push_back(1 - s);
    for (double s : g) br.push_back(s);
  }
  br.push_back(1);
  const QuadRule& q = gauss_legendre(order);
  const std::complex<double> dir = b - a;
  std::vector<PathNode> out;
  out.reserve((br.size() - 1) * static_cast<size_t>(order));
  for (size_t k = 0; k + 1 < br.size(); ++k) {
    const double s0 = br[k], s1 = br[k + 1];
    if (s1 <= s0) continue;
    const double hh = 0.5 * (s1 - s0), mm = 0.5 * (s0 + s1);
    for (size_t j = 0; j < q.x.size(); ++j) {
      const double s = mm + hh * q.x[j];
      out.push_back({a + s * dir, hh * q.w[j] * dir});
    }
  }
  return out;
}

}  // namespace pk
