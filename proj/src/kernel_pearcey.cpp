// Extended Pearcey kernel by tensor Gauss-Legendre quadrature.
//
// The z contour is the imaginary axis. The w rays are moved from the origin
// to vertices +-delta (right pair at +delta, left pair at -delta); the
// integrand is entire in w away from w = z, so this is an exact deformation
// and keeps the two contours a distance delta apart.

#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "pk/error.hpp"
#include "pk/kernels.hpp"
#include "pk/quadrature.hpp"

namespace pk {

using detail::cplx;
using detail::kPi;

namespace {

double z_extent(double t, double drop) {
  const double emax = t < 0 ? t * t / 4 : 0.0;
  const double u = -t + std::sqrt(t * t - 4 * emax + 4 * drop);
  return std::sqrt(std::max(u, 0.0)) + 0.5;
}

// Log-magnitude of exp(w^4/4 - s w^2/2 + x w).
double w_exponent(cplx w, double s, double x) {
  const cplx w2 = w * w;
  return (w2 * w2 / 4.0 - s * w2 / 2.0 + x * w).real();
}

double ray_extent(cplx vertex, cplx dir, double s, double xlo, double xhi, double drop) {
  auto e = [&](double r) {
    const cplx w = vertex + r * dir;
    return std::max(w_exponent(w, s, xlo), w_exponent(w, s, xhi));
  };
  double peak = e(0.0);
  for (double r = 0.05;; r += 0.05) {
    const double v = e(r);
    peak = std::max(peak, v);
    if (r > 1 && v < peak - drop && e(r + 0.5) < v) return r + 0.25;
    if (r > 1e3) fail(Errc::QuadratureNonConvergence, "Pearcey w-ray does not decay");
  }
}

struct Contours {
  std::vector<PathNode> z, w;
};

Contours build(double s, double xlo, double xhi, double t, const PearceyOptions& opt) {
  Contours c;
  const double Y = z_extent(t, opt.drop_nats);
  const int zp = std::max(2, 2 * static_cast<int>(std::ceil(Y / opt.panel)));
  c.z = segment_nodes(cplx(0, -Y), cplx(0, Y), opt.order, zp, false, false, 0);
  const double d = opt.vertex_shift;
  const cplx e1 = std::polar(1.0, kPi / 4), e7 = std::polar(1.0, -kPi / 4);
  const cplx e5 = std::polar(1.0, 5 * kPi / 4), e3 = std::polar(1.0, 3 * kPi / 4);
  // Incoming rays run from infinity to the vertex, outgoing from it.
  struct Ray {
    cplx vertex, dir;
    bool incoming;
  };
  const Ray rays[4] = {{cplx(d, 0), e1, true}, {cplx(d, 0), e7, false}, {cplx(-d, 0), e5, true},
                       {cplx(-d, 0), e3, false}};
  for (const auto& r : rays) {
    const double L = ray_extent(r.vertex, r.dir, s, xlo, xhi, opt.drop_nats);
    const int panels = std::max(1, static_cast<int>(std::ceil(L / opt.panel)));
    const cplx far = r.vertex + L * r.dir;
    const auto nodes = r.incoming ? segment_nodes(far, r.vertex, opt.order, panels, false, false, 0)
                                  : segment_nodes(r.vertex, far, opt.order, panels, false, false, 0);
    c.w.insert(c.w.end(), nodes.begin(), nodes.end());
  }
  return c;
}

Eigen::MatrixXcd double_integral(double s, const std::vector<double>& xs, double t, const std::vector<double>& ys,
                                 const PearceyOptions& opt) {
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  const Contours c = build(s, *xlo, *xhi, t, opt);
  const auto nz = static_cast<Eigen::Index>(c.z.size()), nw = static_cast<Eigen::Index>(c.w.size());
  const auto na = static_cast<Eigen::Index>(xs.size()), nb = static_cast<Eigen::Index>(ys.size());
  Eigen::MatrixXcd W(na, nw), C(nw, nz), Z(nz, nb);
  for (Eigen::Index k = 0; k < nw; ++k) {
    const cplx w = c.w[static_cast<size_t>(k)].z, w2 = w * w;
    const cplx base = w2 * w2 / 4.0 - s * w2 / 2.0;
    for (Eigen::Index a = 0; a < na; ++a)
      W(a, k) = c.w[static_cast<size_t>(k)].dz * std::exp(base + xs[static_cast<size_t>(a)] * w);
  }
  for (Eigen::Index j = 0; j < nz; ++j) {
    const cplx z = c.z[static_cast<size_t>(j)].z, z2 = z * z;
    const cplx base = -z2 * z2 / 4.0 + t * z2 / 2.0;
    for (Eigen::Index b = 0; b < nb; ++b)
      Z(j, b) = c.z[static_cast<size_t>(j)].dz * std::exp(base - ys[static_cast<size_t>(b)] * z);
    for (Eigen::Index k = 0; k < nw; ++k) C(k, j) = 1.0 / (z - c.w[static_cast<size_t>(k)].z);
  }
  const cplx two_pi_i(0, 2 * kPi);
  return (W * C) * Z / (two_pi_i * two_pi_i);
}

}  // namespace

double pearcey_gaussian_term(double s, double x, double t, double y) {
  if (!(s < t)) return 0.0;
  const double dt = t - s;
  return -std::exp(-(x - y) * (x - y) / (2 * dt)) / std::sqrt(2 * kPi * dt);
}

std::complex<double> kernel_pearcey_single(double s, double x, double t, double y, const PearceyOptions& opt) {
  const Eigen::MatrixXcd m = double_integral(s, {x}, t, {y}, opt);
  return m(0, 0) + pearcey_gaussian_term(s, x, t, y);
}

KernelValue kernel_pearcey(double s, double x, double t, double y, const PearceyOptions& opt) {
  for (double v : {s, x, t, y})
    if (!std::isfinite(v)) fail(Errc::InvalidArgument, "Pearcey arguments must be finite");
  const cplx coarse = kernel_pearcey_single(s, x, t, y, opt);
  PearceyOptions fine = opt;
  fine.panel = opt.panel / 2;
  const cplx v = kernel_pearcey_single(s, x, t, y, fine);
  KernelValue kv;
  kv.value = v;
  kv.abs_error_estimate = std::abs(v - coarse);
  kv.method = "pearcey";
  const double Y = z_extent(t, opt.drop_nats);
  const int64_t zn = 2 * static_cast<int64_t>(std::ceil(Y / fine.panel)) * fine.order;
  kv.nodes = zn;
  kv.peak_log = std::max(0.0, t < 0 ? t * t / 4 : 0.0);
  return kv;
}

Eigen::MatrixXd pearcey_matrix(double s, const std::vector<double>& xs, double t, const std::vector<double>& ys,
                               const PearceyOptions& opt) {
  if (xs.empty() || ys.empty()) return Eigen::MatrixXd(static_cast<Eigen::Index>(xs.size()),
                                                       static_cast<Eigen::Index>(ys.size()));
  const Eigen::MatrixXcd m = double_integral(s, xs, t, ys, opt);
  Eigen::MatrixXd out = m.real();
  if (s < t)
    for (Eigen::Index a = 0; a < out.rows(); ++a)
      for (Eigen::Index b = 0; b < out.cols(); ++b)
        out(a, b) += pearcey_gaussian_term(s, xs[static_cast<size_t>(a)], t, ys[static_cast<size_t>(b)]);
  return out;
}

KernelBlockFn pearcey_block_kernel(const PearceyOptions& opt) {
  return [opt](double s, const std::vector<double>& xs, double t, const std::vector<double>& ys) {
    return pearcey_matrix(s, xs, t, ys, opt);
  };
}

}  // namespace pk
