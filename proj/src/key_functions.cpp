// Discrete key functions D1, D2 (z in units of n sites), their derivatives and
// an argument-principle count of critical points.

#include <algorithm>
#include <cmath>
#include <set>

#include "detail.hpp"
#include "pk/error.hpp"
#include "pk/kernels.hpp"

namespace pk {

using detail::cplx;
using detail::kPi;

namespace {

struct Range {
  int64_t lo, hi;  // integer positions j contributing log(z - j/n)
};

Range range_of(KeyWhich which, const KeyParams& p) {
  if (which == KeyWhich::D2) return {p.x2 - p.t2 + 1, p.x2 - 1};
  return {p.x1 - p.t1, p.x1};
}

void check(const KeyParams& p) {
  if (p.n < 1) fail(Errc::InvalidArgument, "n must be positive");
  if (!(p.beta > 0 && p.beta < 1)) fail(Errc::InvalidArgument, "beta must lie in (0,1)");
  validate_config(p.d);
  if (p.d.M < 1 || p.d.N < 0) fail(Errc::InvalidArgument, "labels -1 and 0 are needed for the normalization");
}

// Nearest integer k to n z and whether it is removable (true) or a pole.
struct Near {
  bool close = false;
  int64_t k = 0;
  bool in_d = false, in_range = false;
};

Near classify(cplx u, const KeyParams& p, const Range& r) {
  Near nr;
  const double k = std::round(u.real());
  if (std::abs(u - k) >= 1e-6) return nr;
  nr.close = true;
  nr.k = static_cast<int64_t>(k);
  nr.in_d = std::binary_search(p.d.pos.begin(), p.d.pos.end(), nr.k);
  nr.in_range = nr.k >= r.lo && nr.k <= r.hi;
  if (nr.in_d == nr.in_range) fail(Errc::OnPole, "z lies on the pole set of the key function");
  return nr;
}

// Continuous branch of the defining sum on Im z >= 0, before normalization.
cplx d_raw(cplx z, KeyWhich which, const KeyParams& p) {
  const double n = static_cast<double>(p.n);
  const Range r = range_of(which, p);
  const cplx u = n * z;
  const Near nr = classify(u, p, r);
  cplx acc = 0;
  for (int64_t di : p.d.pos) {
    if (nr.close && nr.in_d && di == nr.k) continue;
    acc += std::log(z - static_cast<double>(di) / n);
  }
  for (int64_t j = r.lo; j <= r.hi; ++j) {
    if (nr.close && nr.in_range && j == nr.k) continue;
    acc += std::log(z - static_cast<double>(j) / n);
  }
  if (nr.close) {
    // log(z - k/n) - log sin(pi n z) with eps = n z - k, written through
    // g(eps) = (1 - e^{2 pi i eps}) / eps.
    const cplx eps = u - static_cast<double>(nr.k);
    const cplx a(0, 2 * kPi);
    const cplx ae = a * eps;
    cplx em1_over;  // expm1(ae)/ae
    if (std::abs(ae) < 1e-3) em1_over = 1.0 + ae / 2.0 + ae * ae / 6.0 + ae * ae * ae / 24.0;
    else em1_over = (std::exp(ae) - 1.0) / ae;
    const cplx g = -a * em1_over;
    const cplx I(0, 1);
    acc += -std::log(g) - std::log(n) + I * kPi * u - I * (kPi / 2) + std::log(2.0);
  } else {
    acc -= detail::log_sin_pi(u);
  }
  return acc / n + z * std::log(p.beta / (1 - p.beta));
}

double reference_imag(KeyWhich which, const KeyParams& p) {
  const double x = (static_cast<double>(p.d.at(-1)) + 0.5) / static_cast<double>(p.n);
  return d_raw(cplx(x, 0), which, p).imag();
}

}  // namespace

std::complex<double> key_function_D(std::complex<double> z, KeyWhich which, const KeyParams& p) {
  check(p);
  if (z.imag() < 0) return std::conj(key_function_D(std::conj(z), which, p));
  return d_raw(z, which, p) - cplx(0, reference_imag(which, p));
}

std::complex<double> key_function_D_prime(std::complex<double> z, KeyWhich which, const KeyParams& p) {
  check(p);
  if (z.imag() < 0) return std::conj(key_function_D_prime(std::conj(z), which, p));
  const double n = static_cast<double>(p.n);
  const Range r = range_of(which, p);
  const cplx u = n * z;
  const Near nr = classify(u, p, r);
  cplx acc = 0;
  for (int64_t di : p.d.pos) {
    if (nr.close && nr.in_d && di == nr.k) continue;
    acc += 1.0 / (z - static_cast<double>(di) / n);
  }
  for (int64_t j = r.lo; j <= r.hi; ++j) {
    if (nr.close && nr.in_range && j == nr.k) continue;
    acc += 1.0 / (z - static_cast<double>(j) / n);
  }
  acc /= n;
  if (nr.close) {
    const cplx eps = u - static_cast<double>(nr.k);
    // 1/eps - pi cot(pi eps) = pi^2 eps/3 + pi^4 eps^3/45 + ...
    if (std::abs(eps) < 1e-4) acc += kPi * kPi * eps / 3.0 + std::pow(kPi, 4) * eps * eps * eps / 45.0;
    else acc += 1.0 / eps - detail::pi_cot_pi(eps);
  } else {
    acc -= detail::pi_cot_pi(u);
  }
  return acc + std::log(p.beta / (1 - p.beta));
}

int critical_point_winding(KeyWhich which, const KeyParams& p, double center, double radius) {
  check(p);
  if (!(radius > 0)) fail(Errc::InvalidArgument, "radius must be positive");
  const double n = static_cast<double>(p.n);
  // Keep both real-axis crossings at least a quarter site from the lattice.
  auto off_lattice = [&](double x) {
    const double u = n * x;
    return std::abs(u - std::round(u)) >= 0.25;
  };
  double r = radius;
  for (int k = 0; k < 40 && !(off_lattice(center + r) && off_lattice(center - r)); ++k) r += 0.05 / n;
  if (!(off_lattice(center + r) && off_lattice(center - r)))
    fail(Errc::OnPole, "could not place the winding circle off the lattice");
  auto f = [&](double th) { return key_function_D_prime(center + std::polar(r, th), which, p); };
  // Accumulate arg increments, bisecting any step that turns more than 0.3 rad.
  double total = 0;
  const int base = 2048;
  for (int k = 0; k < base; ++k) {
    struct Seg {
      double a, b;
      cplx fa, fb;
      int depth;
    };
    const double a = 2 * kPi * k / base, b = 2 * kPi * (k + 1) / base;
    std::vector<Seg> stack{{a, b, f(a), f(b), 0}};
    while (!stack.empty()) {
      Seg s = stack.back();
      stack.pop_back();
      const double da = std::arg(s.fb / s.fa);
      if (std::abs(da) > 0.3 && s.depth < 30) {
        const double m = 0.5 * (s.a + s.b);
        const cplx fm = f(m);
        stack.push_back({m, s.b, fm, s.fb, s.depth + 1});
        stack.push_back({s.a, m, s.fa, fm, s.depth + 1});
        continue;
      }
      total += da;
    }
  }
  return static_cast<int>(std::lround(total / (2 * kPi)));
}

QuarticCheck key_quartic_check(KeyWhich which, const KeyParams& p, const CuspData& cusp, double eps) {
  check(p);
  const double n = static_cast<double>(p.n);
  QuarticCheck qc;
  qc.radius = std::pow(n, -0.25 + eps) * cusp.t_c;
  const cplx zc(cusp.z_c, 0);
  const cplx d0 = key_function_D(zc, which, p);
  const double k4 = cusp.A / std::pow(cusp.t_c, 4);
  for (int a = 1; a <= 10; ++a) {
    const double rr = qc.radius * a / 10.0;
    for (int b = 0; b < 16; ++b) {
      const cplx dz = std::polar(rr, 2 * kPi * (b + 0.5) / 16.0);
      const cplx dz2 = dz * dz;
      const double res = std::abs(key_function_D(zc + dz, which, p) - d0 + k4 * dz2 * dz2);
      qc.max_residual = std::max(qc.max_residual, res);
    }
  }
  qc.C = qc.max_residual / std::pow(n, -1 + 2 * eps);
  return qc;
}

}  // namespace pk
