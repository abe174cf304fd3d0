#pragma once
// Internal helpers shared by the kernel sources.

#include <cmath>
#include <complex>

namespace pk::detail {

using cplx = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

// log sin(pi w), stable for large |Im w|:
// -i pi w + log(1 - e^{2 pi i w}) + i pi/2 - log 2 on Im w >= 0; conjugated below.
inline cplx log_sin_pi(cplx w) {
  if (w.imag() < 0) return std::conj(log_sin_pi(std::conj(w)));
  const cplx I(0, 1);
  const cplx e = std::exp(2.0 * kPi * I * w);
  return -I * kPi * w + std::log(1.0 - e) + I * (kPi / 2) - std::log(2.0);
}

// pi cot(pi w), stable for large |Im w|.
inline cplx pi_cot_pi(cplx w) {
  if (w.imag() < 0) return std::conj(pi_cot_pi(std::conj(w)));
  if (w.imag() == 0) return kPi * std::cos(kPi * w.real()) / std::sin(kPi * w.real());
  const cplx I(0, 1);
  const cplx e = std::exp(2.0 * kPi * I * w);
  return kPi * I * (e + 1.0) / (e - 1.0);
}

// log of sum_k c_k e^{l_k} accumulated with a running offset.
struct LogSum {
  double offset = -INFINITY;
  cplx sum = 0;
  void add(cplx coeff, cplx log_mag) {
    const double r = log_mag.real();
    if (r > offset) {
      if (offset > -INFINITY) sum *= std::exp(offset - r);
      offset = r;
    }
    sum += coeff * std::exp(log_mag - offset);
  }
  cplx log() const { return std::log(sum) + offset; }
  cplx value() const { return offset == -INFINITY ? cplx(0) : sum * std::exp(offset); }
};

}  // namespace pk::detail
