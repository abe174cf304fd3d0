#include "pk/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pk/error.hpp"

namespace pk {

DensityProfile::DensityProfile(std::vector<DensityPiece> pieces, std::optional<std::pair<double, double>> gap) {
  if (pieces.empty()) fail(Errc::InvalidArgument, "density needs at least one piece");
  std::sort(pieces.begin(), pieces.end(), [](const auto& p, const auto& q) { return p.a < q.a; });
  for (size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    if (!(std::isfinite(p.a) && std::isfinite(p.b) && p.a < p.b))
      fail(Errc::InvalidArgument, "density piece needs finite a < b");
    if (!(p.rho > 0.0 && p.rho <= 1.0)) fail(Errc::InvalidArgument, "density piece value must lie in (0,1]");
    if (k > 0 && p.a < pieces[k - 1].b) fail(Errc::InvalidArgument, "density pieces overlap");
  }
  pieces_ = std::move(pieces);
  if (gap) {
    if (!(gap->first < gap->second)) fail(Errc::InvalidArgument, "gap needs E_- < E_+");
    for (const auto& p : pieces_)
      if (p.a < gap->second && p.b > gap->first) fail(Errc::InvalidArgument, "marked gap intersects the support");
    gap_ = gap;
    gap_marked_ = true;
  } else {
    double best = 0.0;
    for (size_t k = 1; k < pieces_.size(); ++k) {
      const double w = pieces_[k].a - pieces_[k - 1].b;
      if (w > best) {
        best = w;
        gap_ = std::make_pair(pieces_[k - 1].b, pieces_[k].a);
      }
    }
  }
}

double DensityProfile::gap_lo() const {
  if (!gap_) fail(Errc::InvalidArgument, "density has no gap");
  return gap_->first;
}

double DensityProfile::gap_hi() const {
  if (!gap_) fail(Errc::InvalidArgument, "density has no gap");
  return gap_->second;
}

double DensityProfile::mass() const {
  double m = 0.0;
  for (const auto& p : pieces_) m += p.rho * (p.b - p.a);
  return m;
}

double DensityProfile::mass_below(double x) const {
  double m = 0.0;
  for (const auto& p : pieces_) {
    if (x <= p.a) break;
    m += p.rho * (std::min(x, p.b) - p.a);
  }
  return m;
}

double DensityProfile::mass_left() const { return mass_below(gap_lo()); }
double DensityProfile::mass_right() const { return mass() - mass_below(gap_hi()); }

double DensityProfile::inverse_mass(double m, bool from_right) const {
  const double total = mass();
  if (m < 0.0 || m > total * (1 + 1e-14) + 1e-300) fail(Errc::OutOfRange, "mass level outside [0, total mass]");
  // Walk the pieces; exact within a piece because the density is constant.
  double acc = 0.0;
  for (size_t k = 0; k < pieces_.size(); ++k) {
    const auto& p = pieces_[k];
    const double pm = p.rho * (p.b - p.a);
    if (from_right ? (acc + pm > m) : (acc + pm >= m)) {
      if (from_right && m <= acc) return p.a;
      return std::clamp(p.a + (m - acc) / p.rho, p.a, p.b);
    }
    acc += pm;
  }
  return pieces_.back().b;
}

double DensityProfile::density(double x) const {
  for (const auto& p : pieces_)
    if (x >= p.a && x < p.b) return p.rho;
  return 0.0;
}

DensityProfile DensityProfile::dilated(double lambda) const {
  if (!(lambda > 0)) fail(Errc::InvalidArgument, "dilation factor must be positive");
  std::vector<DensityPiece> ps;
  for (const auto& p : pieces_) ps.push_back({lambda * p.a, lambda * p.b, p.rho});
  std::optional<std::pair<double, double>> g;
  if (gap_marked_) g = std::make_pair(lambda * gap_->first, lambda * gap_->second);
  return DensityProfile(std::move(ps), g);
}

DensityProfile DensityProfile::shifted(double s) const {
  std::vector<DensityPiece> ps;
  for (const auto& p : pieces_) ps.push_back({p.a + s, p.b + s, p.rho});
  std::optional<std::pair<double, double>> g;
  if (gap_marked_) g = std::make_pair(gap_->first + s, gap_->second + s);
  return DensityProfile(std::move(ps), g);
}

DensityProfile piecewise_approximation(const std::function<double(double)>& rho, double a, double b, int cells) {
  if (!(a < b) || cells < 1) fail(Errc::InvalidArgument, "piecewise_approximation needs a < b and cells >= 1");
  std::vector<DensityPiece> ps;
  const double h = (b - a) / cells;
  for (int k = 0; k < cells; ++k) {
    const double lo = a + k * h, hi = k + 1 == cells ? b : a + (k + 1) * h;
    const double avg = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(rho, lo, hi, 8, 1e-12) / (hi - lo);
    if (avg > 1e-14) ps.push_back({lo, hi, std::min(avg, 1.0)});
  }
  // Merge neighbours with identical values so closed forms stay short.
  std::vector<DensityPiece> merged;
  for (const auto& p : ps) {
    if (!merged.empty() && merged.back().b == p.a && merged.back().rho == p.rho)
      merged.back().b = p.b;
    else
      merged.push_back(p);
  }
  return DensityProfile(std::move(merged));
}

double quantile_position(const DensityProfile& rho, int64_t n, int64_t i) {
  if (n <= 0) fail(Errc::InvalidArgument, "quantile scale n must be positive");
  if (i == 0) return rho.gap_hi();
  const double level = static_cast<double>(i) / static_cast<double>(n);
  const double tol = 1e-12;
  if (i > 0) {
    if (level > rho.mass_right() * (1 + tol) + tol) fail(Errc::InsufficientMass, "right block carries less than i/n mass");
    return rho.inverse_mass(std::min(rho.mass_below(rho.gap_hi()) + level, rho.mass()));
  }
  if (-level > rho.mass_left() * (1 + tol) + tol) fail(Errc::InsufficientMass, "left block carries less than |i|/n mass");
  return rho.inverse_mass(std::max(rho.mass_below(rho.gap_lo()) + level, 0.0), true);
}

DensityProfile symmetric_two_block() {
  return DensityProfile({{-1.0, -1.0 / 3.0, 1.0}, {1.0 / 3.0, 1.0, 1.0}});
}

}  // namespace pk
