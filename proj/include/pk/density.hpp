#pragma once
// Piecewise-constant densities on the real line, with an optional marked gap
// [E_-, E_+] separating a left block from a right block.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pk {

struct DensityPiece {
  double a = 0.0;
  double b = 0.0;
  double rho = 0.0;
};

class DensityProfile {
 public:
  DensityProfile() = default;
  // Pieces are sorted here; throws InvalidArgument on overlap, a >= b, rho
  // outside (0,1], or a marked gap intersecting a piece.
  explicit DensityProfile(std::vector<DensityPiece> pieces,
                          std::optional<std::pair<double, double>> gap = std::nullopt);

  const std::vector<DensityPiece>& pieces() const { return pieces_; }
  // The marked gap, or else the widest zero-density interval between pieces.
  bool has_gap() const { return gap_.has_value(); }
  double gap_lo() const;  // E_-
  double gap_hi() const;  // E_+
  bool gap_marked() const { return gap_marked_; }

  double mass() const;
  double mass_left() const;   // mass below E_-
  double mass_right() const;  // mass above E_+
  double mass_below(double x) const;
  // inf{x : mass_below(x) >= m} for 0 < m <= mass(); sup{...}-side variant
  // via the `from_right` flag returns sup{x : mass_below(x) <= m}.
  double inverse_mass(double m, bool from_right = false) const;
  double density(double x) const;  // pieces taken half-open [a, b)
  double support_lo() const { return pieces_.front().a; }
  double support_hi() const { return pieces_.back().b; }

  DensityProfile dilated(double lambda) const;
  DensityProfile shifted(double s) const;

 private:
  std::vector<DensityPiece> pieces_;
  std::optional<std::pair<double, double>> gap_;
  bool gap_marked_ = false;
};

// Scale-1/n quantile of label i: gamma_0 = E_+, int_{E_+}^{gamma_i} rho = i/n
// for i > 0 and int_{gamma_i}^{E_-} rho = -i/n for i < 0 (sides nearest the
// gap). Throws InsufficientMass when the block cannot carry |i|/n.
double quantile_position(const DensityProfile& rho, int64_t n, int64_t i);

// Cell-average approximation of a density on [a, b] with `cells` uniform
// cells; cells with (near-)zero average are dropped.
DensityProfile piecewise_approximation(const std::function<double(double)>& rho, double a, double b, int cells);

// Config text: `key = value` lines and `[piece] a=.. b=.. rho=..` blocks.
// Keys: beta, target_slope, gap = "lo hi". Numbers may be written p/q.
struct DensityConfig {
  DensityProfile profile;
  std::optional<double> beta;
  std::optional<double> target_slope;
};
DensityConfig read_density_config(std::istream& is);
void write_density_config(std::ostream& os, const DensityConfig& cfg);
// Parses a decimal or a rational `p/q`; throws ParseError.
double parse_real(const std::string& s);

// 1 on [-1,-1/3] and [1/3,1]: the running symmetric example.
DensityProfile symmetric_two_block();

}  // namespace pk
