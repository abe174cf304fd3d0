#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pk/density.hpp"
#include "pk/error.hpp"

namespace pk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(size_t lineno, const std::string& msg) {
  fail(Errc::ParseError, "density config line " + std::to_string(lineno) + ": " + msg);
}

}  // namespace

double parse_real(const std::string& raw) {
  const std::string s = trim(raw);
  auto one = [&](const std::string& t) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      fail(Errc::ParseError, "not a number: '" + raw + "'");
    }
    if (used != t.size()) fail(Errc::ParseError, "not a number: '" + raw + "'");
    return v;
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return one(s);
  const double den = one(trim(s.substr(slash + 1)));
  if (den == 0.0) fail(Errc::ParseError, "zero denominator in '" + raw + "'");
  return one(trim(s.substr(0, slash))) / den;
}

DensityConfig read_density_config(std::istream& is) {
  DensityConfig cfg;
  std::vector<DensityPiece> pieces;
  std::optional<std::pair<double, double>> gap;
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto p = line.find('#'); p != std::string::npos) line.erase(p);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("[piece]", 0) == 0) {
      std::istringstream ss(line.substr(7));
      std::string kv;
      std::optional<double> a, b, rho;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) parse_fail(lineno, "expected key=value, got '" + kv + "'");
        const std::string k = kv.substr(0, eq);
        const double v = parse_real(kv.substr(eq + 1));
        if (k == "a") a = v;
        else if (k == "b") b = v;
        else if (k == "rho") rho = v;
        else parse_fail(lineno, "unknown piece key '" + k + "'");
      }
      if (!a || !b || !rho) parse_fail(lineno, "piece needs a, b and rho");
      pieces.push_back({*a, *b, *rho});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected key = value");
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (k == "beta") {
      cfg.beta = parse_real(v);
      if (!(*cfg.beta > 0 && *cfg.beta < 1)) parse_fail(lineno, "beta must lie in (0,1)");
    } else if (k == "target_slope") {
      cfg.target_slope = parse_real(v);
      if (!(*cfg.target_slope > 0)) parse_fail(lineno, "target_slope must be positive");
    } else if (k == "gap") {
      std::istringstream ss(v);
      std::string lo, hi;
      if (!(ss >> lo >> hi)) parse_fail(lineno, "gap needs two numbers");
      gap = std::make_pair(parse_real(lo), parse_real(hi));
    } else {
      parse_fail(lineno, "unknown key '" + k + "'");
    }
  }
  if (pieces.empty()) fail(Errc::ParseError, "density config has no [piece] lines");
  try {
    cfg.profile = DensityProfile(std::move(pieces), gap);
  } catch (const Error& e) {
    fail(Errc::ParseError, std::string("invalid density: ") + e.what());
  }
  return cfg;
}

void write_density_config(std::ostream& os, const DensityConfig& cfg) {
  os << std::setprecision(17);
  if (cfg.beta) os << "beta = " << *cfg.beta << "\n";
  if (cfg.target_slope) os << "target_slope = " << *cfg.target_slope << "\n";
  if (cfg.profile.gap_marked()) os << "gap = " << cfg.profile.gap_lo() << " " << cfg.profile.gap_hi() << "\n";
  for (const auto& p : cfg.profile.pieces()) os << "[piece] a=" << p.a << " b=" << p.b << " rho=" << p.rho << "\n";
}

}  // namespace pk
