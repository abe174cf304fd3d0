#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pk/error.hpp"
#include "pk/lattice.hpp"

namespace pk {

namespace {

constexpr const char* kDomainHeader = "pk-domain";
constexpr const char* kTilingHeader = "pk-tiling";
constexpr int kFormatVersion = 1;

// Next non-empty, non-comment line; false at EOF.
bool next_line(std::istream& is, std::string& line, size_t& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    auto p = line.find('#');
    if (p != std::string::npos) line.erase(p);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

void read_header(std::istream& is, const char* want, size_t& lineno) {
  std::string line;
  if (!next_line(is, line, lineno)) fail(Errc::ParseError, std::string("missing ") + want + " header");
  std::istringstream ss(line);
  std::string tag;
  int version = 0;
  if (!(ss >> tag >> version) || tag != want)
    fail(Errc::ParseError, std::string("expected header '") + want + " <version>'");
  if (version != kFormatVersion)
    fail(Errc::ParseError, "unsupported format version " + std::to_string(version));
}

[[noreturn]] void bad_line(size_t lineno, const std::string& line) {
  fail(Errc::ParseError, "line " + std::to_string(lineno) + ": cannot parse '" + line + "'");
}

}  // namespace

void write_domain(std::ostream& os, const LatticeDomain& d) {
  os << kDomainHeader << " " << kFormatVersion << "\n";
  for (const auto& f : d.faces()) os << f.x << " " << f.t << " " << (f.o == Orient::U ? 'U' : 'D') << "\n";
}

LatticeDomain read_domain(std::istream& is) {
  size_t lineno = 0;
  read_header(is, kDomainHeader, lineno);
  std::vector<Face> faces;
  std::string line;
  while (next_line(is, line, lineno)) {
    std::istringstream ss(line);
    Face f;
    std::string o, extra;
    if (!(ss >> f.x >> f.t >> o) || (ss >> extra) || (o != "U" && o != "D")) bad_line(lineno, line);
    f.o = o == "U" ? Orient::U : Orient::D;
    faces.push_back(f);
  }
  return LatticeDomain::from_faces(std::move(faces));
}

void write_tiling(std::ostream& os, const Tiling& t) {
  os << kTilingHeader << " " << kFormatVersion << "\n";
  for (const auto& l : t.lozenges) os << l.anchor.x << " " << l.anchor.t << " " << l.type << "\n";
}

Tiling read_tiling(std::istream& is) {
  size_t lineno = 0;
  read_header(is, kTilingHeader, lineno);
  Tiling t;
  std::string line;
  while (next_line(is, line, lineno)) {
    std::istringstream ss(line);
    Lozenge l;
    std::string extra;
    if (!(ss >> l.anchor.x >> l.anchor.t >> l.type) || (ss >> extra) || l.type < 1 || l.type > 3)
      bad_line(lineno, line);
    t.lozenges.push_back(l);
  }
  std::sort(t.lozenges.begin(), t.lozenges.end());
  return t;
}

}  // namespace pk
