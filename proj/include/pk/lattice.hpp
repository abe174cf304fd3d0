#pragma once
// Triangular-lattice geometry: domains, lozenge tilings, height functions and
// non-intersecting Bernoulli path ensembles, with the bijections among them.
//
// Conventions. Vertices are (x,t) in Z^2; lattice edges have directions
// (1,0), (0,1), (1,1). The two faces anchored at (x,t) are
//   U: (x,t),(x+1,t),(x+1,t+1)      D: (x,t),(x,t+1),(x+1,t+1).
// Lozenges anchored at (x,t):
//   type 1 = D(x,t) + U(x,t+1)   (interior edge horizontal)
//   type 2 = U(x,t) + D(x+1,t)   (interior edge vertical)
//   type 3 = U(x,t) + D(x,t)     (interior edge diagonal)
// Height increments along an edge u -> u+dir:
//   (1,0): 0 if interior to a type-1 lozenge, else 1
//   (0,1): -1 if interior to a type-2 lozenge, else 0
//   (1,1): 1 if interior to a type-3 lozenge, else 0
// A path particle at time t sits on every horizontal edge (x,t)-(x+1,t) that
// is not interior to a type-1 lozenge; its level is H(x,t).

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pk {

struct Vertex {
  int64_t x = 0;
  int64_t t = 0;
  auto operator<=>(const Vertex&) const = default;
};

enum class Orient : uint8_t { U = 0, D = 1 };

struct Face {
  int64_t x = 0;
  int64_t t = 0;
  Orient o = Orient::U;
  auto operator<=>(const Face&) const = default;
  std::vector<Vertex> vertices() const;
};

struct VertexHash {
  size_t operator()(const Vertex& v) const noexcept {
    return std::hash<int64_t>()(v.x * 0x9E3779B97F4A7C15ULL ^ (v.t + 0x632BE59BD9B4E019ULL));
  }
};
struct FaceHash {
  size_t operator()(const Face& f) const noexcept {
    return VertexHash()({f.x, f.t}) * 2 + static_cast<size_t>(f.o);
  }
};

// Direction indices for the six lattice neighbours of a vertex.
enum Dir : int { kE = 0, kN = 1, kNE = 2, kW = 3, kS = 4, kSW = 5 };
inline constexpr int64_t kDirDx[6] = {1, 0, 1, -1, 0, -1};
inline constexpr int64_t kDirDt[6] = {0, 1, 1, 0, -1, -1};

class LatticeDomain {
 public:
  // Validates: non-empty, no duplicates, face-connected, a single simple
  // boundary cycle (hence simply connected). Throws InvalidDomain.
  static LatticeDomain from_faces(std::vector<Face> faces);

  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  // Counter-clockwise boundary cycle; first vertex not repeated at the end.
  const std::vector<Vertex>& boundary() const { return boundary_; }

  bool contains(const Face& f) const { return face_index_.count(f) != 0; }
  std::optional<size_t> vertex_index(const Vertex& v) const;
  // Index of neighbour of vertex i in direction d if the edge lies in the
  // domain, else -1.
  int64_t neighbour(size_t i, int d) const { return nbr_[6 * i + d]; }
  bool on_boundary(size_t i) const { return on_boundary_[i]; }
  size_t num_u_faces() const;

 private:
  std::vector<Face> faces_;
  std::unordered_map<Face, size_t, FaceHash> face_index_;
  std::vector<Vertex> vertices_;
  std::unordered_map<Vertex, size_t, VertexHash> vertex_index_;
  std::vector<int64_t> nbr_;
  std::vector<bool> on_boundary_;
  std::vector<Vertex> boundary_;
};

// Hexagon with sides a (bottom, horizontal), c (lower-right diagonal) and b
// (right vertical); tiles correspond to a paths from {0..a-1} at t=0 to
// {c..c+a-1} at t=b+c.
LatticeDomain hexagon(int64_t a, int64_t b, int64_t c);

struct Lozenge {
  Vertex anchor;
  int type = 3;  // 1, 2 or 3
  auto operator<=>(const Lozenge&) const = default;
  std::pair<Face, Face> faces() const;
};

struct Tiling {
  std::vector<Lozenge> lozenges;  // sorted
  bool operator==(const Tiling&) const = default;
};

// Checks that lozenges partition the domain's faces; throws InvalidTiling.
void validate_tiling(const LatticeDomain& domain, const Tiling& tiling);

struct HeightFunction {
  std::shared_ptr<const LatticeDomain> domain;
  std::vector<int64_t> values;  // aligned with domain->vertices()
  int64_t at(const Vertex& v) const;
  bool operator==(const HeightFunction& o) const { return values == o.values; }
};

HeightFunction height_from_tiling(std::shared_ptr<const LatticeDomain> domain, const Tiling& tiling,
                                  const Vertex& anchor, int64_t h0);
// Shifts so that the minimum boundary value is 0.
HeightFunction canonical_height(HeightFunction h);
Tiling tiling_from_height(const HeightFunction& height);

// True iff dh is an allowed height increment along direction dir (E, N, NE
// or their reverses).
bool admissible_increment(int dir, int64_t dh);

// A maximal run of a path: positions pos[k] at times t0 + k.
struct PathSegment {
  int64_t t0 = 0;
  std::vector<int64_t> pos;
  int64_t t1() const { return t0 + static_cast<int64_t>(pos.size()) - 1; }
  bool operator==(const PathSegment&) const = default;
};

struct Path {
  int64_t label = 0;
  std::vector<PathSegment> segments;  // sorted by t0
  std::optional<int64_t> at(int64_t t) const;
  bool operator==(const Path&) const = default;
};

inline constexpr int64_t kNegInf = std::numeric_limits<int64_t>::min() / 4;
inline constexpr int64_t kPosInf = std::numeric_limits<int64_t>::max() / 4;

struct PathEnsemble {
  std::vector<Path> paths;  // sorted by label
  bool operator==(const PathEnsemble& o) const { return paths == o.paths; }
};

// Throws InvalidArgument describing the first violated ensemble invariant.
void validate_ensemble(const PathEnsemble& e);

PathEnsemble paths_from_height(const HeightFunction& height);
Tiling tiling_from_paths(const PathEnsemble& ensemble, const LatticeDomain& domain);

// Particle positions x_{-M} < ... < x_N; pos[i + M] holds label i.
struct ParticleConfig {
  int64_t M = 0;
  int64_t N = -1;
  std::vector<int64_t> pos;

  size_t size() const { return pos.size(); }
  int64_t at(int64_t label) const { return pos[static_cast<size_t>(label + M)]; }
  bool operator==(const ParticleConfig&) const = default;
};
// Labels 0..size-1 become -M..N with M = 0.
ParticleConfig make_config(std::vector<int64_t> pos, int64_t M = 0);
// Throws InvalidArgument unless strictly increasing with N - (-M) + 1 entries.
void validate_config(const ParticleConfig& c);

struct BoundaryHeight {
  std::vector<Vertex> cycle;
  std::vector<int64_t> values;  // aligned with cycle, min 0
};
BoundaryHeight boundary_height(const LatticeDomain& domain);

// Any tiling (via bipartite matching); nullopt if none exists.
std::optional<Tiling> find_tiling(const LatticeDomain& domain);
// Exhaustive list of tilings (sorted lexicographically). Throws TooLarge
// once more than `limit` tilings are found.
std::vector<Tiling> enumerate_tilings(const LatticeDomain& domain, size_t limit = 1000000);

// Text formats.
void write_domain(std::ostream& os, const LatticeDomain& d);
LatticeDomain read_domain(std::istream& is);
void write_tiling(std::ostream& os, const Tiling& t);
Tiling read_tiling(std::istream& is);

}  // namespace pk
