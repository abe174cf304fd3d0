#include "pk/lattice.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "pk/error.hpp"

namespace pk {

namespace {

std::string str(const Vertex& v) {
  std::ostringstream os;
  os << "(" << v.x << "," << v.t << ")";
  return os.str();
}

// Counter-clockwise vertex triple of a face.
std::array<Vertex, 3> ccw(const Face& f) {
  if (f.o == Orient::U) return {Vertex{f.x, f.t}, Vertex{f.x + 1, f.t}, Vertex{f.x + 1, f.t + 1}};
  return {Vertex{f.x, f.t}, Vertex{f.x + 1, f.t + 1}, Vertex{f.x, f.t + 1}};
}

// The two faces on either side of the edge v -> v + dir (dir in E, N, NE).
std::pair<Face, Face> faces_of_edge(const Vertex& v, int dir) {
  switch (dir) {
    case kE: return {Face{v.x, v.t, Orient::U}, Face{v.x, v.t - 1, Orient::D}};
    case kN: return {Face{v.x, v.t, Orient::D}, Face{v.x - 1, v.t, Orient::U}};
    default: return {Face{v.x, v.t, Orient::U}, Face{v.x, v.t, Orient::D}};
  }
}

// Canonical (forward-direction) representation of an undirected edge.
struct EdgeKey {
  Vertex v;
  int dir;  // kE, kN or kNE
  bool operator==(const EdgeKey& o) const { return v == o.v && dir == o.dir; }
};
struct EdgeHash {
  size_t operator()(const EdgeKey& e) const noexcept { return VertexHash()(e.v) * 3 + e.dir; }
};

EdgeKey interior_edge(const Lozenge& l) {
  const Vertex a = l.anchor;
  switch (l.type) {
    case 1: return {Vertex{a.x, a.t + 1}, kE};
    case 2: return {Vertex{a.x + 1, a.t}, kN};
    default: return {a, kNE};
  }
}

int64_t increment(int dir, bool interior) {
  switch (dir) {
    case kE: return interior ? 0 : 1;
    case kN: return interior ? -1 : 0;
    default: return interior ? 1 : 0;
  }
}

// Neighbouring faces across each edge, as lozenges pairing them.
std::array<Lozenge, 3> lozenges_with(const Face& f) {
  if (f.o == Orient::U)
    return {Lozenge{{f.x, f.t - 1}, 1}, Lozenge{{f.x, f.t}, 2}, Lozenge{{f.x, f.t}, 3}};
  return {Lozenge{{f.x, f.t}, 1}, Lozenge{{f.x - 1, f.t}, 2}, Lozenge{{f.x, f.t}, 3}};
}

Face partner(const Lozenge& l, const Face& f) {
  auto [a, b] = l.faces();
  return a == f ? b : a;
}

}  // namespace

std::vector<Vertex> Face::vertices() const {
  auto c = ccw(*this);
  return {c.begin(), c.end()};
}

std::pair<Face, Face> Lozenge::faces() const {
  const Vertex a = anchor;
  switch (type) {
    case 1: return {Face{a.x, a.t, Orient::D}, Face{a.x, a.t + 1, Orient::U}};
    case 2: return {Face{a.x, a.t, Orient::U}, Face{a.x + 1, a.t, Orient::D}};
    case 3: return {Face{a.x, a.t, Orient::U}, Face{a.x, a.t, Orient::D}};
  }
  fail(Errc::InvalidTiling, "lozenge type must be 1, 2 or 3");
}

LatticeDomain LatticeDomain::from_faces(std::vector<Face> faces) {
  if (faces.empty()) fail(Errc::InvalidDomain, "domain has no faces");
  std::sort(faces.begin(), faces.end());
  if (std::adjacent_find(faces.begin(), faces.end()) != faces.end())
    fail(Errc::InvalidDomain, "duplicate face");

  LatticeDomain d;
  d.faces_ = std::move(faces);
  for (size_t i = 0; i < d.faces_.size(); ++i) d.face_index_[d.faces_[i]] = i;

  std::set<Vertex> vs;
  for (const auto& f : d.faces_)
    for (const auto& v : ccw(f)) vs.insert(v);
  d.vertices_.assign(vs.begin(), vs.end());
  for (size_t i = 0; i < d.vertices_.size(); ++i) d.vertex_index_[d.vertices_[i]] = i;

  // Face connectivity through shared edges.
  {
    std::vector<bool> seen(d.faces_.size(), false);
    std::deque<size_t> q{0};
    seen[0] = true;
    size_t count = 1;
    while (!q.empty()) {
      const Face f = d.faces_[q.front()];
      q.pop_front();
      for (const auto& l : lozenges_with(f)) {
        auto it = d.face_index_.find(partner(l, f));
        if (it != d.face_index_.end() && !seen[it->second]) {
          seen[it->second] = true;
          ++count;
          q.push_back(it->second);
        }
      }
    }
    if (count != d.faces_.size()) fail(Errc::InvalidDomain, "faces are not connected");
  }

  const size_t nv = d.vertices_.size();
  d.nbr_.assign(6 * nv, -1);
  for (size_t i = 0; i < nv; ++i) {
    const Vertex v = d.vertices_[i];
    for (int dir : {kE, kN, kNE}) {
      auto [fa, fb] = faces_of_edge(v, dir);
      if (!d.contains(fa) && !d.contains(fb)) continue;
      const Vertex w{v.x + kDirDx[dir], v.t + kDirDt[dir]};
      const size_t j = d.vertex_index_.at(w);
      d.nbr_[6 * i + dir] = static_cast<int64_t>(j);
      d.nbr_[6 * j + dir + 3] = static_cast<int64_t>(i);
    }
  }

  // Boundary: directed ccw face edges whose reverse is absent.
  std::unordered_map<Vertex, std::vector<Vertex>, VertexHash> out;
  std::set<std::pair<Vertex, Vertex>> directed;
  for (const auto& f : d.faces_) {
    auto c = ccw(f);
    for (int k = 0; k < 3; ++k) directed.insert({c[k], c[(k + 1) % 3]});
  }
  size_t nb = 0;
  for (const auto& [a, b] : directed) {
    if (!directed.count({b, a})) {
      out[a].push_back(b);
      ++nb;
    }
  }
  for (const auto& [v, ws] : out)
    if (ws.size() != 1) fail(Errc::InvalidDomain, "boundary pinches at vertex " + str(v));
  Vertex start = out.begin()->first;
  for (const auto& kv : out) start = std::min(start, kv.first);
  Vertex cur = start;
  do {
    d.boundary_.push_back(cur);
    cur = out.at(cur).front();
  } while (cur != start && d.boundary_.size() <= nb);
  if (d.boundary_.size() != nb)
    fail(Errc::InvalidDomain, "boundary is not a single cycle (domain not simply connected)");
  d.on_boundary_.assign(nv, false);
  for (const auto& v : d.boundary_) d.on_boundary_[d.vertex_index_.at(v)] = true;
  return d;
}

std::optional<size_t> LatticeDomain::vertex_index(const Vertex& v) const {
  auto it = vertex_index_.find(v);
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

size_t LatticeDomain::num_u_faces() const {
  return static_cast<size_t>(
      std::count_if(faces_.begin(), faces_.end(), [](const Face& f) { return f.o == Orient::U; }));
}

LatticeDomain hexagon(int64_t a, int64_t b, int64_t c) {
  if (a < 1 || b < 0 || c < 0 || b + c < 1) fail(Errc::InvalidArgument, "hexagon sides must be positive");
  std::vector<Face> faces;
  // Centroids scaled by 3: U at (3x+2, 3t+1), D at (3x+1, 3t+2).
  auto inside = [&](int64_t X, int64_t T) {
    return T > 0 && T < 3 * (b + c) && X > 0 && X < 3 * (a + c) && X - T > -3 * b && X - T < 3 * a;
  };
  for (int64_t t = 0; t < b + c; ++t)
    for (int64_t x = 0; x < a + c; ++x) {
      if (inside(3 * x + 2, 3 * t + 1)) faces.push_back({x, t, Orient::U});
      if (inside(3 * x + 1, 3 * t + 2)) faces.push_back({x, t, Orient::D});
    }
  return LatticeDomain::from_faces(std::move(faces));
}

void validate_tiling(const LatticeDomain& domain, const Tiling& tiling) {
  std::unordered_set<Face, FaceHash> used;
  for (const auto& l : tiling.lozenges) {
    if (l.type < 1 || l.type > 3) fail(Errc::InvalidTiling, "lozenge type must be 1, 2 or 3");
    auto [fa, fb] = l.faces();
    for (const auto& f : {fa, fb}) {
      if (!domain.contains(f)) fail(Errc::InvalidTiling, "lozenge at " + str(l.anchor) + " leaves the domain");
      if (!used.insert(f).second) fail(Errc::InvalidTiling, "lozenges overlap at " + str(l.anchor));
    }
  }
  if (used.size() != domain.faces().size()) fail(Errc::InvalidTiling, "faces not perfectly matched");
}

int64_t HeightFunction::at(const Vertex& v) const {
  auto i = domain->vertex_index(v);
  if (!i) fail(Errc::AnchorOutsideDomain, "vertex " + str(v) + " not in domain");
  return values[*i];
}

bool admissible_increment(int dir, int64_t dh) {
  switch (dir) {
    case kE: return dh == 0 || dh == 1;
    case kN: return dh == 0 || dh == -1;
    case kNE: return dh == 0 || dh == 1;
    case kW: return dh == 0 || dh == -1;
    case kS: return dh == 0 || dh == 1;
    case kSW: return dh == 0 || dh == -1;
  }
  return false;
}

HeightFunction height_from_tiling(std::shared_ptr<const LatticeDomain> domain, const Tiling& tiling,
                                  const Vertex& anchor, int64_t h0) {
  validate_tiling(*domain, tiling);
  auto ai = domain->vertex_index(anchor);
  if (!ai) fail(Errc::AnchorOutsideDomain, "anchor " + str(anchor) + " not in domain");
  std::unordered_set<EdgeKey, EdgeHash> interior;
  for (const auto& l : tiling.lozenges) interior.insert(interior_edge(l));

  const auto& vs = domain->vertices();
  HeightFunction h{domain, std::vector<int64_t>(vs.size(), 0)};
  std::vector<bool> seen(vs.size(), false);
  std::deque<size_t> q{*ai};
  seen[*ai] = true;
  h.values[*ai] = h0;
  while (!q.empty()) {
    const size_t i = q.front();
    q.pop_front();
    for (int dir = 0; dir < 6; ++dir) {
      const int64_t j = domain->neighbour(i, dir);
      if (j < 0) continue;
      const bool fwd = dir < 3;
      const Vertex base = fwd ? vs[i] : vs[j];
      const int fdir = fwd ? dir : dir - 3;
      const int64_t inc = increment(fdir, interior.count({base, fdir}) != 0);
      const int64_t val = h.values[i] + (fwd ? inc : -inc);
      if (!seen[j]) {
        seen[j] = true;
        h.values[j] = val;
        q.push_back(static_cast<size_t>(j));
      } else if (h.values[j] != val) {
        fail(Errc::InvalidTiling, "inconsistent height at " + str(vs[j]));
      }
    }
  }
  return h;
}

HeightFunction canonical_height(HeightFunction h) {
  const auto& d = *h.domain;
  int64_t mn = kPosInf;
  for (size_t i = 0; i < h.values.size(); ++i)
    if (d.on_boundary(i)) mn = std::min(mn, h.values[i]);
  for (auto& v : h.values) v -= mn;
  return h;
}

Tiling tiling_from_height(const HeightFunction& height) {
  const auto& d = *height.domain;
  const auto& vs = d.vertices();
  for (size_t i = 0; i < vs.size(); ++i)
    for (int dir : {kE, kN, kNE}) {
      const int64_t j = d.neighbour(i, dir);
      if (j >= 0 && !admissible_increment(dir, height.values[j] - height.values[i])) {
        std::ostringstream os;
        os << "step rule violated on edge " << str(vs[i]) << "->" << str(vs[j]);
        fail(Errc::StepRuleViolation, os.str());
      }
    }
  Tiling t;
  for (const auto& f : d.faces()) {
    if (f.o != Orient::U) continue;
    const int64_t h00 = height.at({f.x, f.t});
    const int64_t h10 = height.at({f.x + 1, f.t});
    const int64_t h11 = height.at({f.x + 1, f.t + 1});
    Lozenge l;
    if (h10 - h00 == 0 && h11 - h10 == 0) l = {{f.x, f.t - 1}, 1};
    else if (h10 - h00 == 1 && h11 - h10 == -1) l = {{f.x, f.t}, 2};
    else if (h10 - h00 == 1 && h11 - h10 == 0) l = {{f.x, f.t}, 3};
    else fail(Errc::StepRuleViolation, "face at " + str({f.x, f.t}) + " has no consistent lozenge");
    auto [fa, fb] = l.faces();
    if (!d.contains(fa) || !d.contains(fb))
      fail(Errc::StepRuleViolation, "height forces a lozenge leaving the domain at " + str(l.anchor));
    t.lozenges.push_back(l);
  }
  std::sort(t.lozenges.begin(), t.lozenges.end());
  try {
    validate_tiling(d, t);
  } catch (const Error& e) {
    fail(Errc::StepRuleViolation, std::string("height does not define a tiling: ") + e.what());
  }
  return t;
}

std::optional<int64_t> Path::at(int64_t t) const {
  for (const auto& s : segments)
    if (t >= s.t0 && t <= s.t1()) return s.pos[static_cast<size_t>(t - s.t0)];
  return std::nullopt;
}

void validate_ensemble(const PathEnsemble& e) {
  for (size_t k = 0; k < e.paths.size(); ++k) {
    const auto& p = e.paths[k];
    if (k > 0 && e.paths[k - 1].label >= p.label) fail(Errc::InvalidArgument, "labels not increasing");
    for (const auto& s : p.segments)
      for (size_t j = 1; j < s.pos.size(); ++j) {
        const int64_t step = s.pos[j] - s.pos[j - 1];
        if (step != 0 && step != 1) fail(Errc::InvalidArgument, "non-Bernoulli step");
      }
  }
  // Non-intersection at shared times: b_i - i <= b_j - j for i < j.
  std::map<int64_t, std::vector<std::pair<int64_t, int64_t>>> by_time;
  for (const auto& p : e.paths)
    for (const auto& s : p.segments)
      for (size_t j = 0; j < s.pos.size(); ++j)
        by_time[s.t0 + static_cast<int64_t>(j)].push_back({p.label, s.pos[j]});
  for (auto& [t, v] : by_time) {
    std::sort(v.begin(), v.end());
    for (size_t j = 1; j < v.size(); ++j) {
      if (v[j].first == v[j - 1].first) continue;  // disjoint pieces of one level
      if (v[j - 1].second - v[j - 1].first > v[j].second - v[j].first)
        fail(Errc::InvalidArgument, "paths intersect at time " + std::to_string(t));
    }
  }
}

PathEnsemble paths_from_height(const HeightFunction& height) {
  const auto& d = *height.domain;
  const auto& vs = d.vertices();
  // Particle edges with no face below start a segment.
  std::map<int64_t, std::vector<PathSegment>> by_level;
  for (size_t i = 0; i < vs.size(); ++i) {
    const int64_t j = d.neighbour(i, kE);
    if (j < 0 || height.values[j] - height.values[i] != 1) continue;
    const Vertex v = vs[i];
    if (d.contains(Face{v.x, v.t - 1, Orient::D})) continue;
    PathSegment seg{v.t, {v.x}};
    int64_t x = v.x, t = v.t;
    while (d.contains(Face{x, t, Orient::U})) {
      const bool jump = height.at({x + 1, t + 1}) - height.at({x + 1, t}) == -1;
      x += jump ? 1 : 0;
      ++t;
      seg.pos.push_back(x);
    }
    by_level[height.values[i]].push_back(std::move(seg));
  }
  PathEnsemble e;
  if (by_level.empty()) return e;
  int64_t tmin = kPosInf;
  for (const auto& [lvl, segs] : by_level)
    for (const auto& s : segs) tmin = std::min(tmin, s.t0);
  int64_t offset = kPosInf;
  for (const auto& [lvl, segs] : by_level)
    for (const auto& s : segs)
      if (s.t0 <= tmin && tmin <= s.t1()) offset = std::min(offset, lvl);
  for (auto& [lvl, segs] : by_level) {
    std::sort(segs.begin(), segs.end(), [](const PathSegment& a, const PathSegment& b) {
      return a.t0 != b.t0 ? a.t0 < b.t0 : a.pos.front() < b.pos.front();
    });
    e.paths.push_back(Path{lvl - offset, std::move(segs)});
  }
  return e;
}

Tiling tiling_from_paths(const PathEnsemble& ensemble, const LatticeDomain& domain) {
  std::unordered_set<Face, FaceHash> used;
  Tiling t;
  auto place = [&](const Lozenge& l) {
    auto [fa, fb] = l.faces();
    for (const auto& f : {fa, fb}) {
      if (!domain.contains(f)) fail(Errc::InconsistentPaths, "path leaves the domain at " + str(l.anchor));
      if (!used.insert(f).second) fail(Errc::InconsistentPaths, "paths overlap at " + str(l.anchor));
    }
    t.lozenges.push_back(l);
  };
  for (const auto& p : ensemble.paths)
    for (const auto& s : p.segments) {
      if (domain.contains(Face{s.pos.front(), s.t0 - 1, Orient::D}))
        fail(Errc::InconsistentPaths, "segment starts inside the domain");
      if (domain.contains(Face{s.pos.back(), s.t1(), Orient::U}))
        fail(Errc::InconsistentPaths, "segment ends inside the domain");
      for (size_t j = 0; j + 1 < s.pos.size(); ++j) {
        const int64_t tt = s.t0 + static_cast<int64_t>(j);
        const int64_t step = s.pos[j + 1] - s.pos[j];
        if (step != 0 && step != 1) fail(Errc::InconsistentPaths, "non-Bernoulli step");
        place(Lozenge{{s.pos[j], tt}, step == 1 ? 2 : 3});
      }
    }
  for (const auto& f : domain.faces()) {
    if (f.o != Orient::D || used.count(f)) continue;
    place(Lozenge{{f.x, f.t}, 1});
  }
  if (used.size() != domain.faces().size()) fail(Errc::InconsistentPaths, "uncovered faces remain");
  std::sort(t.lozenges.begin(), t.lozenges.end());
  return t;
}

std::optional<Tiling> find_tiling(const LatticeDomain& domain) {
  const auto& faces = domain.faces();
  std::vector<size_t> us, ds;
  std::unordered_map<Face, size_t, FaceHash> dpos;
  for (size_t i = 0; i < faces.size(); ++i) {
    if (faces[i].o == Orient::U) us.push_back(i);
    else {
      dpos[faces[i]] = ds.size();
      ds.push_back(i);
    }
  }
  if (us.size() != ds.size()) return std::nullopt;
  // adjacency: U index -> list of (D index, lozenge)
  std::vector<std::vector<std::pair<size_t, Lozenge>>> adj(us.size());
  for (size_t k = 0; k < us.size(); ++k) {
    const Face f = faces[us[k]];
    for (const auto& l : lozenges_with(f)) {
      auto it = dpos.find(partner(l, f));
      if (it != dpos.end()) adj[k].push_back({it->second, l});
    }
  }
  const size_t n = us.size();
  std::vector<int64_t> match_d(n, -1), match_u(n, -1);
  // Kuhn's augmenting paths, iterative DFS.
  for (size_t root = 0; root < n; ++root) {
    std::vector<int64_t> parent_d(n, -2);  // D node -> U node it was reached from
    std::vector<size_t> stack{root};
    std::vector<size_t> iter(n, 0);
    int64_t found = -1;
    while (!stack.empty() && found < 0) {
      const size_t u = stack.back();
      if (iter[u] >= adj[u].size()) {
        stack.pop_back();
        continue;
      }
      const size_t dd = adj[u][iter[u]++].first;
      if (parent_d[dd] != -2) continue;
      parent_d[dd] = static_cast<int64_t>(u);
      if (match_d[dd] < 0) found = static_cast<int64_t>(dd);
      else stack.push_back(static_cast<size_t>(match_d[dd]));
    }
    if (found < 0) return std::nullopt;
    // Flip along the path.
    int64_t dd = found;
    while (dd >= 0) {
      const size_t u = static_cast<size_t>(parent_d[dd]);
      const int64_t prev = match_u[u];
      match_u[u] = dd;
      match_d[dd] = static_cast<int64_t>(u);
      dd = prev;
    }
  }
  Tiling t;
  for (size_t k = 0; k < n; ++k)
    for (const auto& [dd, l] : adj[k])
      if (static_cast<int64_t>(dd) == match_u[k]) {
        t.lozenges.push_back(l);
        break;
      }
  std::sort(t.lozenges.begin(), t.lozenges.end());
  return t;
}

std::vector<Tiling> enumerate_tilings(const LatticeDomain& domain, size_t limit) {
  const auto& faces = domain.faces();
  std::vector<bool> covered(faces.size(), false);
  std::unordered_map<Face, size_t, FaceHash> idx;
  for (size_t i = 0; i < faces.size(); ++i) idx[faces[i]] = i;
  std::vector<Tiling> out;
  std::vector<Lozenge> cur;
  std::function<void(size_t)> rec = [&](size_t from) {
    while (from < faces.size() && covered[from]) ++from;
    if (from == faces.size()) {
      Tiling t{cur};
      std::sort(t.lozenges.begin(), t.lozenges.end());
      out.push_back(std::move(t));
      if (out.size() > limit) fail(Errc::TooLarge, "too many tilings");
      return;
    }
    const Face f = faces[from];
    for (const auto& l : lozenges_with(f)) {
      auto it = idx.find(partner(l, f));
      if (it == idx.end() || covered[it->second]) continue;
      covered[from] = covered[it->second] = true;
      cur.push_back(l);
      rec(from + 1);
      cur.pop_back();
      covered[from] = covered[it->second] = false;
    }
  };
  rec(0);
  std::sort(out.begin(), out.end(),
            [](const Tiling& a, const Tiling& b) { return a.lozenges < b.lozenges; });
  return out;
}

BoundaryHeight boundary_height(const LatticeDomain& domain) {
  BoundaryHeight bh;
  bh.cycle = domain.boundary();
  const size_t m = bh.cycle.size();
  bh.values.resize(m);
  int64_t h = 0;
  for (size_t k = 0; k < m; ++k) {
    bh.values[k] = h;
    const Vertex a = bh.cycle[k], b = bh.cycle[(k + 1) % m];
    if (b.t == a.t) h += b.x - a.x;  // slope-0 edges grow at rate 1
  }
  if (h != 0) fail(Errc::NotTileable, "boundary height does not close (winding increment " + std::to_string(h) + ")");
  if (2 * domain.num_u_faces() != domain.faces().size())
    fail(Errc::NotTileable, "unequal numbers of up and down faces");
  if (!find_tiling(domain)) fail(Errc::NotTileable, "no perfect matching of faces");
  const int64_t mn = *std::min_element(bh.values.begin(), bh.values.end());
  for (auto& v : bh.values) v -= mn;
  return bh;
}

ParticleConfig make_config(std::vector<int64_t> pos, int64_t M) {
  ParticleConfig c;
  c.M = M;
  c.N = static_cast<int64_t>(pos.size()) - 1 - M;
  c.pos = std::move(pos);
  validate_config(c);
  return c;
}

void validate_config(const ParticleConfig& c) {
  if (c.N + c.M + 1 != static_cast<int64_t>(c.pos.size()))
    fail(Errc::InvalidArgument, "label range -M..N does not match the number of positions");
  for (size_t i = 1; i < c.pos.size(); ++i)
    if (c.pos[i] <= c.pos[i - 1]) fail(Errc::InvalidArgument, "particle positions must be strictly increasing");
}

}  // namespace pk
