// Lattice geometry: tilings, heights and path ensembles.

#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "pk/error.hpp"
#include "pk/lattice.hpp"

using namespace pk;

namespace {

std::shared_ptr<const LatticeDomain> share(LatticeDomain d) { return std::make_shared<const LatticeDomain>(std::move(d)); }

// Boundary values of a height function, rotated to start at the cycle's
// lexicographically smallest vertex.
std::vector<int64_t> boundary_values(const HeightFunction& h) {
  std::vector<int64_t> out;
  for (const auto& v : h.domain->boundary()) out.push_back(h.at(v));
  const int64_t m = *std::min_element(out.begin(), out.end());
  for (auto& x : out) x -= m;
  return out;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<Errc>(0);
}

}  // namespace

TEST_CASE("hexagon tiling counts match MacMahon") {
  CHECK(enumerate_tilings(hexagon(1, 1, 1)).size() == 2);
  CHECK(enumerate_tilings(hexagon(2, 2, 2)).size() == 20);
  // prod (i+j+k-1)/(i+j+k-2) over the 1x2x3 box = 10.
  CHECK(enumerate_tilings(hexagon(1, 2, 3)).size() == 10);
  CHECK(enumerate_tilings(hexagon(2, 2, 3)).size() == 50);
}

TEST_CASE("boundary height is the same for every tiling") {
  auto dom = share(hexagon(2, 2, 2));
  const auto tilings = enumerate_tilings(*dom);
  const auto bh = boundary_height(*dom);
  const auto ref = boundary_values(canonical_height(height_from_tiling(dom, tilings.front(), dom->boundary()[0], 0)));
  for (const auto& t : tilings) {
    const auto h = canonical_height(height_from_tiling(dom, t, dom->boundary()[0], 5));
    CHECK(boundary_values(h) == ref);
    for (size_t k = 0; k < bh.cycle.size(); ++k) CHECK(h.at(bh.cycle[k]) == bh.values[k]);
  }
}

TEST_CASE("tiling <-> height <-> paths round trips") {
  for (auto [a, b, c] : {std::tuple{1, 1, 1}, {2, 2, 2}, {1, 2, 3}, {2, 3, 1}}) {
    auto dom = share(hexagon(a, b, c));
    for (const auto& t : enumerate_tilings(*dom)) {
      validate_tiling(*dom, t);
      const auto h = height_from_tiling(dom, t, dom->boundary()[0], 0);
      CHECK(tiling_from_height(h) == t);
      const auto e = paths_from_height(h);
      validate_ensemble(e);
      CHECK(static_cast<int>(e.paths.size()) == a);
      CHECK(tiling_from_paths(e, *dom) == t);
      // Anchoring elsewhere only shifts the height.
      const auto h2 = height_from_tiling(dom, t, dom->vertices().back(), 0);
      CHECK(canonical_height(h2) == canonical_height(h));
    }
  }
}

TEST_CASE("every height increment is admissible") {
  auto dom = share(hexagon(2, 2, 3));
  for (const auto& t : enumerate_tilings(*dom)) {
    const auto h = height_from_tiling(dom, t, dom->boundary()[0], 0);
    for (size_t i = 0; i < dom->vertices().size(); ++i)
      for (int d = 0; d < 6; ++d) {
        const int64_t j = dom->neighbour(i, d);
        if (j >= 0) CHECK(admissible_increment(d, h.values[static_cast<size_t>(j)] - h.values[i]));
      }
  }
  CHECK(admissible_increment(kE, 0));
  CHECK(admissible_increment(kE, 1));
  CHECK_FALSE(admissible_increment(kE, 2));
  CHECK(admissible_increment(kN, -1));
  CHECK_FALSE(admissible_increment(kN, 1));
  CHECK(admissible_increment(kW, -1));
}

TEST_CASE("path jumps sit exactly on type-2 lozenges") {
  auto dom = share(hexagon(2, 3, 2));
  for (const auto& t : enumerate_tilings(*dom)) {
    std::set<Vertex> type2;
    for (const auto& l : t.lozenges)
      if (l.type == 2) type2.insert(l.anchor);
    std::set<Vertex> jumps;
    const auto e = paths_from_height(height_from_tiling(dom, t, dom->boundary()[0], 0));
    for (const auto& p : e.paths)
      for (const auto& s : p.segments)
        for (size_t k = 0; k + 1 < s.pos.size(); ++k)
          if (s.pos[k + 1] == s.pos[k] + 1) jumps.insert({s.pos[k], s.t0 + static_cast<int64_t>(k)});
    CHECK(jumps == type2);
  }
}

TEST_CASE("random tilings of a 1x2x3 hexagon round-trip") {
  auto dom = share(hexagon(1, 2, 3));
  const auto all = enumerate_tilings(*dom);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const auto& t = all[rng() % all.size()];
    const auto h = height_from_tiling(dom, t, dom->vertices()[rng() % dom->vertices().size()], 3);
    CHECK(tiling_from_paths(paths_from_height(h), *dom) == t);
  }
}

TEST_CASE("a domain tiled only by type-1 lozenges has no paths") {
  auto dom = share(LatticeDomain::from_faces({Face{0, 0, Orient::D}, Face{0, 1, Orient::U}}));
  const auto tilings = enumerate_tilings(*dom);
  REQUIRE(tilings.size() == 1);
  CHECK(tilings[0].lozenges[0].type == 1);
  const auto e = paths_from_height(height_from_tiling(dom, tilings[0], dom->boundary()[0], 0));
  CHECK(e.paths.empty());
}

TEST_CASE("paths with partial time spans round-trip on cut-out domains") {
  // Sub-domains made of the lozenges of a 3x3x3 tiling below a diagonal cut;
  // paths then enter and leave through the cut at different times.
  const auto all = enumerate_tilings(hexagon(3, 3, 3));
  REQUIRE(all.size() == 980);
  int checked = 0, partial = 0;
  for (size_t k = 0; k < all.size(); k += 7)
    for (int64_t K = 3; K <= 9; ++K) {
      std::vector<Face> faces;
      Tiling sub;
      for (const auto& l : all[k].lozenges) {
        if (l.anchor.x + l.anchor.t > K) continue;
        sub.lozenges.push_back(l);
        auto [fa, fb] = l.faces();
        faces.push_back(fa);
        faces.push_back(fb);
      }
      if (faces.empty()) continue;
      std::shared_ptr<const LatticeDomain> dom;
      try {
        dom = share(LatticeDomain::from_faces(faces));
      } catch (const Error&) {
        continue;  // cut left a pinched or disconnected region
      }
      validate_tiling(*dom, sub);
      const auto h = height_from_tiling(dom, sub, dom->boundary()[0], 0);
      const auto e = paths_from_height(h);
      validate_ensemble(e);
      CHECK(tiling_from_paths(e, *dom) == sub);
      CHECK(tiling_from_height(h) == sub);
      int64_t lo = kPosInf, hi = kNegInf;
      for (const auto& p : e.paths)
        for (const auto& sg : p.segments) {
          lo = std::min(lo, sg.t0);
          hi = std::max(hi, sg.t1());
        }
      for (const auto& p : e.paths)
        if (p.segments.front().t0 != lo || p.segments.back().t1() != hi) {
          ++partial;
          break;
        }
      ++checked;
    }
  CHECK(checked > 100);
  CHECK(partial > 20);
}

TEST_CASE("error conditions") {
  // Two U faces with no D partner: not tileable.
  const auto two_u = LatticeDomain::from_faces({Face{0, 0, Orient::U}, Face{1, 0, Orient::D}, Face{1, 0, Orient::U}});
  CHECK(code_of([&] { boundary_height(two_u); }) == Errc::NotTileable);
  CHECK_FALSE(find_tiling(two_u).has_value());
  CHECK(code_of([] { LatticeDomain::from_faces({}); }) == Errc::InvalidDomain);
  CHECK(code_of([] { LatticeDomain::from_faces({Face{0, 0, Orient::U}, Face{5, 5, Orient::U}}); }) ==
        Errc::InvalidDomain);
  auto dom = share(hexagon(1, 1, 1));
  Tiling bad = enumerate_tilings(*dom)[0];
  bad.lozenges.pop_back();
  CHECK(code_of([&] { validate_tiling(*dom, bad); }) == Errc::InvalidTiling);
  CHECK(code_of([&] { height_from_tiling(dom, enumerate_tilings(*dom)[0], Vertex{50, 50}, 0); }) ==
        Errc::AnchorOutsideDomain);
  PathEnsemble crossing;
  crossing.paths = {Path{0, {PathSegment{0, {0, 1}}}}, Path{1, {PathSegment{0, {1, 1}}}}};
  CHECK(code_of([&] { validate_ensemble(crossing); }) == Errc::InvalidArgument);
  PathEnsemble jump2;
  jump2.paths = {Path{0, {PathSegment{0, {0, 2}}}}};
  CHECK(code_of([&] { validate_ensemble(jump2); }) == Errc::InvalidArgument);
  CHECK(code_of([] { validate_config(ParticleConfig{0, 1, {3, 2}}); }) == Errc::InvalidArgument);
}

TEST_CASE("text formats round-trip") {
  const auto dom = hexagon(2, 1, 2);
  std::stringstream ds;
  write_domain(ds, dom);
  const auto dom2 = read_domain(ds);
  CHECK(dom2.faces() == dom.faces());
  for (const auto& t : enumerate_tilings(dom)) {
    std::stringstream ts;
    write_tiling(ts, t);
    CHECK(read_tiling(ts) == t);
  }
  std::stringstream junk("not a domain");
  CHECK(code_of([&] { read_domain(junk); }) == Errc::ParseError);
}
