#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "latgas/lattice.hpp"

using namespace latgas;

TEST_CASE("site indexing examples") {
  CHECK(CylinderLattice(1, 2).site_index(Coords{-2, 0, 0}) == 0);
  CHECK(CylinderLattice(2, 1, 1).site_index(Coords{0, 0, 0}) == 1);

  // d=3, N=2, L=2: enumerate all 20 sites in row-major order and locate.
  CylinderLattice lat(3, 2, 2);
  REQUIRE(lat.size() == 20);
  std::size_t expected = 0;
  bool found = false;
  for (int x1 = -2; x1 <= 2 && !found; ++x1)
    for (int x2 = 0; x2 < 2 && !found; ++x2)
      for (int x3 = 0; x3 < 2; ++x3) {
        if (x1 == 2 && x2 == 1 && x3 == 1) {
          found = true;
          break;
        }
        ++expected;
      }
  CHECK(lat.site_index(Coords{2, 1, 1}) == expected);
  CHECK(expected == 19);
}

TEST_CASE("site_index and site_at are inverse, with transverse wrap") {
  CylinderLattice lat(2, 3, 4);
  for (std::size_t i = 0; i < lat.size(); ++i)
    CHECK(lat.site_index(lat.site_at(i)) == i);
  CHECK(lat.site_index(Coords{1, 6, 0}) == lat.site_index(Coords{1, 2, 0}));
  CHECK(lat.site_index(Coords{1, -1, 0}) == lat.site_index(Coords{1, 3, 0}));
  CHECK_THROWS_AS((void)lat.site_index(Coords{4, 0, 0}), std::domain_error);
  CHECK_THROWS_AS((void)lat.site_index(Coords{-4, 0, 0}), std::domain_error);
}

namespace {

// Brute-force count of unordered nearest-neighbor pairs that respect the
// cylinder geometry (no axial wrap, transverse wrap mod L counted once).
std::size_t brute_force_bond_count(const CylinderLattice& lat) {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  int d = lat.dim(), L = lat.transverse_size();
  for (std::size_t i = 0; i < lat.size(); ++i) {
    Site s = lat.site_at(i);
    for (int axis = 0; axis < d; ++axis) {
      Coords c = s.c;
      c[axis] += 1;
      if (axis == 0) {
        if (c[0] > lat.half_length()) continue;
      } else {
        c[axis] = ((c[axis] % L) + L) % L;
      }
      std::size_t j = lat.site_index(c);
      if (i == j) continue;  // L == 1 degenerate torus
      pairs.insert({std::min(i, j), std::max(i, j)});
    }
  }
  return pairs.size();
}

}  // namespace

TEST_CASE("bond enumeration examples") {
  CHECK(CylinderLattice(1, 1).bonds().size() == 2);
  // 6-site cylinder: 2 axial bonds per column x 2 columns... transposed:
  // 2 columns of length 3 give 2 bonds each = 4 axial; each of the 3 rows
  // of the 2-torus has a single unordered neighbor pair = 3 transverse.
  CHECK(CylinderLattice(2, 1, 2).bonds().size() == 7);
  CHECK(CylinderLattice(3, 1, 1).bonds().size() == 2);
}

TEST_CASE("bond list matches brute-force pair enumeration and has no duplicates") {
  for (const CylinderLattice& lat :
       {CylinderLattice(1, 5), CylinderLattice(2, 2, 3), CylinderLattice(2, 1, 2),
        CylinderLattice(3, 1, 2), CylinderLattice(3, 2, 3), CylinderLattice(2, 2, 1)}) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const Bond& b : lat.bonds()) {
      std::size_t i = lat.site_index(b.from), j = lat.bond_target(b);
      CHECK(i != j);
      CHECK(seen.insert({std::min(i, j), std::max(i, j)}).second);
    }
    CHECK(lat.bonds().size() == brute_force_bond_count(lat));
  }
}

TEST_CASE("boundary sites") {
  auto faces1 = CylinderLattice(1, 3).boundary_sites();
  REQUIRE(faces1.size() == 2);
  CHECK(faces1[0].c[0] == -3);
  CHECK(faces1[1].c[0] == 3);

  CHECK(CylinderLattice(2, 2, 3).boundary_sites().size() == 6);
  CHECK(CylinderLattice(3, 1, 2).boundary_sites().size() == 8);

  CylinderLattice lat(2, 2, 3);
  auto faces = lat.boundary_sites();
  // Minus face first, then plus face, each in index order.
  for (std::size_t k = 0; k < faces.size(); ++k) {
    CHECK(faces[k].c[0] == (k < faces.size() / 2 ? -2 : 2));
    CHECK(lat.on_boundary(faces[k]));
  }
}

TEST_CASE("block examples") {
  CylinderLattice lat1(1, 2);
  auto b0 = lat1.block(Site{{0, 0, 0}}, 0);
  REQUIRE(b0.size() == 1);
  CHECK(b0[0] == lat1.site_index(Coords{0, 0, 0}));

  auto clipped = lat1.block(Site{{2, 0, 0}}, 1);
  std::sort(clipped.begin(), clipped.end());
  REQUIRE(clipped.size() == 2);
  CHECK(clipped[0] == lat1.site_index(Coords{1, 0, 0}));
  CHECK(clipped[1] == lat1.site_index(Coords{2, 0, 0}));

  CHECK(CylinderLattice(2, 2, 4).block(Site{{0, 0, 0}}, 1).size() == 9);
}

TEST_CASE("block sites are unique under tight transverse wrap") {
  CylinderLattice lat(2, 3, 2);  // radius 1 wraps onto itself when L = 2
  auto blk = lat.block(Site{{0, 0, 0}}, 1);
  std::set<std::size_t> uniq(blk.begin(), blk.end());
  CHECK(uniq.size() == blk.size());
  CHECK(blk.size() == 6);  // 3 axial x 2 distinct transverse
}
