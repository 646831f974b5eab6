#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace latgas {

// Maximum spatial dimension handled by the fixed-size coordinate type.
inline constexpr int kMaxDim = 3;

using Coords = std::array<int, kMaxDim>;

struct Site {
  Coords c{};  // c[0] axial in [-N, N]; c[1..d-1] transverse in [0, L)
  friend bool operator==(const Site&, const Site&) = default;
};

// Bond from a site in a canonical direction. direction is 0-based:
// 0 is the axial direction, 1..d-1 the transverse torus directions.
struct Bond {
  Site from;
  int direction = 0;
};

// Cylinder {-N,...,N} x T_L^{d-1}. Immutable after construction.
class CylinderLattice {
 public:
  CylinderLattice(int d, int half_length, int transverse_size);
  // transverse_size defaults to N.
  CylinderLattice(int d, int half_length)
      : CylinderLattice(d, half_length, half_length) {}

  int dim() const { return d_; }
  int half_length() const { return N_; }
  int transverse_size() const { return L_; }
  std::size_t size() const { return size_; }
  std::size_t transverse_count() const { return transverse_count_; }

  // Row-major linear index, axial coordinate slowest. Transverse
  // coordinates are reduced mod L; axial out of range throws.
  std::size_t site_index(const Coords& coords) const;
  std::size_t site_index(const Site& s) const { return site_index(s.c); }
  Site site_at(std::size_t index) const;

  bool on_boundary(const Site& s) const { return s.c[0] == N_ || s.c[0] == -N_; }

  // Every unordered nearest-neighbor pair inside the cylinder, once.
  // Axial bonds never cross the faces; transverse bonds wrap.
  const std::vector<Bond>& bonds() const { return bonds_; }
  std::size_t bond_target(const Bond& b) const;  // index of from+e

  // Face sites: minus face first, then plus face, each in index order.
  std::vector<Site> boundary_sites() const;

  // Sup-ball of given radius around center, intersected with the
  // cylinder; transverse wrap applies. Sites are unique.
  std::vector<std::size_t> block(const Site& center, int radius) const;

 private:
  int d_;
  int N_;
  int L_;
  std::size_t size_;
  std::size_t transverse_count_;
  std::vector<Bond> bonds_;
};

}  // namespace latgas
