#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "latgas/lattice.hpp"

namespace latgas {

// Occupation variables eta(x) in {0,1}, indexed like the lattice.
struct Configuration {
  std::vector<std::uint8_t> occ;

  static Configuration empty(const CylinderLattice& lattice) {
    return {std::vector<std::uint8_t>(lattice.size(), 0)};
  }
  static Configuration full(const CylinderLattice& lattice) {
    return {std::vector<std::uint8_t>(lattice.size(), 1)};
  }

  std::size_t particle_count() const {
    return std::accumulate(occ.begin(), occ.end(), std::size_t{0});
  }
};

}  // namespace latgas
