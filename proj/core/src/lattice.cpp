#include "latgas/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latgas {

namespace {
int mod(int a, int m) {
  int r = a % m;
  return r < 0 ? r + m : r;
}
}  // namespace

CylinderLattice::CylinderLattice(int d, int half_length, int transverse_size)
    : d_(d), N_(half_length), L_(transverse_size) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("lattice: d must be in [1,3]");
  if (N_ < 1) throw std::invalid_argument("lattice: half_length must be >= 1");
  if (L_ < 1) throw std::invalid_argument("lattice: transverse_size must be >= 1");
  transverse_count_ = 1;
  for (int j = 1; j < d_; ++j) transverse_count_ *= static_cast<std::size_t>(L_);
  size_ = static_cast<std::size_t>(2 * N_ + 1) * transverse_count_;

  // Axial bonds: one per site with c[0] < N. Transverse bonds: +e once
  // per site, except the degenerate torus L=1 (none) and L=2 where the
  // wrap pair would duplicate the straight one.
  for (std::size_t i = 0; i < size_; ++i) {
    Site s = site_at(i);
    if (s.c[0] < N_) bonds_.push_back({s, 0});
    for (int j = 1; j < d_; ++j) {
      if (L_ == 1) continue;
      if (L_ == 2 && s.c[j] == 1) continue;
      bonds_.push_back({s, j});
    }
  }
}

std::size_t CylinderLattice::site_index(const Coords& coords) const {
  if (coords[0] < -N_ || coords[0] > N_)
    throw std::domain_error("lattice: axial coordinate out of [-N, N]");
  std::size_t idx = static_cast<std::size_t>(coords[0] + N_);
  for (int j = 1; j < d_; ++j)
    idx = idx * static_cast<std::size_t>(L_) + static_cast<std::size_t>(mod(coords[j], L_));
  return idx;
}

Site CylinderLattice::site_at(std::size_t index) const {
  Site s;
  for (int j = d_ - 1; j >= 1; --j) {
    s.c[j] = static_cast<int>(index % static_cast<std::size_t>(L_));
    index /= static_cast<std::size_t>(L_);
  }
  s.c[0] = static_cast<int>(index) - N_;
  return s;
}

std::size_t CylinderLattice::bond_target(const Bond& b) const {
  Coords c = b.from.c;
  c[b.direction] += 1;
  if (b.direction == 0 && c[0] > N_)
    throw std::domain_error("lattice: axial bond crosses the face");
  return site_index(c);
}

std::vector<Site> CylinderLattice::boundary_sites() const {
  std::vector<Site> out;
  out.reserve(2 * transverse_count_);
  for (int face : {-N_, N_}) {
    for (std::size_t t = 0; t < transverse_count_; ++t) {
      Coords c{};
      c[0] = face;
      std::size_t rest = t;
      for (int j = d_ - 1; j >= 1; --j) {
        c[j] = static_cast<int>(rest % static_cast<std::size_t>(L_));
        rest /= static_cast<std::size_t>(L_);
      }
      out.push_back({c});
    }
  }
  return out;
}

std::vector<std::size_t> CylinderLattice::block(const Site& center, int radius) const {
  if (radius < 0) throw std::invalid_argument("lattice: block radius must be >= 0");
  std::vector<std::size_t> out;
  int lo0 = std::max(center.c[0] - radius, -N_);
  int hi0 = std::min(center.c[0] + radius, N_);
  int tr = std::min(radius, L_ / 2);  // avoid wrapping onto the same site twice
  // For small tori the ball may cover the whole torus dimension.
  int span = 2 * radius + 1 >= L_ ? L_ : 2 * radius + 1;
  for (int x0 = lo0; x0 <= hi0; ++x0) {
    Coords c{};
    c[0] = x0;
    if (d_ == 1) {
      out.push_back(site_index(c));
      continue;
    }
    std::vector<int> offs;
    if (span == L_) {
      for (int o = 0; o < L_; ++o) offs.push_back(o);
    } else {
      for (int o = -radius; o <= radius; ++o) offs.push_back(o);
    }
    (void)tr;
    if (d_ == 2) {
      for (int o1 : offs) {
        c[1] = span == L_ ? o1 : mod(center.c[1] + o1, L_);
        out.push_back(site_index(c));
      }
    } else {
      for (int o1 : offs)
        for (int o2 : offs) {
          c[1] = span == L_ ? o1 : mod(center.c[1] + o1, L_);
          c[2] = span == L_ ? o2 : mod(center.c[2] + o2, L_);
          out.push_back(site_index(c));
        }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace latgas
