#include "latgas/oracle.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace latgas {
namespace oracle {

StateSpace::StateSpace(const CylinderLattice& lat)
    : lattice(lat), n_sites(static_cast<int>(lat.size())) {
  if (n_sites > 22) throw std::invalid_argument("oracle: state space capped at 22 sites");
  n_states = std::size_t{1} << n_sites;
}

Configuration StateSpace::configuration(std::uint64_t m) const {
  Configuration eta = Configuration::empty(lattice);
  for (int i = 0; i < n_sites; ++i) eta.occ[i] = (m >> i) & 1;
  return eta;
}

std::uint64_t StateSpace::mask(const Configuration& eta) const {
  std::uint64_t m = 0;
  for (int i = 0; i < n_sites; ++i)
    if (eta.occ[i]) m |= std::uint64_t{1} << i;
  return m;
}

SparseMat build_generator(const StateSpace& space, const DisorderField& field,
                          const ThermoContext& ctx, const ProfileSpec& boundary) {
  const CylinderLattice& lat = space.lattice;
  const auto& bonds = lat.bonds();
  std::vector<std::pair<std::size_t, std::size_t>> bond_ends;
  bond_ends.reserve(bonds.size());
  for (const Bond& b : bonds) bond_ends.emplace_back(lat.site_index(b.from), lat.bond_target(b));

  struct FaceSite {
    std::size_t x;
    double rate_occ, rate_emp;
  };
  std::vector<FaceSite> faces;
  for (const Site& s : lat.boundary_sites()) {
    std::size_t x = lat.site_index(s);
    double b = boundary.boundary(macro_point(lat, s));
    double z = 0.5 * (field.at(x) + ctx.lambda0(b));
    faces.push_back({x, std::exp(-z), std::exp(z)});
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.n_states * (bonds.size() + faces.size() + 1));
  for (std::uint64_t m = 0; m < space.n_states; ++m) {
    double diag = 0.0;
    for (std::size_t b = 0; b < bond_ends.size(); ++b) {
      auto [x, y] = bond_ends[b];
      bool ox = (m >> x) & 1, oy = (m >> y) & 1;
      if (ox == oy) continue;
      double d_eta = ox ? 1.0 : -1.0;
      double r = std::exp(0.5 * (field.at(y) - field.at(x)) * d_eta);
      std::uint64_t m2 = m ^ (std::uint64_t{1} << x) ^ (std::uint64_t{1} << y);
      trip.emplace_back(static_cast<int>(m), static_cast<int>(m2), r);
      diag -= r;
    }
    for (const FaceSite& f : faces) {
      bool ox = (m >> f.x) & 1;
      double r = ox ? f.rate_occ : f.rate_emp;
      std::uint64_t m2 = m ^ (std::uint64_t{1} << f.x);
      trip.emplace_back(static_cast<int>(m), static_cast<int>(m2), r);
      diag -= r;
    }
    trip.emplace_back(static_cast<int>(m), static_cast<int>(m), diag);
  }
  SparseMat Q(static_cast<int>(space.n_states), static_cast<int>(space.n_states));
  Q.setFromTriplets(trip.begin(), trip.end());
  return Q;
}

Eigen::VectorXd stationary_exact(const SparseMat& Q) {
  const int n = static_cast<int>(Q.rows());
  // Solve Q^T nu = 0 with the last equation replaced by sum nu = 1.
  SparseMat M = SparseMat(Q.transpose());
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMat::InnerIterator it(M, k); it; ++it)
      if (it.row() != n - 1) trip.emplace_back(it.row(), it.col(), it.value());
  for (int j = 0; j < n; ++j) trip.emplace_back(n - 1, j, 1.0);
  SparseMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::SparseLU<SparseMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary_exact: LU failed");
  Eigen::VectorXd nu = lu.solve(rhs);
  nu /= nu.sum();
  double resid = (Q.transpose() * nu).cwiseAbs().maxCoeff();
  if (resid > 1e-10) throw std::runtime_error("stationary_exact: residual too large");
  return nu;
}

Eigen::VectorXd evolve(const SparseMat& Q, const Eigen::VectorXd& mu0, double t) {
  if (t <= 0) return mu0;
  double lam = 0.0;
  for (int i = 0; i < Q.rows(); ++i) lam = std::max(lam, -Q.coeff(i, i));
  if (lam == 0) return mu0;
  lam *= 1.05;
  // Transition kernel of the uniformized chain: P = I + Q/lam.
  SparseMat Qt = SparseMat(Q.transpose());
  // Step in chunks so the Poisson series stays short.
  double remaining = t;
  Eigen::VectorXd mu = mu0;
  const double chunk = 32.0 / lam;
  while (remaining > 0) {
    double s = std::min(remaining, chunk);
    remaining -= s;
    double a = lam * s;
    Eigen::VectorXd term = mu;
    Eigen::VectorXd acc = mu * std::exp(-a);
    double logw = -a;
    int kmax = static_cast<int>(a + 12.0 * std::sqrt(a + 1.0) + 40.0);
    for (int k = 1; k <= kmax; ++k) {
      term += (Qt * term) / lam;  // P^k mu0, nonnegative by construction
      logw += std::log(a / k);
      acc += term * std::exp(logw);
      if (logw < -40.0 && k > static_cast<int>(a)) break;
    }
    mu = acc;
    mu /= mu.sum();  // Poisson-tail truncation loses a sliver of mass
  }
  return mu;
}

double relative_entropy(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
  double h = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0) continue;
    if (nu[i] <= 0) return std::numeric_limits<double>::infinity();
    h += mu[i] * std::log(mu[i] / nu[i]);
  }
  return std::max(h, 0.0);
}

Eigen::VectorXd product_measure(const StateSpace& space, const DisorderField& field,
                                const ThermoContext& ctx, const ProfileSpec& profile) {
  const CylinderLattice& lat = space.lattice;
  std::vector<double> p(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    double rho = profile.density(macro_point(lat, lat.site_at(i)));
    p[i] = ThermoContext::sigmoid(field.at(i) + ctx.lambda0(rho));
  }
  Eigen::VectorXd nu(space.n_states);
  for (std::uint64_t m = 0; m < space.n_states; ++m) {
    double w = 1.0;
    for (int i = 0; i < space.n_sites; ++i) w *= ((m >> i) & 1) ? p[i] : 1.0 - p[i];
    nu[static_cast<int>(m)] = w;
  }
  return nu;
}

std::vector<double> occupation_marginals(const StateSpace& space, const Eigen::VectorXd& nu) {
  std::vector<double> occ(space.n_sites, 0.0);
  for (std::uint64_t m = 0; m < space.n_states; ++m)
    for (int i = 0; i < space.n_sites; ++i)
      if ((m >> i) & 1) occ[i] += nu[static_cast<int>(m)];
  return occ;
}

double pair_covariance(const StateSpace& space, const Eigen::VectorXd& nu,
                       std::size_t x, std::size_t y) {
  double exy = 0, ex = 0, ey = 0;
  for (std::uint64_t m = 0; m < space.n_states; ++m) {
    double w = nu[static_cast<int>(m)];
    bool ox = (m >> x) & 1, oy = (m >> y) & 1;
    if (ox) ex += w;
    if (oy) ey += w;
    if (ox && oy) exy += w;
  }
  return exy - ex * ey;
}

DirichletForms dirichlet_forms(const StateSpace& space, const DisorderField& field,
                               const ThermoContext& ctx, const ProfileSpec& boundary,
                               const Eigen::VectorXd& h, const Eigen::VectorXd& nu,
                               const std::vector<std::uint8_t>& bond_mask,
                               const std::vector<std::uint8_t>& site_mask) {
  const CylinderLattice& lat = space.lattice;
  const auto& bonds = lat.bonds();
  std::vector<std::pair<std::size_t, std::size_t>> ends;
  for (const Bond& b : bonds) ends.emplace_back(lat.site_index(b.from), lat.bond_target(b));
  auto face_sites = lat.boundary_sites();
  struct FaceRates {
    std::size_t x;
    double occ, emp;
  };
  std::vector<FaceRates> faces;
  for (const Site& s : face_sites) {
    std::size_t x = lat.site_index(s);
    double z = 0.5 * (field.at(x) + ctx.lambda0(boundary.boundary(macro_point(lat, s))));
    faces.push_back({x, std::exp(-z), std::exp(z)});
  }
  DirichletForms out;
  for (std::uint64_t m = 0; m < space.n_states; ++m) {
    double w = nu[static_cast<int>(m)];
    if (w == 0) continue;
    for (std::size_t b = 0; b < bonds.size(); ++b) {
      if (!bond_mask.empty() && !bond_mask[b]) continue;
      auto [x, y] = ends[b];
      bool ox = (m >> x) & 1, oy = (m >> y) & 1;
      if (ox == oy) continue;
      double d_eta = ox ? 1.0 : -1.0;
      double r = std::exp(0.5 * (field.at(y) - field.at(x)) * d_eta);
      std::uint64_t m2 = m ^ (std::uint64_t{1} << x) ^ (std::uint64_t{1} << y);
      double dh = h[static_cast<int>(m2)] - h[static_cast<int>(m)];
      out.bulk += 0.5 * w * r * dh * dh;
    }
    for (std::size_t k = 0; k < faces.size(); ++k) {
      if (!site_mask.empty() && !site_mask[k]) continue;
      const FaceRates& f = faces[k];
      double r = ((m >> f.x) & 1) ? f.occ : f.emp;
      std::uint64_t m2 = m ^ (std::uint64_t{1} << f.x);
      double dh = h[static_cast<int>(m2)] - h[static_cast<int>(m)];
      out.boundary += 0.5 * w * r * dh * dh;
    }
  }
  return out;
}

}  // namespace oracle
}  // namespace latgas
