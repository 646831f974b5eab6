#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "latgas/dynamics.hpp"

namespace latgas {
namespace oracle {

// Exhaustive enumeration of {0,1}^n by bitmask, n <= 22.
struct StateSpace {
  CylinderLattice lattice;
  int n_sites;
  std::size_t n_states;

  explicit StateSpace(const CylinderLattice& lat);
  Configuration configuration(std::uint64_t mask) const;
  std::uint64_t mask(const Configuration& eta) const;
};

using SparseMat = Eigen::SparseMatrix<double>;

// Rate matrix of L0 + Lb (unscaled by N^2). Row = from-state, entry
// (s, s') = rate, diagonal = -row sum.
SparseMat build_generator(const StateSpace& space, const DisorderField& field,
                          const ThermoContext& ctx, const ProfileSpec& boundary);

// Unique nu with nu Q = 0, sum nu = 1, by sparse LU with a
// normalization row. Throws if the residual exceeds 1e-10.
Eigen::VectorXd stationary_exact(const SparseMat& Q);

// mu_0 exp(tQ) by uniformization; positivity- and mass-preserving.
Eigen::VectorXd evolve(const SparseMat& Q, const Eigen::VectorXd& mu0, double t);

// Sum mu log(mu/nu); +inf when nu vanishes where mu does not.
double relative_entropy(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);

// The random product measure with site probabilities
// sigmoid(alpha(x) + lambda0(rho(x/N))), as a vector over states.
Eigen::VectorXd product_measure(const StateSpace& space, const DisorderField& field,
                                const ThermoContext& ctx, const ProfileSpec& profile);

// Per-site occupation probabilities under a distribution.
std::vector<double> occupation_marginals(const StateSpace& space, const Eigen::VectorXd& nu);
// Covariance of eta(x), eta(y) under a distribution.
double pair_covariance(const StateSpace& space, const Eigen::VectorXd& nu,
                       std::size_t x, std::size_t y);

struct DirichletForms {
  double bulk = 0.0;
  double boundary = 0.0;
};

// 1/2 sum over bonds / face sites of rate * (h(eta') - h(eta))^2 under nu.
// Optional masks restrict to a subset of bonds / face sites (localized
// forms); empty masks mean "all".
DirichletForms dirichlet_forms(const StateSpace& space, const DisorderField& field,
                               const ThermoContext& ctx, const ProfileSpec& boundary,
                               const Eigen::VectorXd& h, const Eigen::VectorXd& nu,
                               const std::vector<std::uint8_t>& bond_mask = {},
                               const std::vector<std::uint8_t>& site_mask = {});

}  // namespace oracle
}  // namespace latgas
