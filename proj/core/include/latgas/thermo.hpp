#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "latgas/configuration.hpp"
#include "latgas/disorder.hpp"

namespace latgas {

using MacroPoint = std::array<double, kMaxDim>;

// Macroscopic density profile plus reservoir densities on the faces.
// boundary is evaluated at points with u[0] = +-1 and must stay in (0,1).
struct ProfileSpec {
  std::function<double(const MacroPoint&)> density;
  std::function<double(const MacroPoint&)> boundary;

  static ProfileSpec constant(double rho, double b);
  // Face-constant reservoirs, axially linear interior between them.
  static ProfileSpec linear(double b_minus, double b_plus);
  // Constant interior with face-constant reservoirs.
  static ProfileSpec constant_with_faces(double rho0, double b_minus, double b_plus);
};

// Macroscopic coordinates of a lattice site: u1 = x1/N in [-1,1],
// transverse uj = xj/L in [0,1).
MacroPoint macro_point(const CylinderLattice& lattice, const Site& s);

// Annealed single-site thermodynamics of a disorder law.
class ThermoContext {
 public:
  explicit ThermoContext(DisorderLaw law, int quadrature_nodes = 64,
                         double lambda_tol = 1e-12);

  const DisorderLaw& law() const { return law_; }
  double lambda_tolerance() const { return lambda_tol_; }

  // E[sigmoid(alpha + lambda)], strictly increasing in lambda.
  double rho_of_lambda(double lambda) const;
  // d rho / d lambda = E[p(1-p)] at fixed lambda.
  double susceptibility_at(double lambda) const;
  // Inverse of rho_of_lambda; |residual| <= lambda tolerance.
  double lambda0(double rho) const;
  // Static compressibility E[p(1-p)] at lambda0(rho).
  double chi(double rho) const;

  static double sigmoid(double z);
  static double occupation_probability(double alpha, double lambda) {
    return sigmoid(alpha + lambda);
  }

 private:
  double expect(const std::function<double(double)>& f) const;

  DisorderLaw law_;
  double lambda_tol_;
  std::vector<double> nodes_;    // Gauss-Legendre on [-A, A]
  std::vector<double> weights_;  // normalized to total mass 1
};

// Product-measure sample: site x occupied with probability
// sigmoid(alpha(x) + lambda0(rho(x/N))); rho exactly 0/1 is deterministic.
Configuration sample_profile_configuration(const DisorderField& field,
                                           const ProfileSpec& profile,
                                           const ThermoContext& ctx,
                                           std::uint64_t seed);

}  // namespace latgas
