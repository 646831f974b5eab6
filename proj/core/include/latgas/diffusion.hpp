#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "latgas/disorder.hpp"
#include "latgas/thermo.hpp"

namespace latgas {

// A generator of the trial space: a product of up to two occupation
// factors at offsets within the cube of radius k, optionally weighted
// by alpha at one support site.
struct LocalFunction {
  int eta_count = 1;
  std::array<Coords, 2> eta_sites{};
  bool has_alpha = false;
  Coords alpha_site{};
};

struct LocalFunctionBasis {
  int d = 1;
  int radius = 0;
  std::vector<LocalFunction> generators;

  // All degree <= 2 occupation monomials over the cube of radius k,
  // each plain and once per alpha weight at a support site.
  static LocalFunctionBasis degree2(int d, int k);
};

// Dense cube window of radius w around the origin for one sample draw.
struct WindowGeom {
  int d = 1;
  int radius = 0;

  std::size_t size() const;
  // Linear index of an offset with every |component| <= radius;
  // throws std::domain_error outside the window.
  std::size_t index(const Coords& offset) const;
};

// Gamma-gradient sum over translates: adds up g(tau_x eta^{0,e}) -
// g(tau_x eta) over the finitely many x whose translate touches {0, e}.
double grad_gamma(const LocalFunction& g, const WindowGeom& geom,
                  const std::vector<std::uint8_t>& eta, const std::vector<double>& alpha,
                  int direction);

struct QuadraticBlocks {
  Eigen::VectorXd P;  // d
  Eigen::MatrixXd R;  // d x M
  Eigen::MatrixXd G;  // M x M
  long long samples = 0;
  // Per-batch copies for error bars.
  std::vector<Eigen::VectorXd> P_batches;
  std::vector<Eigen::MatrixXd> R_batches;
  std::vector<Eigen::MatrixXd> G_batches;
};

QuadraticBlocks estimate_quadratic_blocks(const LocalFunctionBasis& basis,
                                          const DisorderLaw& law, double rho,
                                          long long samples, std::uint64_t seed,
                                          int batches = 20);

// D = (Diag(P) - R G+ R^T) / (2 chi), G+ a floored pseudoinverse.
Eigen::MatrixXd assemble_diffusion(const Eigen::VectorXd& P, const Eigen::MatrixXd& R,
                                   const Eigen::MatrixXd& G, double chi);

struct DiffusionEstimate {
  Eigen::MatrixXd D;
  Eigen::MatrixXd stderr_;  // batch-means standard error per entry
};

DiffusionEstimate estimate_diffusion(const LocalFunctionBasis& basis, const DisorderLaw& law,
                                     double rho, long long samples, std::uint64_t seed);

// rho -> D(rho) on a grid, interpolated piecewise-linearly and clamped.
struct DiffusionTensorTable {
  int d = 1;
  std::vector<double> rho_grid;
  std::vector<Eigen::MatrixXd> matrices;
  std::vector<Eigen::MatrixXd> stderrs;

  static DiffusionTensorTable identity(int d);
  bool analytic_identity = false;

  Eigen::MatrixXd interpolate(double rho) const;
  void save_csv(const std::string& path) const;
  static DiffusionTensorTable load_csv(const std::string& path);
};

DiffusionTensorTable build_table(const LocalFunctionBasis& basis, const DisorderLaw& law,
                                 const std::vector<double>& rho_grid, long long samples,
                                 std::uint64_t seed);

}  // namespace latgas
