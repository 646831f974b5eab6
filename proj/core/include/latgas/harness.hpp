#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latgas/dynamics.hpp"
#include "latgas/oracle.hpp"
#include "latgas/pde.hpp"

namespace latgas {

struct ExperimentConfig {
  std::string experiment = "run";
  // lattice
  int d = 1;
  std::vector<int> N_list = {32};
  int transverse_size = 0;  // 0: defaults to N
  // disorder
  DisorderLaw law = DisorderLaw::constant_zero();
  std::uint64_t disorder_seed = 1;
  int disorder_samples = 1;
  // boundary
  double b_minus = 0.5, b_plus = 0.5;
  // initial profile: constant | linear
  std::string initial_kind = "constant";
  double initial_value = 0.5;
  // diffusion source: identity | table
  std::string diffusion_source = "identity";
  std::string diffusion_table_path;
  // diffusion estimation (estimate-diffusion subcommand)
  int basis_radius = 1;
  long long diffusion_samples = 200000;
  std::vector<double> diffusion_rho_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  // schedule
  double t_end = 1.0;
  std::vector<double> checkpoints;
  int replicas = 1;
  double burn_in = 10.0;
  double average_time = 10.0;
  std::uint64_t kmc_seed = 7;
  // pde
  int pde_M1 = 256;
  // comparison
  double box_fraction = 0.125;
  std::string output_dir = "out";
};

ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& cfg);
// FNV-1a hash of the canonical JSON form, hex-encoded.
std::string config_hash(const ExperimentConfig& cfg);

ProfileSpec initial_profile(const ExperimentConfig& cfg);
DiffusionTensorTable diffusion_table(const ExperimentConfig& cfg);
CylinderLattice lattice_for(const ExperimentConfig& cfg, int N);

// Axial partition of [-1, 1] into K = round(2 / box_fraction) boxes of
// macroscopic length 2/K each; the coarse observable of the comparison.
struct BoxPartition {
  int K;
  explicit BoxPartition(double box_fraction);
  int box_of(int x1, int N) const;
  double center(int j) const { return -1.0 + (j + 0.5) * 2.0 / K; }
  double width() const { return 2.0 / K; }

  std::vector<double> average_configuration(const CylinderLattice& lat,
                                            const std::vector<double>& site_values) const;
  std::vector<double> average_macro_field(const MacroField& f) const;
};

struct ComparisonEntry {
  int N = 0;
  double time = 0;
  double l1 = 0;
  double stat_err = 0;
};

struct ComparisonReport {
  std::string hash;
  std::vector<ComparisonEntry> entries;
};

struct FickSection {
  double u = 0;          // section position
  double measured = 0;   // macroscopic flux
  double predicted = 0;  // -D11(rho) drho/du from the fitted profile
};

struct FickReport {
  bool degenerate = false;  // flat profile; comparison skipped
  std::vector<FickSection> sections;
  double fitted_D11 = 0;
  double variational_D11 = 0;
  double median_ratio = 0;  // measured / predicted over central sections
  double mid_density = 0;
};

struct HydrostaticResult {
  ComparisonReport report;
  // per N: disorder-averaged axial profile (column densities)
  std::vector<std::vector<double>> profiles;
  std::vector<FickReport> fick;
};

ComparisonReport run_hydrodynamic(const ExperimentConfig& cfg);
HydrostaticResult run_hydrostatic(const ExperimentConfig& cfg);

// Flux vs Fick prediction from a stationary run's column profile and
// section fluxes (both in lattice units).
FickReport fit_fick(const ExperimentConfig& cfg, int N,
                    const std::vector<double>& column_profile,
                    const std::vector<double>& section_flux_rates,
                    const DiffusionTensorTable& table);

int worker_count();

}  // namespace latgas
