#pragma once

#include <string>
#include <vector>

#include "latgas/diffusion.hpp"

namespace latgas {

// Cell-centered grid on [-1,1] x T^{d-1}: M1 cells axially, Mt per
// transverse direction.
struct MacroGrid {
  int d = 1;
  int M1 = 64;
  int Mt = 1;

  std::size_t cells() const;
  std::size_t index(int i1, int i2 = 0, int i3 = 0) const;
  double axial_center(int i1) const { return -1.0 + (i1 + 0.5) * (2.0 / M1); }
  double du1() const { return 2.0 / M1; }
  double dut() const { return 1.0 / Mt; }
};

struct MacroField {
  MacroGrid grid;
  std::vector<double> values;
  double b_minus = 0.5, b_plus = 0.5;
  double time = 0.0;

  static MacroField constant(const MacroGrid& grid, double value, double b_minus,
                             double b_plus);
};

double l1_distance(const MacroField& a, const MacroField& b);

// Tabulated antiderivatives A_i(rho) = int_0^rho D_ii, one per axis,
// on a fine uniform mesh with exact piecewise-linear inversion.
class FluxFunction {
 public:
  // Diagonal part of the tensor table; off-diagonal mass is reported
  // through offdiag_ratio().
  static FluxFunction from_table(const DiffusionTensorTable& table, int mesh = 2048);

  double value(int axis, double rho) const;          // A_i(rho), clamped to [0,1]
  double inverse(int axis, double a) const;          // A_i^{-1}, exact on segments
  double max_slope(int axis) const { return max_slope_[axis]; }
  double offdiag_ratio() const { return offdiag_ratio_; }
  int dim() const { return static_cast<int>(mesh_.size()); }

 private:
  std::vector<std::vector<double>> mesh_;  // per axis, A at j/(n-1)
  std::vector<double> max_slope_;
  double offdiag_ratio_ = 0.0;
};

// One forward-Euler step of the A-form discretization. Throws when dt
// violates the monotone-scheme CFL bound du^2/(2d maxD); ghost cells
// pin the face trace to b, transverse directions are periodic.
MacroField explicit_step(const MacroField& field, const FluxFunction& flux, double dt);

// Automatic time step satisfying monotonicity including the stronger
// boundary-cell constraint.
double stable_dt(const MacroGrid& grid, const FluxFunction& flux);

struct SolveResult {
  MacroField final_field;
  std::vector<MacroField> checkpoints;
};

SolveResult solve(const MacroField& initial, const FluxFunction& flux, double t_end,
                  const std::vector<double>& checkpoint_times = {});

// Exact discrete stationary profile in 1-d effective form: A_1(rho)
// linear in u between A_1(b-) and A_1(b+).
MacroField stationary_1d(const FluxFunction& flux, double b_minus, double b_plus, int M1);

struct EnvelopeReport {
  std::vector<double> times;
  std::vector<double> l1_gap;
  std::vector<MacroField> lower;  // trajectory from rho0 == 0
  std::vector<MacroField> upper;  // trajectory from rho0 == 1
  double max_order_violation = 0.0;       // lower <= upper breach
  double max_monotonicity_violation = 0.0;  // in-time envelope breach
};

// Evolves the constant-0 and constant-1 envelopes and tracks the
// comparison-principle diagnostics. Order violations beyond 1e-10 throw.
EnvelopeReport monotone_envelope(const FluxFunction& flux, double b_minus, double b_plus,
                                 double t_end, const MacroGrid& grid,
                                 const std::vector<double>& checkpoint_times);

void save_checkpoints_csv(const std::vector<MacroField>& fields, const std::string& path);

}  // namespace latgas
