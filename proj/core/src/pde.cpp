#include "latgas/pde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace latgas {

std::size_t MacroGrid::cells() const {
  std::size_t n = static_cast<std::size_t>(M1);
  for (int j = 1; j < d; ++j) n *= static_cast<std::size_t>(Mt);
  return n;
}

std::size_t MacroGrid::index(int i1, int i2, int i3) const {
  std::size_t idx = static_cast<std::size_t>(i1);
  if (d >= 2) idx = idx * Mt + static_cast<std::size_t>(i2);
  if (d >= 3) idx = idx * Mt + static_cast<std::size_t>(i3);
  return idx;
}

MacroField MacroField::constant(const MacroGrid& grid, double value, double b_minus,
                                double b_plus) {
  MacroField f;
  f.grid = grid;
  f.values.assign(grid.cells(), value);
  f.b_minus = b_minus;
  f.b_plus = b_plus;
  return f;
}

double l1_distance(const MacroField& a, const MacroField& b) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("l1_distance: mismatched grids");
  double vol = a.grid.du1();
  for (int j = 1; j < a.grid.d; ++j) vol *= a.grid.dut();
  double s = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
  return s * vol;
}

FluxFunction FluxFunction::from_table(const DiffusionTensorTable& table, int mesh) {
  if (mesh < 2) throw std::invalid_argument("flux: mesh must be >= 2");
  FluxFunction f;
  int d = table.d;
  f.mesh_.resize(d);
  f.max_slope_.assign(d, 0.0);
  double h = 1.0 / (mesh - 1);
  for (int axis = 0; axis < d; ++axis) {
    auto& A = f.mesh_[axis];
    A.resize(mesh);
    A[0] = 0.0;
    double Dprev = table.interpolate(0.0)(axis, axis);
    for (int j = 1; j < mesh; ++j) {
      double Dj = table.interpolate(j * h)(axis, axis);
      A[j] = A[j - 1] + 0.5 * h * (Dprev + Dj);
      if (!(A[j] > A[j - 1]))
        throw std::runtime_error("flux: A not strictly increasing (non-PD D?)");
      f.max_slope_[axis] = std::max(f.max_slope_[axis], std::max(Dprev, Dj));
      Dprev = Dj;
    }
  }
  double worst = 0.0;
  for (const auto& D : table.matrices) {
    double diag = 0, off = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        (i == j ? diag : off) += std::abs(D(i, j));
    if (diag > 0) worst = std::max(worst, off / diag);
  }
  f.offdiag_ratio_ = worst;
  return f;
}

double FluxFunction::value(int axis, double rho) const {
  const auto& A = mesh_[axis];
  int n = static_cast<int>(A.size());
  double t = std::clamp(rho, 0.0, 1.0) * (n - 1);
  int j = std::min(static_cast<int>(t), n - 2);
  double frac = t - j;
  return A[j] + frac * (A[j + 1] - A[j]);
}

double FluxFunction::inverse(int axis, double a) const {
  const auto& A = mesh_[axis];
  int n = static_cast<int>(A.size());
  if (a <= A.front()) return 0.0;
  if (a >= A.back()) return 1.0;
  auto it = std::upper_bound(A.begin(), A.end(), a);
  int j = static_cast<int>(it - A.begin()) - 1;
  double frac = (a - A[j]) / (A[j + 1] - A[j]);
  return (j + frac) / (n - 1);
}

namespace {

// Per-axis monotonicity budget: interior cells see coefficient 2, the
// axial boundary cells 3 through the ghost reflection.
double cfl_denominator(const MacroGrid& grid, const FluxFunction& flux) {
  if (flux.dim() < grid.d)
    throw std::invalid_argument("pde: flux table dimension below grid dimension");
  double s = 3.0 * flux.max_slope(0) / (grid.du1() * grid.du1());
  for (int j = 1; j < grid.d; ++j)
    s += 2.0 * flux.max_slope(j) / (grid.dut() * grid.dut());
  return s;
}

}  // namespace

double stable_dt(const MacroGrid& grid, const FluxFunction& flux) {
  return 0.95 / cfl_denominator(grid, flux);
}

MacroField explicit_step(const MacroField& field, const FluxFunction& flux, double dt) {
  const MacroGrid& g = field.grid;
  if (flux.dim() < g.d)
    throw std::invalid_argument("pde: flux table dimension below grid dimension");
  double max_d = 0;
  double min_du2 = g.du1() * g.du1();
  for (int j = 0; j < g.d; ++j) max_d = std::max(max_d, flux.max_slope(j));
  for (int j = 1; j < g.d; ++j) min_du2 = std::min(min_du2, g.dut() * g.dut());
  if (dt > min_du2 / (2.0 * g.d * max_d))
    throw std::runtime_error("explicit_step: CFL violated");

  // A(rho) per axis, cached for the stencil sweeps.
  std::vector<std::vector<double>> A(g.d, std::vector<double>(g.cells()));
  for (int axis = 0; axis < g.d; ++axis)
    for (std::size_t c = 0; c < g.cells(); ++c) A[axis][c] = flux.value(axis, field.values[c]);
  double Abm = flux.value(0, field.b_minus);
  double Abp = flux.value(0, field.b_plus);

  MacroField out = field;
  out.time = field.time + dt;
  int Mt = g.Mt;
  int n2 = g.d >= 2 ? Mt : 1;
  int n3 = g.d >= 3 ? Mt : 1;
  double inv_du1 = dt / (g.du1() * g.du1());
  double inv_dut = g.d >= 2 ? dt / (g.dut() * g.dut()) : 0.0;

  for (int i1 = 0; i1 < g.M1; ++i1)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i3 = 0; i3 < n3; ++i3) {
        std::size_t c = g.index(i1, i2, i3);
        double ac = A[0][c];
        double left = i1 > 0 ? A[0][g.index(i1 - 1, i2, i3)] : 2.0 * Abm - ac;
        double right = i1 < g.M1 - 1 ? A[0][g.index(i1 + 1, i2, i3)] : 2.0 * Abp - ac;
        double lap = (right - 2.0 * ac + left) * inv_du1;
        if (g.d >= 2) {
          std::size_t cm = g.index(i1, (i2 + Mt - 1) % Mt, i3);
          std::size_t cp = g.index(i1, (i2 + 1) % Mt, i3);
          lap += (A[1][cp] - 2.0 * A[1][c] + A[1][cm]) * inv_dut;
        }
        if (g.d >= 3) {
          std::size_t cm = g.index(i1, i2, (i3 + Mt - 1) % Mt);
          std::size_t cp = g.index(i1, i2, (i3 + 1) % Mt);
          lap += (A[2][cp] - 2.0 * A[2][c] + A[2][cm]) * inv_dut;
        }
        out.values[c] = field.values[c] + lap;
      }
  return out;
}

SolveResult solve(const MacroField& initial, const FluxFunction& flux, double t_end,
                  const std::vector<double>& checkpoint_times) {
  SolveResult res;
  MacroField f = initial;
  double dt0 = stable_dt(f.grid, flux);
  std::size_t ck = 0;
  auto emit = [&](double tc) {
    MacroField snap = f;
    snap.time = tc;
    res.checkpoints.push_back(std::move(snap));
  };
  while (ck < checkpoint_times.size() && checkpoint_times[ck] <= f.time) {
    emit(checkpoint_times[ck]);
    ++ck;
  }
  while (f.time < t_end) {
    double target = t_end;
    if (ck < checkpoint_times.size()) target = std::min(target, checkpoint_times[ck]);
    double dt = std::min(dt0, target - f.time);
    if (dt <= 0) break;
    f = explicit_step(f, flux, dt);
    while (ck < checkpoint_times.size() && checkpoint_times[ck] <= f.time + 1e-15) {
      emit(checkpoint_times[ck]);
      ++ck;
    }
  }
  res.final_field = std::move(f);
  return res;
}

MacroField stationary_1d(const FluxFunction& flux, double b_minus, double b_plus, int M1) {
  MacroGrid grid{1, M1, 1};
  MacroField f = MacroField::constant(grid, 0.0, b_minus, b_plus);
  double am = flux.value(0, b_minus);
  double ap = flux.value(0, b_plus);
  for (int i = 0; i < M1; ++i) {
    double u = grid.axial_center(i);
    f.values[i] = flux.inverse(0, am + 0.5 * (ap - am) * (u + 1.0));
  }
  return f;
}

EnvelopeReport monotone_envelope(const FluxFunction& flux, double b_minus, double b_plus,
                                 double t_end, const MacroGrid& grid,
                                 const std::vector<double>& checkpoint_times) {
  EnvelopeReport rep;
  MacroField lo = MacroField::constant(grid, 0.0, b_minus, b_plus);
  MacroField hi = MacroField::constant(grid, 1.0, b_minus, b_plus);
  double dt0 = stable_dt(grid, flux);
  std::size_t ck = 0;
  auto emit = [&](double tc) {
    rep.times.push_back(tc);
    double gap = l1_distance(hi, lo);
    rep.l1_gap.push_back(gap);
    rep.lower.push_back(lo);
    rep.upper.push_back(hi);
  };
  while (ck < checkpoint_times.size() && checkpoint_times[ck] <= 0) {
    emit(checkpoint_times[ck]);
    ++ck;
  }
  double t = 0;
  while (t < t_end) {
    double target = t_end;
    if (ck < checkpoint_times.size()) target = std::min(target, checkpoint_times[ck]);
    double dt = std::min(dt0, target - t);
    MacroField lo2 = explicit_step(lo, flux, dt);
    MacroField hi2 = explicit_step(hi, flux, dt);
    for (std::size_t c = 0; c < lo2.values.size(); ++c) {
      rep.max_monotonicity_violation = std::max(
          {rep.max_monotonicity_violation, lo.values[c] - lo2.values[c],
           hi2.values[c] - hi.values[c]});
      rep.max_order_violation =
          std::max(rep.max_order_violation, lo2.values[c] - hi2.values[c]);
    }
    if (rep.max_order_violation > 1e-10)
      throw std::runtime_error("monotone_envelope: comparison-principle breach");
    lo = std::move(lo2);
    hi = std::move(hi2);
    t += dt;
    while (ck < checkpoint_times.size() && checkpoint_times[ck] <= t + 1e-15) {
      emit(checkpoint_times[ck]);
      ++ck;
    }
  }
  return rep;
}

void save_checkpoints_csv(const std::vector<MacroField>& fields, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "time,u1,u2,u3,density\n";
  for (const MacroField& f : fields) {
    const MacroGrid& g = f.grid;
    int n2 = g.d >= 2 ? g.Mt : 1;
    int n3 = g.d >= 3 ? g.Mt : 1;
    for (int i1 = 0; i1 < g.M1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2)
        for (int i3 = 0; i3 < n3; ++i3)
          out << f.time << "," << g.axial_center(i1) << "," << (i2 + 0.5) * g.dut() << ","
              << (i3 + 0.5) * g.dut() << ","
              << f.values[g.index(i1, i2, i3)] << "\n";
  }
}

}  // namespace latgas
