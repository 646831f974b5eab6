// Acceptance gate: one criterion per command-line argument (1..11), all
// of them when invoked without arguments. Prints one PASS/FAIL line per
// criterion and exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "latgas/harness.hpp"

using namespace latgas;

namespace {

struct Checker {
  bool ok = true;
  std::vector<std::string> failures;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

double energy(const DisorderField& field, const Configuration& eta) {
  double h = 0;
  for (std::size_t i = 0; i < eta.occ.size(); ++i) h -= field.at(i) * eta.occ[i];
  return h;
}

// ---- 1: exact detailed balance ------------------------------------------
void criterion_1(Checker& c) {
  std::mt19937_64 rng(101);
  CylinderLattice lat(2, 4, 5);
  ThermoContext ctx(DisorderLaw::uniform(1.0));
  std::uniform_real_distribution<double> ua(-1.0, 1.0), ub(0.05, 0.95);
  double worst_bulk = 0, worst_bdry = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    DisorderField f = sample_field(lat, DisorderLaw::uniform(1.0), rng());
    Configuration eta{std::vector<std::uint8_t>(lat.size())};
    for (auto& o : eta.occ) o = rng() & 1;

    const Bond& bond = lat.bonds()[rng() % lat.bonds().size()];
    std::size_t x = lat.site_index(bond.from), y = lat.bond_target(bond);
    Configuration swapped = eta;
    std::swap(swapped.occ[x], swapped.occ[y]);
    // C(eta) e^{-H(eta)} = C(eta') e^{-H(eta')}; the constant-lambda
    // fugacity factors cancel for an exchange.
    double lhs = bulk_rate(f, eta, bond);
    double rhs = bulk_rate(f, swapped, bond) * std::exp(energy(f, eta) - energy(f, swapped));
    worst_bulk = std::max(worst_bulk, std::abs(lhs - rhs) / std::max(lhs, rhs));

    double b = ub(rng);
    auto faces = lat.boundary_sites();
    const Site& s = faces[rng() % faces.size()];
    std::size_t xs = lat.site_index(s);
    Configuration flipped = eta;
    flipped.occ[xs] ^= 1;
    double p = ThermoContext::occupation_probability(f.at(xs), ctx.lambda0(b));
    double wl = eta.occ[xs] ? p : 1 - p, wr = flipped.occ[xs] ? p : 1 - p;
    double dl = boundary_rate(f, ctx, b, s, eta) * wl;
    double dr = boundary_rate(f, ctx, b, s, flipped) * wr;
    worst_bdry = std::max(worst_bdry, std::abs(dl - dr) / std::max(dl, dr));
  }
  c.expect(worst_bulk <= 1e-12, "bulk detailed balance, worst rel err " +
                                    std::to_string(worst_bulk));
  c.expect(worst_bdry <= 1e-12, "boundary detailed balance, worst rel err " +
                                    std::to_string(worst_bdry));
}

// ---- 2: constant-reservoir stationarity ---------------------------------
void criterion_2(Checker& c) {
  CylinderLattice lat(1, 5);  // 11 sites, 2048 states
  DisorderField field = sample_field(lat, DisorderLaw::two_point(1.0), 202);
  ThermoContext ctx(field.law);
  ProfileSpec flat = ProfileSpec::constant(0.5, 0.5);

  oracle::StateSpace space(lat);
  Eigen::VectorXd nu =
      oracle::stationary_exact(oracle::build_generator(space, field, ctx, flat));
  Eigen::VectorXd prod = oracle::product_measure(space, field, ctx, flat);
  double maxdiff = (nu - prod).cwiseAbs().maxCoeff();
  c.expect(maxdiff <= 1e-10,
           "stationary vs product, max abs " + std::to_string(maxdiff));

  auto exact = oracle::occupation_marginals(space, nu);
  const int reps = 10;
  std::vector<std::vector<double>> avgs(reps);
  std::uint64_t total_events = 0;
  for (int r = 0; r < reps; ++r) {
    Configuration eta = sample_profile_configuration(field, flat, ctx, 300 + r);
    TrajectoryRecorder rec;
    rec.average_start = 20.0;
    RunRecord run = run_until(field, ctx, flat, std::move(eta), 8000.0, rec, 400 + r);
    avgs[r] = run.time_avg_occupation;
    total_events += run.events;
  }
  c.expect(total_events >= 10000000,
           "event budget, got " + std::to_string(total_events));
  for (std::size_t i = 0; i < lat.size(); ++i) {
    double mean = 0, var = 0;
    for (int r = 0; r < reps; ++r) mean += avgs[r][i];
    mean /= reps;
    for (int r = 0; r < reps; ++r) var += (avgs[r][i] - mean) * (avgs[r][i] - mean);
    double se = std::sqrt(var / (reps - 1) / reps);
    if (std::abs(mean - exact[i]) > 3 * se + 1e-4)
      c.expect(false, "KMC marginal at site " + std::to_string(i) + ": " +
                          std::to_string(mean) + " vs " + std::to_string(exact[i]));
  }
}

// ---- 3: thermodynamics --------------------------------------------------
void criterion_3(Checker& c) {
  for (auto law : {DisorderLaw::constant_zero(), DisorderLaw::uniform(1.0),
                   DisorderLaw::two_point(1.0)}) {
    ThermoContext ctx(law);
    for (double rho = 0.05; rho < 0.951; rho += 0.05) {
      double res = std::abs(ctx.rho_of_lambda(ctx.lambda0(rho)) - rho);
      c.expect(res <= 1e-12, law_name(law.kind) + " inversion residual " +
                                 std::to_string(res) + " at rho " + std::to_string(rho));
      double chi = ctx.chi(rho), r = rho * (1 - rho);
      c.expect(chi >= 0.5 * r - 1e-12 && chi <= r + 1e-12,
               law_name(law.kind) + " compressibility bound at rho " + std::to_string(rho));
    }
  }
  ThermoContext cz(DisorderLaw::constant_zero());
  for (double rho = 0.05; rho < 0.951; rho += 0.05) {
    c.expect(std::abs(cz.lambda0(rho) - std::log(rho / (1 - rho))) <= 1e-12,
             "constant-zero logit at rho " + std::to_string(rho));
    c.expect(std::abs(cz.chi(rho) - rho * (1 - rho)) <= 1e-12,
             "constant-zero chi at rho " + std::to_string(rho));
  }
}

// ---- 4: diffusion estimator sanity --------------------------------------
void criterion_4(Checker& c) {
  for (int d : {1, 2}) {
    auto est = estimate_diffusion(LocalFunctionBasis::degree2(d, 1),
                                  DisorderLaw::constant_zero(), 0.5, 1000000, 404 + d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double target = i == j ? 1.0 : 0.0;
        c.expect(std::abs(est.D(i, j) - target) <= 0.03,
                 "zero-disorder D(" + std::to_string(i) + "," + std::to_string(j) +
                     ") = " + std::to_string(est.D(i, j)) + " in d=" + std::to_string(d));
      }
  }

  DisorderLaw tp = DisorderLaw::two_point(1.0);
  auto k0 = estimate_diffusion(LocalFunctionBasis::degree2(1, 0), tp, 0.5, 1000000, 410);
  auto k1 = estimate_diffusion(LocalFunctionBasis::degree2(1, 1), tp, 0.5, 1000000, 411);
  double slack = 3.0 * (k0.stderr_(0, 0) + k1.stderr_(0, 0));
  c.expect(k1.D(0, 0) <= k0.D(0, 0) + slack,
           "variational monotonicity: k1 " + std::to_string(k1.D(0, 0)) + " vs k0 " +
               std::to_string(k0.D(0, 0)) + " (slack " + std::to_string(slack) + ")");

  for (double rho : {0.3, 0.5, 0.7}) {
    auto est = estimate_diffusion(LocalFunctionBasis::degree2(1, 1), tp, rho, 300000, 420);
    c.expect((est.D - est.D.transpose()).cwiseAbs().maxCoeff() <= 1e-9,
             "symmetry at rho " + std::to_string(rho));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.D);
    c.expect(es.eigenvalues().minCoeff() > 0,
             "positive-definiteness at rho " + std::to_string(rho));
  }
}

// ---- 5: Einstein-relation sandwich --------------------------------------
void criterion_5(Checker& c) {
  DisorderLaw tp = DisorderLaw::two_point(1.0);
  ThermoContext ctx(tp);
  std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  DiffusionTensorTable table =
      build_table(LocalFunctionBasis::degree2(1, 1), tp, grid, 200000, 505);
  double C = 1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double r = grid[g] * (1 - grid[g]);
    double sigma = 2.0 * table.matrices[g](0, 0) * ctx.chi(grid[g]);
    c.expect(sigma > 0 && std::isfinite(sigma),
             "mobility finite/positive at rho " + std::to_string(grid[g]));
    C = std::max({C, sigma / r, r / sigma});
  }
  std::printf("       einstein sandwich constant C = %.4f\n", C);
  c.expect(std::isfinite(C) && C < 50.0, "sandwich constant C = " + std::to_string(C));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double r = grid[g] * (1 - grid[g]);
    double sigma = 2.0 * table.matrices[g](0, 0) * ctx.chi(grid[g]);
    c.expect(sigma >= r / C - 1e-12 && sigma <= C * r + 1e-12,
             "sandwich at rho " + std::to_string(grid[g]));
  }
}

// ---- 6: PDE correctness --------------------------------------------------
void criterion_6(Checker& c) {
  FluxFunction id = FluxFunction::from_table(DiffusionTensorTable::identity(1));
  MacroGrid grid{1, 256, 1};
  MacroField f = MacroField::constant(grid, 0.5, 0.5, 0.5);
  for (int i = 0; i < grid.M1; ++i)
    f.values[i] = 0.5 + 0.1 * std::sin(M_PI * (grid.axial_center(i) + 1.0) / 2.0);
  double t = 0.2;
  SolveResult res = solve(f, id, t);
  double amp = 0;
  for (double v : res.final_field.values) amp = std::max(amp, std::abs(v - 0.5));
  double expected = 0.1 * std::exp(-(M_PI * M_PI / 4.0) * t);
  c.expect(std::abs(amp / expected - 1.0) <= 0.02,
           "sinusoid decay ratio " + std::to_string(amp / expected));

  DiffusionTensorTable lin;
  lin.d = 1;
  for (int i = 0; i <= 100; ++i) {
    lin.rho_grid.push_back(i / 100.0);
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = 1.0 + i / 100.0;
    lin.matrices.push_back(m);
  }
  for (const FluxFunction& flux : {id, FluxFunction::from_table(lin)}) {
    MacroField st = stationary_1d(flux, 0.2, 0.8, 128);
    MacroField next = explicit_step(st, flux, stable_dt(st.grid, flux));
    double drift = 0;
    for (int i = 0; i < 128; ++i)
      drift = std::max(drift, std::abs(next.values[i] - st.values[i]));
    c.expect(drift <= 1e-12, "stationary fixed point drift " + std::to_string(drift));
  }

  auto error_at = [&](int M1) {
    MacroGrid g{1, M1, 1};
    MacroField u0 = MacroField::constant(g, 0.5, 0.5, 0.5);
    for (int i = 0; i < M1; ++i)
      u0.values[i] = 0.5 + 0.1 * std::sin(M_PI * (g.axial_center(i) + 1.0) / 2.0);
    SolveResult r = solve(u0, id, 0.1);
    double decay = std::exp(-(M_PI * M_PI / 4.0) * 0.1), err = 0;
    for (int i = M1 / 4; i < 3 * M1 / 4; ++i) {
      double exact = 0.5 + 0.1 * decay * std::sin(M_PI * (g.axial_center(i) + 1.0) / 2.0);
      err = std::max(err, std::abs(r.final_field.values[i] - exact));
    }
    return err;
  };
  double e1 = error_at(32), e2 = error_at(64), e3 = error_at(128);
  double order = 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
  c.expect(order > 1.6 && order < 2.4, "Richardson order " + std::to_string(order));
}

// ---- 7: comparison principle and global stability ------------------------
void criterion_7(Checker& c) {
  DiffusionTensorTable lin;
  lin.d = 1;
  for (int i = 0; i <= 100; ++i) {
    lin.rho_grid.push_back(i / 100.0);
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = 1.0 + 0.5 * (i / 100.0);
    lin.matrices.push_back(m);
  }
  FluxFunction flux = FluxFunction::from_table(lin);
  MacroGrid grid{1, 64, 1};

  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0, 1);
  double dt = stable_dt(grid, flux), worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    MacroField lo = MacroField::constant(grid, 0, 0.3, 0.7), hi = lo;
    for (std::size_t k = 0; k < grid.cells(); ++k) {
      double a = u(rng), b = u(rng);
      lo.values[k] = std::min(a, b);
      hi.values[k] = std::max(a, b);
    }
    MacroField lo2 = explicit_step(lo, flux, dt), hi2 = explicit_step(hi, flux, dt);
    for (std::size_t k = 0; k < grid.cells(); ++k)
      worst = std::max(worst, lo2.values[k] - hi2.values[k]);
  }
  c.expect(worst <= 1e-10, "order violation " + std::to_string(worst));

  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.5 * k);
  EnvelopeReport rep = monotone_envelope(flux, 0.2, 0.8, 10.0, grid, times);
  bool monotone = true;
  for (std::size_t i = 1; i < rep.l1_gap.size(); ++i)
    monotone = monotone && rep.l1_gap[i] <= rep.l1_gap[i - 1] + 1e-12;
  c.expect(monotone, "envelope gap not monotone");
  c.expect(rep.l1_gap.back() <= 1e-4,
           "final envelope gap " + std::to_string(rep.l1_gap.back()));
  c.expect(rep.max_order_violation <= 1e-10,
           "envelope order violation " + std::to_string(rep.max_order_violation));
  c.expect(rep.max_monotonicity_violation <= 1e-12,
           "in-time envelope violation " +
               std::to_string(rep.max_monotonicity_violation));
}

// ---- 8: hydrodynamic convergence ----------------------------------------
void criterion_8(Checker& c) {
  ExperimentConfig cfg;
  cfg.d = 1;
  cfg.N_list = {32, 64, 128};
  cfg.b_minus = 0.2;
  cfg.b_plus = 0.8;
  cfg.initial_kind = "constant";
  cfg.initial_value = 0.5;
  cfg.t_end = 0.25;
  cfg.checkpoints = {0.25};
  cfg.replicas = 64;
  cfg.pde_M1 = 256;
  cfg.kmc_seed = 808;
  ComparisonReport rep = run_hydrodynamic(cfg);
  double prev = 1e9;
  for (const auto& e : rep.entries) {
    std::printf("       N=%d  L1=%.4f +- %.4f\n", e.N, e.l1, e.stat_err);
    c.expect(e.l1 < prev, "L1 not strictly decreasing at N=" + std::to_string(e.N));
    prev = e.l1;
    if (e.N == 128) c.expect(e.l1 <= 0.05, "L1 at N=128 is " + std::to_string(e.l1));
  }
}

// ---- 9: hydrostatic convergence -----------------------------------------
void criterion_9(Checker& c) {
  ExperimentConfig cfg;
  cfg.d = 1;
  cfg.N_list = {128};
  cfg.b_minus = 0.2;
  cfg.b_plus = 0.8;
  cfg.initial_kind = "linear";
  cfg.replicas = 8;
  cfg.burn_in = 2.0;
  cfg.average_time = 4.0;
  cfg.kmc_seed = 909;
  HydrostaticResult res = run_hydrostatic(cfg);
  // Empirical profile against 0.5 + 0.3 u, cellwise L1 over columns.
  const auto& prof = res.profiles[0];
  double l1 = 0;
  int N = 128;
  for (std::size_t k = 0; k < prof.size(); ++k) {
    double u = (static_cast<double>(k) - N) / N;
    l1 += std::abs(prof[k] - (0.5 + 0.3 * u)) * (2.0 / (2 * N + 1));
  }
  std::printf("       zero disorder: L1(profile, 0.5+0.3u) = %.4f\n", l1);
  c.expect(l1 <= 0.05, "zero-disorder profile L1 " + std::to_string(l1));

  ExperimentConfig dis = cfg;
  dis.N_list = {32, 64, 128};
  dis.law = DisorderLaw::two_point(1.0);
  dis.diffusion_source = "estimate";
  dis.diffusion_samples = 200000;
  dis.disorder_samples = 2;
  dis.b_minus = 0.3;
  dis.b_plus = 0.7;
  HydrostaticResult rd = run_hydrostatic(dis);
  double prev = 1e9;
  for (const auto& e : rd.report.entries) {
    std::printf("       two-point: N=%d  L1=%.4f +- %.4f\n", e.N, e.l1, e.stat_err);
    c.expect(e.l1 < prev, "disordered L1 not decreasing at N=" + std::to_string(e.N));
    prev = e.l1;
  }
}

// ---- 10: cross-estimator consistency ------------------------------------
void criterion_10(Checker& c) {
  ExperimentConfig cfg;
  cfg.d = 1;
  cfg.N_list = {96};
  cfg.law = DisorderLaw::two_point(1.0);
  cfg.diffusion_source = "estimate";
  cfg.diffusion_samples = 400000;
  cfg.b_minus = 0.3;
  cfg.b_plus = 0.7;
  cfg.initial_kind = "linear";
  cfg.replicas = 8;
  cfg.disorder_samples = 2;
  cfg.burn_in = 2.0;
  cfg.average_time = 8.0;
  cfg.kmc_seed = 1010;
  HydrostaticResult res = run_hydrostatic(cfg);
  const FickReport& fick = res.fick[0];
  c.expect(!fick.degenerate, "Fick fit unexpectedly degenerate");
  double ratio = fick.fitted_D11 / fick.variational_D11;
  std::printf("       Fick D11 = %.4f, variational D11 = %.4f (ratio %.3f)\n",
              fick.fitted_D11, fick.variational_D11, ratio);
  c.expect(std::abs(ratio - 1.0) <= 0.15, "estimator ratio " + std::to_string(ratio));
}

// ---- 11: entropy decay ---------------------------------------------------
void criterion_11(Checker& c) {
  CylinderLattice lat(1, 4);  // 9 sites, 512 states
  DisorderField field = sample_field(lat, DisorderLaw::two_point(1.0), 1111);
  ThermoContext ctx(field.law);
  ProfileSpec flat = ProfileSpec::constant(0.35, 0.35);
  oracle::StateSpace space(lat);
  oracle::SparseMat Q = oracle::build_generator(space, field, ctx, flat);
  Eigen::VectorXd nu = oracle::stationary_exact(Q);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(space.n_states);
  mu[space.n_states - 1] = 1.0;  // start from the full lattice
  double prev = oracle::relative_entropy(mu, nu);
  // The oracle generator is unscaled, so relaxation is diffusive in the
  // chain length; a grid out to t = 60 covers several relaxation times.
  for (int k = 1; k <= 20; ++k) {
    Eigen::VectorXd mk = oracle::evolve(Q, mu, 3.0 * k);
    double h = oracle::relative_entropy(mk, nu);
    c.expect(h <= prev + 1e-10, "entropy increased at grid point " + std::to_string(k));
    prev = h;
  }
  c.expect(prev < 0.05, "entropy failed to relax, final H = " + std::to_string(prev));
}

struct Criterion {
  int id;
  const char* name;
  void (*fn)(Checker&);
};

const Criterion kCriteria[] = {
    {1, "exact detailed balance (bulk and boundary)", criterion_1},
    {2, "constant-reservoir stationarity (oracle + KMC)", criterion_2},
    {3, "annealed thermodynamics", criterion_3},
    {4, "diffusion estimator sanity", criterion_4},
    {5, "Einstein-relation sandwich", criterion_5},
    {6, "PDE correctness", criterion_6},
    {7, "comparison principle and global stability", criterion_7},
    {8, "hydrodynamic convergence", criterion_8},
    {9, "hydrostatic convergence", criterion_9},
    {10, "cross-estimator consistency", criterion_10},
    {11, "entropy decay", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  bool all_ok = true;
  for (const Criterion& cr : kCriteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), cr.id) == wanted.end())
      continue;
    Checker c;
    try {
      cr.fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("[%s] criterion %d: %s\n", c.ok ? "PASS" : "FAIL", cr.id, cr.name);
    for (const std::string& f : c.failures) std::printf("       -> %s\n", f.c_str());
    all_ok = all_ok && c.ok;
  }
  return all_ok ? 0 : 1;
}
