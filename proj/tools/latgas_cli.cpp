// Command-line front end: every subcommand reads one JSON experiment
// config and writes CSV artifacts plus a meta.json under
// {output_dir}/{experiment}/..., returning nonzero on any breach.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <json.hpp>
#include <sstream>

#include "latgas/harness.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace latgas;

namespace {

fs::path experiment_dir(const ExperimentConfig& cfg) {
  fs::path dir = fs::path(cfg.output_dir) / cfg.experiment;
  fs::create_directories(dir);
  return dir;
}

void write_meta(const ExperimentConfig& cfg, const fs::path& dir, json extra = {}) {
  json meta = json::parse(config_json(cfg));
  meta["config_hash"] = config_hash(cfg);
  meta["version"] = "0.1.0";
  for (auto& [k, v] : extra.items()) meta[k] = v;
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
}

int cmd_gen_disorder(const ExperimentConfig& cfg) {
  fs::path dir = experiment_dir(cfg);
  for (int N : cfg.N_list) {
    CylinderLattice lat = lattice_for(cfg, N);
    DisorderField field = sample_field(lat, cfg.law, mix64(cfg.disorder_seed ^ (std::uint64_t)N));
    fs::path ndir = dir / std::to_string(N);
    fs::create_directories(ndir);
    save_field_csv(field, (ndir / "disorder.csv").string());
    FieldStatistics st = field_statistics(field);
    std::cout << "N=" << N << " sites=" << lat.size() << " mean=" << st.mean
              << " min=" << st.min << " max=" << st.max << "\n";
  }
  write_meta(cfg, dir);
  return 0;
}

int cmd_estimate_diffusion(const ExperimentConfig& cfg) {
  fs::path dir = experiment_dir(cfg);
  auto basis = LocalFunctionBasis::degree2(cfg.d, cfg.basis_radius);
  auto table = build_table(basis, cfg.law, cfg.diffusion_rho_grid, cfg.diffusion_samples,
                           cfg.kmc_seed);
  table.save_csv((dir / "diffusion_table.csv").string());
  ThermoContext ctx(cfg.law);
  // Einstein-relation sandwich: report the smallest admissible C.
  double C = 1.0;
  for (std::size_t g = 0; g < table.rho_grid.size(); ++g) {
    double rho = table.rho_grid[g];
    double chi = ctx.chi(rho);
    Eigen::MatrixXd sigma = 2.0 * table.matrices[g] * chi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma + sigma.transpose()));
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    double r = rho * (1 - rho);
    C = std::max({C, hi / r, r / lo});
  }
  write_meta(cfg, dir, json{{"einstein_C", C}, {"basis_size", basis.generators.size()}});
  std::cout << "wrote " << (dir / "diffusion_table.csv") << " einstein_C=" << C << "\n";
  return 0;
}

int cmd_pde_solve(const ExperimentConfig& cfg) {
  fs::path dir = experiment_dir(cfg) / "pde";
  fs::create_directories(dir);
  DiffusionTensorTable table = diffusion_table(cfg);
  FluxFunction flux = FluxFunction::from_table(table);
  if (flux.offdiag_ratio() > 0.05)
    std::cerr << "WARNING: off-diagonal D mass " << flux.offdiag_ratio() * 100
              << "% is dropped by the solver\n";
  ProfileSpec profile = initial_profile(cfg);
  MacroGrid grid{cfg.d, cfg.pde_M1, cfg.d > 1 ? cfg.pde_M1 / 2 : 1};
  MacroField rho0 = MacroField::constant(grid, 0.0, cfg.b_minus, cfg.b_plus);
  for (std::size_t c = 0; c < grid.cells(); ++c) rho0.values[c] = 0;
  for (int i1 = 0; i1 < grid.M1; ++i1) {
    MacroPoint u{grid.axial_center(i1), 0, 0};
    double v = profile.density(u);
    int n2 = grid.d >= 2 ? grid.Mt : 1, n3 = grid.d >= 3 ? grid.Mt : 1;
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i3 = 0; i3 < n3; ++i3) rho0.values[grid.index(i1, i2, i3)] = v;
  }
  std::vector<double> times = cfg.checkpoints.empty() ? std::vector<double>{cfg.t_end}
                                                      : cfg.checkpoints;
  SolveResult res = solve(rho0, flux, times.back(), times);
  save_checkpoints_csv(res.checkpoints, (dir / "checkpoints.csv").string());
  write_meta(cfg, dir);
  std::cout << "wrote " << (dir / "checkpoints.csv") << "\n";
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  fs::path dir = experiment_dir(cfg);
  ProfileSpec profile = initial_profile(cfg);
  ThermoContext ctx(cfg.law);
  BoxPartition boxes(cfg.box_fraction);
  std::vector<double> times = cfg.checkpoints.empty() ? std::vector<double>{cfg.t_end}
                                                      : cfg.checkpoints;
  for (int N : cfg.N_list) {
    CylinderLattice lat = lattice_for(cfg, N);
    fs::path ndir = dir / std::to_string(N);
    fs::create_directories(ndir);
    std::ofstream dens(ndir / "density.csv");
    std::ofstream fluxcsv(ndir / "flux.csv");
    dens.precision(12);
    fluxcsv.precision(12);
    dens << "replica,macro_time,box_center,density\n";
    fluxcsv << "replica,section_x1,cumulative_flux,elapsed_time\n";
    for (int s = 0; s < cfg.disorder_samples; ++s) {
      DisorderField field = sample_field(
          lat, cfg.law, mix64(cfg.disorder_seed ^ ((std::uint64_t)N << 20) ^ (std::uint64_t)s));
      for (int r = 0; r < cfg.replicas; ++r) {
        std::uint64_t seed =
            mix64(cfg.kmc_seed ^ ((std::uint64_t)N << 32) ^ ((std::uint64_t)s << 16) ^
                  (std::uint64_t)r);
        Configuration eta = sample_profile_configuration(field, profile, ctx, seed);
        TrajectoryRecorder rec;
        rec.checkpoint_times = times;
        RunRecord run =
            run_until(field, ctx, profile, std::move(eta), times.back(), rec, mix64(seed + 1));
        int rid = s * cfg.replicas + r;
        for (std::size_t t = 0; t < run.times.size(); ++t) {
          auto bx = boxes.average_configuration(lat, run.coarse_fields[t]);
          for (int j = 0; j < boxes.K; ++j)
            dens << rid << "," << run.times[t] << "," << boxes.center(j) << "," << bx[j]
                 << "\n";
        }
        for (std::size_t k = 0; k < run.section_crossings.size(); ++k)
          fluxcsv << rid << "," << (static_cast<int>(k) - N) << ","
                  << run.section_crossings[k] << "," << run.flux_window << "\n";
      }
    }
  }
  write_meta(cfg, dir, json{{"box_count", boxes.K}});
  std::cout << "wrote simulate artifacts under " << dir << "\n";
  return 0;
}

int cmd_hydrostatic(const ExperimentConfig& cfg) {
  fs::path dir = experiment_dir(cfg);
  HydrostaticResult res = run_hydrostatic(cfg);
  std::ofstream rep(dir / "report.csv");
  rep.precision(12);
  rep << "N,l1,stat_err\n";
  for (const auto& e : res.report.entries)
    rep << e.N << "," << e.l1 << "," << e.stat_err << "\n";
  for (std::size_t i = 0; i < res.profiles.size(); ++i) {
    int N = cfg.N_list[i];
    fs::path ndir = dir / std::to_string(N);
    fs::create_directories(ndir);
    std::ofstream prof(ndir / "profile.csv");
    prof.precision(12);
    prof << "u,density\n";
    for (std::size_t c = 0; c < res.profiles[i].size(); ++c)
      prof << (static_cast<double>(c) - N) / N << "," << res.profiles[i][c] << "\n";
    std::ofstream fick(ndir / "fick.csv");
    fick.precision(12);
    fick << "u,measured_flux,fick_prediction\n";
    for (const auto& s : res.fick[i].sections)
      fick << s.u << "," << s.measured << "," << s.predicted << "\n";
  }
  json extra;
  for (std::size_t i = 0; i < res.fick.size(); ++i) {
    extra["fick"][std::to_string(cfg.N_list[i])] = {
        {"degenerate", res.fick[i].degenerate},
        {"fitted_D11", res.fick[i].fitted_D11},
        {"variational_D11", res.fick[i].variational_D11},
        {"median_ratio", res.fick[i].median_ratio},
        {"mid_density", res.fick[i].mid_density}};
  }
  write_meta(cfg, dir, extra);
  for (const auto& e : res.report.entries)
    std::cout << "N=" << e.N << " L1=" << e.l1 << " +- " << e.stat_err << "\n";
  return 0;
}

int cmd_oracle(const ExperimentConfig& cfg) {
  fs::path dir = experiment_dir(cfg);
  int N = cfg.N_list.front();
  CylinderLattice lat = lattice_for(cfg, N);
  if (lat.size() > 22) {
    std::cerr << "oracle: lattice has " << lat.size() << " sites (cap 22)\n";
    return 2;
  }
  DisorderField field = sample_field(lat, cfg.law, cfg.disorder_seed);
  ThermoContext ctx(cfg.law);
  ProfileSpec boundary = ProfileSpec::constant_with_faces(0.5, cfg.b_minus, cfg.b_plus);
  oracle::StateSpace space(lat);
  auto Q = oracle::build_generator(space, field, ctx, boundary);
  Eigen::VectorXd nu = oracle::stationary_exact(Q);
  auto occ = oracle::occupation_marginals(space, nu);
  std::ofstream out(dir / "stationary_marginals.csv");
  out.precision(12);
  out << "site,occupation\n";
  for (std::size_t i = 0; i < occ.size(); ++i) out << i << "," << occ[i] << "\n";
  write_meta(cfg, dir);
  if (std::abs(cfg.b_minus - cfg.b_plus) < 1e-15) {
    ProfileSpec flat = ProfileSpec::constant(cfg.b_minus, cfg.b_minus);
    Eigen::VectorXd prod = oracle::product_measure(space, field, ctx, flat);
    double maxdiff = (nu - prod).cwiseAbs().maxCoeff();
    std::cout << "max|nu_exact - nu_product| = " << maxdiff << "\n";
    if (maxdiff > 1e-10) {
      std::cerr << "oracle: constant-reservoir stationary measure is not product\n";
      return 3;
    }
  }
  return 0;
}

struct BoxSeries {
  // time -> box center -> mean density
  std::map<double, std::map<double, std::pair<double, int>>> acc;
};

int cmd_compare(const std::string& sim_dir, const std::string& pde_dir) {
  json sim_meta, pde_meta;
  {
    std::ifstream a(fs::path(sim_dir) / "meta.json"),
        b(fs::path(pde_dir) / "pde" / "meta.json");
    if (!a || !b) {
      std::cerr << "compare: missing meta.json in " << sim_dir << " or " << pde_dir << "\n";
      return 2;
    }
    a >> sim_meta;
    b >> pde_meta;
  }
  int d_sim = sim_meta["lattice"]["d"], d_pde = pde_meta["lattice"]["d"];
  if (d_sim != d_pde) {
    std::cerr << "compare: lattice dimension mismatch: simulate d=" << d_sim
              << " vs pde d=" << d_pde << "\n";
    return 2;
  }
  int K = sim_meta["box_count"];
  BoxPartition boxes(2.0 / K);

  // PDE checkpoints, box-averaged per time.
  std::map<double, std::map<int, std::pair<double, int>>> pde_boxes;
  {
    std::ifstream in(fs::path(pde_dir) / "pde" / "checkpoints.csv");
    if (!in) {
      std::cerr << "compare: missing pde/checkpoints.csv under " << pde_dir << "\n";
      return 2;
    }
    std::string line;
    std::getline(in, line);
    double t, u1, u2, u3, rho;
    char c;
    while (in >> t >> c >> u1 >> c >> u2 >> c >> u3 >> c >> rho) {
      int j = std::clamp(static_cast<int>((u1 + 1.0) / 2.0 * K), 0, K - 1);
      auto& slot = pde_boxes[t][j];
      slot.first += rho;
      slot.second += 1;
    }
  }

  std::ofstream rep(fs::path(sim_dir) / "compare_report.csv");
  rep.precision(12);
  rep << "N,time,l1\n";
  int status = 0;
  for (int N : sim_meta["lattice"]["N_list"].get<std::vector<int>>()) {
    std::ifstream in(fs::path(sim_dir) / std::to_string(N) / "density.csv");
    if (!in) {
      std::cerr << "compare: missing density.csv for N=" << N << "\n";
      return 2;
    }
    std::string line;
    std::getline(in, line);
    std::map<double, std::map<double, std::pair<double, int>>> emp;
    int rid;
    double t, uc, rho;
    char c;
    while (in >> rid >> c >> t >> c >> uc >> c >> rho) {
      auto& slot = emp[t][uc];
      slot.first += rho;
      slot.second += 1;
    }
    for (auto& [t2, row] : emp) {
      auto it = pde_boxes.find(t2);
      if (it == pde_boxes.end()) {
        std::cerr << "compare: no PDE checkpoint at t=" << t2 << "\n";
        status = 2;
        continue;
      }
      double l1 = 0;
      int j = 0;
      for (auto& [uc2, slot] : row) {
        double e = slot.first / slot.second;
        auto pit = it->second.find(j);
        double p = pit != it->second.end() ? pit->second.first / pit->second.second : 0.0;
        l1 += std::abs(e - p) * boxes.width();
        ++j;
      }
      rep << N << "," << t2 << "," << l1 << "\n";
      std::cout << "N=" << N << " t=" << t2 << " L1=" << l1 << "\n";
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boundary-driven disordered lattice gas laboratory"};
  app.require_subcommand(1);
  std::string config_path, sim_dir, pde_dir;

  auto add_cfg = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON")->required();
  };
  add_cfg(app.add_subcommand("gen-disorder", "sample and store a quenched field"));
  add_cfg(app.add_subcommand("estimate-diffusion", "variational D(rho) table"));
  add_cfg(app.add_subcommand("simulate", "KMC trajectories with checkpoints"));
  add_cfg(app.add_subcommand("pde-solve", "finite-volume solve of the macroscopic equation"));
  add_cfg(app.add_subcommand("hydrostatic", "stationary profile vs stationary PDE"));
  add_cfg(app.add_subcommand("oracle", "exact finite-state checks on a tiny lattice"));
  auto* cmp = app.add_subcommand("compare", "empirical vs PDE comparison report");
  cmp->add_option("--sim", sim_dir, "simulate experiment directory")->required();
  cmp->add_option("--pde", pde_dir, "pde-solve experiment directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("compare")) return cmd_compare(sim_dir, pde_dir);
    ExperimentConfig cfg = load_config(config_path);
    if (app.got_subcommand("gen-disorder")) return cmd_gen_disorder(cfg);
    if (app.got_subcommand("estimate-diffusion")) return cmd_estimate_diffusion(cfg);
    if (app.got_subcommand("simulate")) return cmd_simulate(cfg);
    if (app.got_subcommand("pde-solve")) return cmd_pde_solve(cfg);
    if (app.got_subcommand("hydrostatic")) return cmd_hydrostatic(cfg);
    if (app.got_subcommand("oracle")) return cmd_oracle(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
