#include "latgas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace latgas {

using json = nlohmann::json;

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad value at " + path + "." + key);
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  read_field(j, "experiment", cfg.experiment, "");
  if (j.contains("lattice")) {
    const json& l = j["lattice"];
    read_field(l, "d", cfg.d, "lattice");
    read_field(l, "N_list", cfg.N_list, "lattice");
    read_field(l, "transverse_size", cfg.transverse_size, "lattice");
  }
  if (j.contains("disorder")) {
    const json& d = j["disorder"];
    std::string kind = law_name(cfg.law.kind);
    read_field(d, "law", kind, "disorder");
    double A = cfg.law.bound;
    read_field(d, "A", A, "disorder");
    cfg.law = DisorderLaw{law_from_name(kind), A};
    read_field(d, "seed", cfg.disorder_seed, "disorder");
    read_field(d, "samples", cfg.disorder_samples, "disorder");
  }
  if (j.contains("boundary")) {
    read_field(j["boundary"], "b_minus", cfg.b_minus, "boundary");
    read_field(j["boundary"], "b_plus", cfg.b_plus, "boundary");
  }
  if (j.contains("initial_profile")) {
    read_field(j["initial_profile"], "kind", cfg.initial_kind, "initial_profile");
    read_field(j["initial_profile"], "value", cfg.initial_value, "initial_profile");
  }
  if (j.contains("diffusion")) {
    const json& d = j["diffusion"];
    read_field(d, "source", cfg.diffusion_source, "diffusion");
    read_field(d, "table_path", cfg.diffusion_table_path, "diffusion");
    read_field(d, "basis_radius", cfg.basis_radius, "diffusion");
    read_field(d, "samples", cfg.diffusion_samples, "diffusion");
    read_field(d, "rho_grid", cfg.diffusion_rho_grid, "diffusion");
  }
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    read_field(s, "t_end", cfg.t_end, "schedule");
    read_field(s, "checkpoints", cfg.checkpoints, "schedule");
    read_field(s, "replicas", cfg.replicas, "schedule");
    read_field(s, "burn_in", cfg.burn_in, "schedule");
    read_field(s, "average_time", cfg.average_time, "schedule");
    read_field(s, "seed", cfg.kmc_seed, "schedule");
  }
  if (j.contains("pde")) read_field(j["pde"], "M1", cfg.pde_M1, "pde");
  if (j.contains("comparison"))
    read_field(j["comparison"], "box_fraction", cfg.box_fraction, "comparison");
  read_field(j, "output_dir", cfg.output_dir, "");

  if (!(cfg.b_minus > 0 && cfg.b_minus < 1))
    throw std::runtime_error("config: boundary.b_minus must be in (0,1)");
  if (!(cfg.b_plus > 0 && cfg.b_plus < 1))
    throw std::runtime_error("config: boundary.b_plus must be in (0,1)");
  if (!std::is_sorted(cfg.N_list.begin(), cfg.N_list.end()))
    throw std::runtime_error("config: lattice.N_list must be increasing");
  std::sort(cfg.checkpoints.begin(), cfg.checkpoints.end());
  for (double t : cfg.checkpoints)
    if (t < 0 || t > cfg.t_end)
      throw std::runtime_error("config: schedule.checkpoints must lie in [0, t_end]");
  if (cfg.diffusion_source != "identity" && cfg.diffusion_source != "table" &&
      cfg.diffusion_source != "estimate")
    throw std::runtime_error("config: diffusion.source must be identity|table|estimate");
  return cfg;
}

std::string config_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["lattice"] = {{"d", cfg.d}, {"N_list", cfg.N_list}, {"transverse_size", cfg.transverse_size}};
  j["disorder"] = {{"law", law_name(cfg.law.kind)},
                   {"A", cfg.law.bound},
                   {"seed", cfg.disorder_seed},
                   {"samples", cfg.disorder_samples}};
  j["boundary"] = {{"b_minus", cfg.b_minus}, {"b_plus", cfg.b_plus}};
  j["initial_profile"] = {{"kind", cfg.initial_kind}, {"value", cfg.initial_value}};
  j["diffusion"] = {{"source", cfg.diffusion_source},
                    {"table_path", cfg.diffusion_table_path},
                    {"basis_radius", cfg.basis_radius},
                    {"samples", cfg.diffusion_samples},
                    {"rho_grid", cfg.diffusion_rho_grid}};
  j["schedule"] = {{"t_end", cfg.t_end},     {"checkpoints", cfg.checkpoints},
                   {"replicas", cfg.replicas}, {"burn_in", cfg.burn_in},
                   {"average_time", cfg.average_time}, {"seed", cfg.kmc_seed}};
  j["pde"] = {{"M1", cfg.pde_M1}};
  j["comparison"] = {{"box_fraction", cfg.box_fraction}};
  j["output_dir"] = cfg.output_dir;
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string s = config_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

ProfileSpec initial_profile(const ExperimentConfig& cfg) {
  if (cfg.initial_kind == "constant")
    return ProfileSpec::constant_with_faces(cfg.initial_value, cfg.b_minus, cfg.b_plus);
  if (cfg.initial_kind == "linear") return ProfileSpec::linear(cfg.b_minus, cfg.b_plus);
  throw std::runtime_error("config: initial_profile.kind must be constant|linear");
}

DiffusionTensorTable diffusion_table(const ExperimentConfig& cfg) {
  if (cfg.diffusion_source == "identity") {
    if (cfg.law.kind != LawKind::kConstantZero)
      throw std::runtime_error(
          "config: diffusion.source=identity requires constant-zero disorder; "
          "provide an estimated table");
    return DiffusionTensorTable::identity(cfg.d);
  }
  if (cfg.diffusion_source == "estimate")
    return build_table(LocalFunctionBasis::degree2(cfg.d, cfg.basis_radius), cfg.law,
                       cfg.diffusion_rho_grid, cfg.diffusion_samples, cfg.kmc_seed);
  if (cfg.diffusion_table_path.empty())
    throw std::runtime_error("config: diffusion.table_path required for source=table");
  return DiffusionTensorTable::load_csv(cfg.diffusion_table_path);
}

CylinderLattice lattice_for(const ExperimentConfig& cfg, int N) {
  int ts = cfg.transverse_size > 0 ? cfg.transverse_size : N;
  return CylinderLattice(cfg.d, N, ts);
}

BoxPartition::BoxPartition(double box_fraction) {
  if (!(box_fraction > 0 && box_fraction <= 2))
    throw std::invalid_argument("box_fraction out of range");
  K = std::max(1, static_cast<int>(std::lround(2.0 / box_fraction)));
}

int BoxPartition::box_of(int x1, int N) const {
  double u = static_cast<double>(x1) / N;
  int j = static_cast<int>((u + 1.0) / 2.0 * K);
  return std::clamp(j, 0, K - 1);
}

std::vector<double> BoxPartition::average_configuration(
    const CylinderLattice& lat, const std::vector<double>& site_values) const {
  std::vector<double> sum(K, 0.0), cnt(K, 0.0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    int j = box_of(lat.site_at(i).c[0], lat.half_length());
    sum[j] += site_values[i];
    cnt[j] += 1.0;
  }
  for (int j = 0; j < K; ++j) sum[j] = cnt[j] > 0 ? sum[j] / cnt[j] : 0.0;
  return sum;
}

std::vector<double> BoxPartition::average_macro_field(const MacroField& f) const {
  std::vector<double> sum(K, 0.0), cnt(K, 0.0);
  const MacroGrid& g = f.grid;
  int n2 = g.d >= 2 ? g.Mt : 1;
  int n3 = g.d >= 3 ? g.Mt : 1;
  for (int i1 = 0; i1 < g.M1; ++i1) {
    double u = g.axial_center(i1);
    int j = std::clamp(static_cast<int>((u + 1.0) / 2.0 * K), 0, K - 1);
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i3 = 0; i3 < n3; ++i3) {
        sum[j] += f.values[g.index(i1, i2, i3)];
        cnt[j] += 1.0;
      }
  }
  for (int j = 0; j < K; ++j) sum[j] = cnt[j] > 0 ? sum[j] / cnt[j] : 0.0;
  return sum;
}

int worker_count() {
  if (const char* env = std::getenv("LATGAS_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

// Deterministic fan-out: each task writes its own slot, so the merge
// order does not depend on scheduling.
void parallel_tasks(int n, const std::function<void(int)>& task) {
  int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) task(i);
    });
  for (auto& th : pool) th.join();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  return mix64(mix64(base ^ mix64(a)) ^ mix64(b * 0x9e3779b97f4a7c15ULL + c));
}

}  // namespace

ComparisonReport run_hydrodynamic(const ExperimentConfig& cfg) {
  ComparisonReport report;
  report.hash = config_hash(cfg);
  ProfileSpec profile = initial_profile(cfg);
  DiffusionTensorTable table = diffusion_table(cfg);
  FluxFunction flux = FluxFunction::from_table(table);
  BoxPartition boxes(cfg.box_fraction);
  ThermoContext ctx(cfg.law);

  std::vector<double> times = cfg.checkpoints.empty()
                                  ? std::vector<double>{cfg.t_end}
                                  : cfg.checkpoints;

  // The macroscopic equation does not depend on N; solve once.
  MacroGrid grid{cfg.d, cfg.pde_M1, cfg.d > 1 ? cfg.pde_M1 / 2 : 1};
  MacroField rho0 = MacroField::constant(grid, 0.0, cfg.b_minus, cfg.b_plus);
  for (int i1 = 0; i1 < grid.M1; ++i1) {
    MacroPoint u{grid.axial_center(i1), 0, 0};
    double v = profile.density(u);
    int n2 = grid.d >= 2 ? grid.Mt : 1;
    int n3 = grid.d >= 3 ? grid.Mt : 1;
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i3 = 0; i3 < n3; ++i3) rho0.values[grid.index(i1, i2, i3)] = v;
  }
  SolveResult pde = solve(rho0, flux, times.back(), times);
  std::vector<std::vector<double>> pde_boxes;
  for (const MacroField& f : pde.checkpoints)
    pde_boxes.push_back(boxes.average_macro_field(f));

  for (int N : cfg.N_list) {
    CylinderLattice lat = lattice_for(cfg, N);
    int R = cfg.replicas, S = cfg.disorder_samples;
    // emp[sample][replica][checkpoint][box]
    std::vector<std::vector<std::vector<std::vector<double>>>> emp(
        S, std::vector<std::vector<std::vector<double>>>(R));

    for (int s = 0; s < S; ++s) {
      DisorderField field =
          sample_field(lat, cfg.law, derive_seed(cfg.disorder_seed, N, s, 0));
      parallel_tasks(R, [&](int r) {
        std::uint64_t seed = derive_seed(cfg.kmc_seed, N, s, r + 1);
        Configuration eta = sample_profile_configuration(field, profile, ctx, seed);
        TrajectoryRecorder rec;
        rec.checkpoint_times = times;
        RunRecord run = run_until(field, ctx, profile, std::move(eta), times.back(), rec,
                                  mix64(seed ^ 0xabcdef12345ULL));
        for (const auto& snap : run.coarse_fields)
          emp[s][r].push_back(boxes.average_configuration(lat, snap));
      });
    }

    for (std::size_t t = 0; t < times.size(); ++t) {
      std::vector<double> mean(boxes.K, 0.0), var(boxes.K, 0.0);
      int total = R * S;
      for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r)
          for (int j = 0; j < boxes.K; ++j) mean[j] += emp[s][r][t][j];
      for (int j = 0; j < boxes.K; ++j) mean[j] /= total;
      for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r)
          for (int j = 0; j < boxes.K; ++j) {
            double dlt = emp[s][r][t][j] - mean[j];
            var[j] += dlt * dlt;
          }
      ComparisonEntry entry;
      entry.N = N;
      entry.time = times[t];
      double err2 = 0;
      for (int j = 0; j < boxes.K; ++j) {
        entry.l1 += std::abs(mean[j] - pde_boxes[t][j]) * boxes.width();
        double se = total > 1 ? std::sqrt(var[j] / (total - 1) / total) : 0.0;
        err2 += se * se * boxes.width() * boxes.width();
      }
      entry.stat_err = std::sqrt(err2);
      report.entries.push_back(entry);
    }
  }
  return report;
}

HydrostaticResult run_hydrostatic(const ExperimentConfig& cfg) {
  HydrostaticResult result;
  result.report.hash = config_hash(cfg);
  DiffusionTensorTable table = diffusion_table(cfg);
  FluxFunction flux = FluxFunction::from_table(table);
  BoxPartition boxes(cfg.box_fraction);
  ThermoContext ctx(cfg.law);
  ProfileSpec profile = initial_profile(cfg);

  MacroField stat = stationary_1d(flux, cfg.b_minus, cfg.b_plus, cfg.pde_M1);
  std::vector<double> stat_boxes = boxes.average_macro_field(stat);

  for (int N : cfg.N_list) {
    CylinderLattice lat = lattice_for(cfg, N);
    int S = cfg.disorder_samples, R = std::max(1, cfg.replicas);
    int n_cols = 2 * N + 1;
    std::vector<std::vector<double>> col_profiles(S * R,
                                                  std::vector<double>(n_cols, 0.0));
    std::vector<std::vector<double>> fluxes(S * R);

    std::vector<DisorderField> fields;
    for (int s = 0; s < S; ++s)
      fields.push_back(sample_field(lat, cfg.law, derive_seed(cfg.disorder_seed, N, s, 0)));

    parallel_tasks(S * R, [&](int idx) {
      int s = idx / R, r = idx % R;
      const DisorderField& field = fields[s];
      std::uint64_t seed = derive_seed(cfg.kmc_seed, N, s, r + 1);
      Configuration eta = sample_profile_configuration(field, profile, ctx, seed);
      TrajectoryRecorder rec;
      rec.average_start = cfg.burn_in;
      double t_end = cfg.burn_in + cfg.average_time;
      RunRecord run = run_until(field, ctx, profile, std::move(eta), t_end, rec,
                                mix64(seed ^ 0x5ca1ab1eULL));
      std::vector<double>& cols = col_profiles[idx];
      std::vector<double> cnt(n_cols, 0.0);
      for (std::size_t i = 0; i < lat.size(); ++i) {
        int c = lat.site_at(i).c[0] + N;
        cols[c] += run.time_avg_occupation[i];
        cnt[c] += 1.0;
      }
      for (int c = 0; c < n_cols; ++c) cols[c] /= cnt[c];
      fluxes[idx] = section_flux(run);
    });

    // disorder/replica average
    std::vector<double> cols(n_cols, 0.0);
    std::vector<double> flux_avg(static_cast<std::size_t>(2 * N), 0.0);
    for (int idx = 0; idx < S * R; ++idx) {
      for (int c = 0; c < n_cols; ++c) cols[c] += col_profiles[idx][c];
      for (std::size_t k = 0; k < flux_avg.size(); ++k) flux_avg[k] += fluxes[idx][k];
    }
    for (double& v : cols) v /= S * R;
    for (double& v : flux_avg) v /= S * R;

    // box comparison against the stationary PDE profile
    std::vector<double> site_vals(lat.size());
    std::vector<double> emp_boxes(boxes.K, 0.0), cnt(boxes.K, 0.0);
    for (int c = 0; c < n_cols; ++c) {
      int j = boxes.box_of(c - N, N);
      emp_boxes[j] += cols[c];
      cnt[j] += 1.0;
    }
    for (int j = 0; j < boxes.K; ++j) emp_boxes[j] /= cnt[j];
    (void)site_vals;

    ComparisonEntry entry;
    entry.N = N;
    entry.time = cfg.burn_in + cfg.average_time;
    for (int j = 0; j < boxes.K; ++j)
      entry.l1 += std::abs(emp_boxes[j] - stat_boxes[j]) * boxes.width();
    // spread across replicas as the statistical error scale
    if (S * R > 1) {
      double sum = 0;
      for (int idx = 0; idx < S * R; ++idx) {
        double l1 = 0;
        std::vector<double> eb(boxes.K, 0.0), ec(boxes.K, 0.0);
        for (int c = 0; c < n_cols; ++c) {
          int j = boxes.box_of(c - N, N);
          eb[j] += col_profiles[idx][c];
          ec[j] += 1.0;
        }
        for (int j = 0; j < boxes.K; ++j) {
          double dlt = eb[j] / ec[j] - emp_boxes[j];
          l1 += dlt * dlt;
        }
        sum += l1;
      }
      entry.stat_err = std::sqrt(sum / (S * R) / (S * R));
    }
    result.report.entries.push_back(entry);
    result.profiles.push_back(cols);
    result.fick.push_back(fit_fick(cfg, N, cols, flux_avg, table));
  }
  return result;
}

FickReport fit_fick(const ExperimentConfig& cfg, int N,
                    const std::vector<double>& column_profile,
                    const std::vector<double>& section_flux_rates,
                    const DiffusionTensorTable& table) {
  FickReport rep;
  if (std::abs(cfg.b_plus - cfg.b_minus) < 1e-6) {
    rep.degenerate = true;
    return rep;
  }
  CylinderLattice lat = lattice_for(cfg, N);
  double transverse = static_cast<double>(lat.transverse_count());

  // Least-squares line through the central-half columns.
  int n_cols = static_cast<int>(column_profile.size());
  int lo = n_cols / 4, hi = n_cols - n_cols / 4;
  double su = 0, sr = 0, suu = 0, sur = 0, n = 0;
  for (int c = lo; c < hi; ++c) {
    double u = static_cast<double>(c - N) / N;
    su += u;
    sr += column_profile[c];
    suu += u * u;
    sur += u * column_profile[c];
    n += 1;
  }
  double slope = (n * sur - su * sr) / (n * suu - su * su);
  double rho_mid = sr / n;
  rep.mid_density = rho_mid;

  // Macroscopic flux: crossings per time, per transverse site, per N.
  int s_lo = std::max(0, lo), s_hi = std::min(static_cast<int>(section_flux_rates.size()), hi);
  std::vector<double> ratios;
  double flux_sum = 0;
  int flux_n = 0;
  for (int k = s_lo; k < s_hi; ++k) {
    double u = (static_cast<double>(k - N) + 0.5) / N;
    double j_macro = section_flux_rates[k] / (transverse * N);
    int c = std::clamp(k, 0, n_cols - 1);
    double rho_here = 0.5 * (column_profile[c] + column_profile[std::min(c + 1, n_cols - 1)]);
    double pred = -table.interpolate(rho_here)(0, 0) * slope;
    rep.sections.push_back({u, j_macro, pred});
    if (pred != 0) ratios.push_back(j_macro / pred);
    flux_sum += j_macro;
    ++flux_n;
  }
  rep.variational_D11 = table.interpolate(rho_mid)(0, 0);
  rep.fitted_D11 = flux_n > 0 && slope != 0 ? -(flux_sum / flux_n) / slope : 0.0;
  if (!ratios.empty()) {
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    rep.median_ratio = ratios[ratios.size() / 2];
  }
  return rep;
}

}  // namespace latgas
