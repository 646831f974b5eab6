#include "latgas/diffusion.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace latgas {

namespace {

std::vector<Coords> cube_offsets(int d, int k) {
  std::vector<Coords> out;
  Coords c{};
  if (d == 1) {
    for (int x = -k; x <= k; ++x) out.push_back({x, 0, 0});
  } else if (d == 2) {
    for (int x = -k; x <= k; ++x)
      for (int y = -k; y <= k; ++y) out.push_back({x, y, 0});
  } else {
    for (int x = -k; x <= k; ++x)
      for (int y = -k; y <= k; ++y)
        for (int z = -k; z <= k; ++z) out.push_back({x, y, z});
  }
  (void)c;
  return out;
}

Coords add(const Coords& a, const Coords& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

Coords sub(const Coords& a, const Coords& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

Coords unit(int direction) {
  Coords e{};
  e[direction] = 1;
  return e;
}

}  // namespace

LocalFunctionBasis LocalFunctionBasis::degree2(int d, int k) {
  LocalFunctionBasis basis;
  basis.d = d;
  basis.radius = k;
  auto cube = cube_offsets(d, k);
  for (std::size_t i = 0; i < cube.size(); ++i) {
    LocalFunction g;
    g.eta_count = 1;
    g.eta_sites[0] = cube[i];
    basis.generators.push_back(g);
    g.has_alpha = true;
    g.alpha_site = cube[i];
    basis.generators.push_back(g);
  }
  for (std::size_t i = 0; i < cube.size(); ++i)
    for (std::size_t j = i + 1; j < cube.size(); ++j) {
      LocalFunction g;
      g.eta_count = 2;
      g.eta_sites[0] = cube[i];
      g.eta_sites[1] = cube[j];
      basis.generators.push_back(g);
      g.has_alpha = true;
      g.alpha_site = cube[i];
      basis.generators.push_back(g);
      g.alpha_site = cube[j];
      basis.generators.push_back(g);
    }
  return basis;
}

std::size_t WindowGeom::size() const {
  std::size_t s = 1;
  for (int j = 0; j < d; ++j) s *= static_cast<std::size_t>(2 * radius + 1);
  return s;
}

std::size_t WindowGeom::index(const Coords& offset) const {
  std::size_t idx = 0;
  for (int j = 0; j < d; ++j) {
    if (offset[j] < -radius || offset[j] > radius)
      throw std::domain_error("window too small for requested offset");
    idx = idx * static_cast<std::size_t>(2 * radius + 1) +
          static_cast<std::size_t>(offset[j] + radius);
  }
  return idx;
}

namespace {

// g(tau_x eta', alpha) where eta' optionally has sites 0 and e swapped.
double eval_translate(const LocalFunction& g, const WindowGeom& geom,
                      const std::vector<std::uint8_t>& eta, const std::vector<double>& alpha,
                      const Coords& shift, bool swapped, const Coords& e) {
  const Coords zero{};
  double v = 1.0;
  for (int j = 0; j < g.eta_count; ++j) {
    Coords site = add(g.eta_sites[j], shift);
    Coords lookup = site;
    if (swapped) {
      if (site == zero)
        lookup = e;
      else if (site == e)
        lookup = zero;
    }
    v *= eta[geom.index(lookup)];
    if (v == 0.0 && !g.has_alpha) return 0.0;
  }
  if (g.has_alpha) v *= alpha[geom.index(add(g.alpha_site, shift))];
  return v;
}

}  // namespace

double grad_gamma(const LocalFunction& g, const WindowGeom& geom,
                  const std::vector<std::uint8_t>& eta, const std::vector<double>& alpha,
                  int direction) {
  const Coords zero{};
  const Coords e = unit(direction);
  // Only translates whose eta-support touches {0, e} contribute.
  std::vector<Coords> shifts;
  for (int j = 0; j < g.eta_count; ++j) {
    for (const Coords& t : {zero, e}) {
      Coords x = sub(t, g.eta_sites[j]);
      bool seen = false;
      for (const Coords& s : shifts) seen = seen || s == x;
      if (!seen) shifts.push_back(x);
    }
  }
  double sum = 0.0;
  for (const Coords& x : shifts)
    sum += eval_translate(g, geom, eta, alpha, x, true, e) -
           eval_translate(g, geom, eta, alpha, x, false, e);
  return sum;
}

QuadraticBlocks estimate_quadratic_blocks(const LocalFunctionBasis& basis,
                                          const DisorderLaw& law, double rho,
                                          long long samples, std::uint64_t seed,
                                          int batches) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::domain_error("estimate_quadratic_blocks: rho must be in (0,1)");
  if (samples < 1) throw std::invalid_argument("estimate_quadratic_blocks: samples >= 1");
  const int d = basis.d;
  const int M = static_cast<int>(basis.generators.size());
  WindowGeom geom{d, 2 * basis.radius + 1};
  const std::size_t W = geom.size();

  ThermoContext ctx(law);
  const double lam0 = ctx.lambda0(rho);

  QuadraticBlocks out;
  out.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> alpha(W);
  std::vector<std::uint8_t> eta(W);
  Eigen::MatrixXd gm(d, M);

  batches = std::max(1, batches);
  long long per_batch = (samples + batches - 1) / batches;
  long long done = 0;
  for (int b = 0; b < batches && done < samples; ++b) {
    long long nb = std::min<long long>(per_batch, samples - done);
    done += nb;
    Eigen::VectorXd P = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d, M);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M, M);
    for (long long s = 0; s < nb; ++s) {
      for (std::size_t i = 0; i < W; ++i) {
        switch (law.kind) {
          case LawKind::kConstantZero: alpha[i] = 0.0; break;
          case LawKind::kUniformSymmetric: alpha[i] = law.bound * (2 * unif(rng) - 1); break;
          case LawKind::kTwoPointSymmetric:
            alpha[i] = unif(rng) < 0.5 ? -law.bound : law.bound;
            break;
        }
      }
      for (std::size_t i = 0; i < W; ++i)
        eta[i] = unif(rng) < ThermoContext::sigmoid(alpha[i] + lam0) ? 1 : 0;

      for (int i = 0; i < d; ++i) {
        Coords e = unit(i);
        std::size_t i0 = geom.index(Coords{});
        std::size_t ie = geom.index(e);
        double de = static_cast<double>(eta[i0]) - static_cast<double>(eta[ie]);
        double C = std::exp(0.5 * (alpha[ie] - alpha[i0]) * de);
        double grad_eta = -de;  // eta(e) - eta(0)
        for (int m = 0; m < M; ++m)
          gm(i, m) = grad_gamma(basis.generators[m], geom, eta, alpha, i);
        P[i] += C * grad_eta * grad_eta;
        for (int m = 0; m < M; ++m) R(i, m) += C * grad_eta * gm(i, m);
        for (int m = 0; m < M; ++m)
          for (int n = m; n < M; ++n) G(m, n) += C * gm(i, m) * gm(i, n);
      }
    }
    double inv = 1.0 / static_cast<double>(nb);
    P *= inv;
    R *= inv;
    G *= inv;
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < m; ++n) G(m, n) = G(n, m);
    out.P_batches.push_back(P);
    out.R_batches.push_back(R);
    out.G_batches.push_back(G);
  }

  int nb = static_cast<int>(out.P_batches.size());
  out.P = Eigen::VectorXd::Zero(d);
  out.R = Eigen::MatrixXd::Zero(d, M);
  out.G = Eigen::MatrixXd::Zero(M, M);
  for (int b = 0; b < nb; ++b) {
    out.P += out.P_batches[b];
    out.R += out.R_batches[b];
    out.G += out.G_batches[b];
  }
  out.P /= nb;
  out.R /= nb;
  out.G /= nb;
  return out;
}

Eigen::MatrixXd assemble_diffusion(const Eigen::VectorXd& P, const Eigen::MatrixXd& R,
                                   const Eigen::MatrixXd& G, double chi) {
  if (!(chi > 0)) throw std::domain_error("assemble_diffusion: chi must be > 0");
  const int d = static_cast<int>(P.size());
  const int M = static_cast<int>(G.rows());
  Eigen::MatrixXd D = P.asDiagonal();
  if (M > 0) {
    Eigen::MatrixXd Gs = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gs);
    const auto& ev = es.eigenvalues();
    double floor = 1e-8 * std::max(ev.maxCoeff(), 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(M);
    for (int m = 0; m < M; ++m)
      if (ev[m] > floor && ev[m] > 0) inv[m] = 1.0 / ev[m];
    Eigen::MatrixXd Gpinv =
        es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    D -= R * Gpinv * R.transpose();
  }
  D /= 2.0 * chi;
  return 0.5 * (D + D.transpose());
}

DiffusionEstimate estimate_diffusion(const LocalFunctionBasis& basis, const DisorderLaw& law,
                                     double rho, long long samples, std::uint64_t seed) {
  auto blocks = estimate_quadratic_blocks(basis, law, rho, samples, seed);
  ThermoContext ctx(law);
  double chi = ctx.chi(rho);
  DiffusionEstimate est;
  est.D = assemble_diffusion(blocks.P, blocks.R, blocks.G, chi);
  const int d = basis.d;
  int nb = static_cast<int>(blocks.P_batches.size());
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < nb; ++b) {
    Eigen::MatrixXd Db =
        assemble_diffusion(blocks.P_batches[b], blocks.R_batches[b], blocks.G_batches[b], chi);
    mean += Db;
    sq += Db.cwiseProduct(Db);
  }
  mean /= nb;
  sq /= nb;
  est.stderr_ = Eigen::MatrixXd::Zero(d, d);
  if (nb > 1)
    est.stderr_ = ((sq - mean.cwiseProduct(mean)).cwiseMax(0.0) / (nb - 1)).cwiseSqrt();
  return est;
}

DiffusionTensorTable DiffusionTensorTable::identity(int d) {
  DiffusionTensorTable t;
  t.d = d;
  t.analytic_identity = true;
  t.rho_grid = {0.0, 1.0};
  t.matrices = {Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(d, d)};
  t.stderrs = {Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
  return t;
}

Eigen::MatrixXd DiffusionTensorTable::interpolate(double rho) const {
  if (rho_grid.empty()) throw std::runtime_error("diffusion table: empty grid");
  if (rho <= rho_grid.front()) return matrices.front();
  if (rho >= rho_grid.back()) return matrices.back();
  auto it = std::lower_bound(rho_grid.begin(), rho_grid.end(), rho);
  std::size_t j = static_cast<std::size_t>(it - rho_grid.begin());
  if (rho_grid[j] == rho) return matrices[j];
  double t = (rho - rho_grid[j - 1]) / (rho_grid[j] - rho_grid[j - 1]);
  return (1 - t) * matrices[j - 1] + t * matrices[j];
}

void DiffusionTensorTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "rho,i,j,D_ij,stderr_ij\n";
  for (std::size_t g = 0; g < rho_grid.size(); ++g)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        out << rho_grid[g] << "," << i << "," << j << "," << matrices[g](i, j) << ","
            << stderrs[g](i, j) << "\n";
}

DiffusionTensorTable DiffusionTensorTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::map<double, std::vector<std::tuple<int, int, double, double>>> rows;
  int dmax = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double rho, Dij, err;
    int i, j;
    char comma;
    ss >> rho >> comma >> i >> comma >> j >> comma >> Dij >> comma >> err;
    rows[rho].emplace_back(i, j, Dij, err);
    dmax = std::max({dmax, i + 1, j + 1});
  }
  DiffusionTensorTable t;
  t.d = dmax;
  for (auto& [rho, entries] : rows) {
    t.rho_grid.push_back(rho);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(dmax, dmax);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(dmax, dmax);
    for (auto& [i, j, v, e] : entries) {
      D(i, j) = v;
      E(i, j) = e;
    }
    t.matrices.push_back(D);
    t.stderrs.push_back(E);
  }
  return t;
}

DiffusionTensorTable build_table(const LocalFunctionBasis& basis, const DisorderLaw& law,
                                 const std::vector<double>& rho_grid, long long samples,
                                 std::uint64_t seed) {
  DiffusionTensorTable t;
  t.d = basis.d;
  for (std::size_t g = 0; g < rho_grid.size(); ++g) {
    double rho = rho_grid[g];
    if (!(rho > 0 && rho < 1)) throw std::domain_error("build_table: grid must be inside (0,1)");
    auto est = estimate_diffusion(basis, law, rho, samples, mix64(seed + g));
    if ((est.D - est.D.transpose()).cwiseAbs().maxCoeff() > 1e-9)
      throw std::runtime_error("build_table: asymmetric D at rho=" + std::to_string(rho));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.D);
    if (es.eigenvalues().minCoeff() <= 0)
      throw std::runtime_error("build_table: non-PD D at rho=" + std::to_string(rho) +
                               " (min eigenvalue " + std::to_string(es.eigenvalues().minCoeff()) +
                               ")");
    t.rho_grid.push_back(rho);
    t.matrices.push_back(est.D);
    t.stderrs.push_back(est.stderr_);
  }
  return t;
}

}  // namespace latgas
