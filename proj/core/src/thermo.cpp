#include "latgas/thermo.hpp"

#include <cmath>
#include <stdexcept>

namespace latgas {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
  }
}

}  // namespace

ProfileSpec ProfileSpec::constant(double rho, double b) {
  return {[rho](const MacroPoint&) { return rho; },
          [b](const MacroPoint&) { return b; }};
}

ProfileSpec ProfileSpec::linear(double b_minus, double b_plus) {
  auto f = [b_minus, b_plus](const MacroPoint& u) {
    return 0.5 * (b_minus + b_plus) + 0.5 * (b_plus - b_minus) * u[0];
  };
  return {f, f};
}

ProfileSpec ProfileSpec::constant_with_faces(double rho0, double b_minus, double b_plus) {
  return {[rho0](const MacroPoint&) { return rho0; },
          [b_minus, b_plus](const MacroPoint& u) { return u[0] < 0 ? b_minus : b_plus; }};
}

MacroPoint macro_point(const CylinderLattice& lattice, const Site& s) {
  MacroPoint u{};
  u[0] = static_cast<double>(s.c[0]) / lattice.half_length();
  for (int j = 1; j < lattice.dim(); ++j)
    u[j] = static_cast<double>(s.c[j]) / lattice.transverse_size();
  return u;
}

ThermoContext::ThermoContext(DisorderLaw law, int quadrature_nodes, double lambda_tol)
    : law_(law), lambda_tol_(lambda_tol) {
  if (law_.kind == LawKind::kUniformSymmetric) {
    if (quadrature_nodes < 2) throw std::invalid_argument("thermo: need >= 2 quadrature nodes");
    std::vector<double> x, w;
    gauss_legendre(quadrature_nodes, x, w);
    nodes_.resize(x.size());
    weights_.resize(w.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      nodes_[i] = law_.bound * x[i];
      weights_[i] = 0.5 * w[i];  // the law's density is 1/(2A) on [-A,A]
    }
  }
}

double ThermoContext::sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double ThermoContext::expect(const std::function<double(double)>& f) const {
  switch (law_.kind) {
    case LawKind::kConstantZero:
      return f(0.0);
    case LawKind::kTwoPointSymmetric:
      return 0.5 * (f(-law_.bound) + f(law_.bound));
    case LawKind::kUniformSymmetric: {
      double s = 0;
      for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
      return s;
    }
  }
  return 0.0;
}

double ThermoContext::rho_of_lambda(double lambda) const {
  return expect([lambda](double a) { return sigmoid(a + lambda); });
}

double ThermoContext::susceptibility_at(double lambda) const {
  return expect([lambda](double a) {
    double p = sigmoid(a + lambda);
    return p * (1 - p);
  });
}

double ThermoContext::lambda0(double rho) const {
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("lambda0: rho must be in (0,1)");
  double lo = -law_.bound - 40.0, hi = law_.bound + 40.0;
  double lam = std::log(rho / (1 - rho));  // exact for the constant law
  lam = std::min(std::max(lam, lo), hi);
  // Safeguarded Newton: keep the bracket, bisect when Newton leaves it.
  for (int it = 0; it < 200; ++it) {
    double r = rho_of_lambda(lam);
    if (std::abs(r - rho) <= lambda_tol_) return lam;
    if (r < rho)
      lo = lam;
    else
      hi = lam;
    double dr = susceptibility_at(lam);
    double next = dr > 0 ? lam - (r - rho) / dr : lam;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lam = next;
  }
  return lam;
}

double ThermoContext::chi(double rho) const {
  if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("chi: rho must be in (0,1)");
  return susceptibility_at(lambda0(rho));
}

Configuration sample_profile_configuration(const DisorderField& field,
                                           const ProfileSpec& profile,
                                           const ThermoContext& ctx,
                                           std::uint64_t seed) {
  const CylinderLattice& lat = field.lattice;
  Configuration eta = Configuration::empty(lat);
  double last_rho = -1, last_lam = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    double rho = profile.density(macro_point(lat, lat.site_at(i)));
    if (rho <= 0.0) {
      eta.occ[i] = 0;
    } else if (rho >= 1.0) {
      eta.occ[i] = 1;
    } else {
      if (rho != last_rho) {
        last_lam = ctx.lambda0(rho);
        last_rho = rho;
      }
      double p = ThermoContext::sigmoid(field.at(i) + last_lam);
      eta.occ[i] = counter_uniform(seed, i) < p ? 1 : 0;
    }
  }
  return eta;
}

}  // namespace latgas
