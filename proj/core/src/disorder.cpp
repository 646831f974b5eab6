#include "latgas/disorder.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace latgas {

std::string law_name(LawKind kind) {
  switch (kind) {
    case LawKind::kConstantZero: return "constant-zero";
    case LawKind::kUniformSymmetric: return "uniform-symmetric";
    case LawKind::kTwoPointSymmetric: return "two-point-symmetric";
  }
  return "?";
}

LawKind law_from_name(const std::string& name) {
  if (name == "constant-zero") return LawKind::kConstantZero;
  if (name == "uniform-symmetric" || name == "uniform") return LawKind::kUniformSymmetric;
  if (name == "two-point-symmetric" || name == "two-point") return LawKind::kTwoPointSymmetric;
  throw std::invalid_argument("unknown disorder law: " + name);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = mix64(mix64(seed) ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double law_sample(const DisorderLaw& law, std::uint64_t seed, std::uint64_t counter) {
  switch (law.kind) {
    case LawKind::kConstantZero:
      return 0.0;
    case LawKind::kUniformSymmetric:
      return law.bound * (2.0 * counter_uniform(seed, counter) - 1.0);
    case LawKind::kTwoPointSymmetric:
      return counter_uniform(seed, counter) < 0.5 ? -law.bound : law.bound;
  }
  return 0.0;
}

DisorderField sample_field(const CylinderLattice& lattice, const DisorderLaw& law,
                           std::uint64_t seed) {
  DisorderField f{lattice, law, seed, {}};
  f.values.resize(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) f.values[i] = law_sample(law, seed, i);
  return f;
}

FieldStatistics field_statistics(const DisorderField& field, std::size_t bins) {
  FieldStatistics s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0;
  for (double v : field.values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = field.values.empty() ? 0.0 : sum / static_cast<double>(field.values.size());
  s.histogram.assign(bins, 0);
  double A = field.law.bound > 0 ? field.law.bound : 1.0;
  for (double v : field.values) {
    double t = (v + A) / (2 * A);
    auto b = static_cast<std::size_t>(std::clamp(t, 0.0, 1.0) * static_cast<double>(bins));
    if (b == bins) b = bins - 1;
    ++s.histogram[b];
  }
  return s;
}

void save_field_csv(const DisorderField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  for (double v : field.values) out << v << "\n";
}

std::vector<double> load_field_values_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

}  // namespace latgas
