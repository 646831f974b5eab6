#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latgas/lattice.hpp"

namespace latgas {

enum class LawKind { kConstantZero, kUniformSymmetric, kTwoPointSymmetric };

// Site law of the quenched field: support in [-A, A], symmetric about 0.
struct DisorderLaw {
  LawKind kind = LawKind::kConstantZero;
  double bound = 0.0;  // A; zero only for the constant law

  static DisorderLaw constant_zero() { return {LawKind::kConstantZero, 0.0}; }
  static DisorderLaw uniform(double A) { return {LawKind::kUniformSymmetric, A}; }
  static DisorderLaw two_point(double A) { return {LawKind::kTwoPointSymmetric, A}; }
};

std::string law_name(LawKind kind);
LawKind law_from_name(const std::string& name);

// Quenched field alpha on the lattice. Values are a pure function of
// (law, seed, site index), so replicas can regenerate any site cheaply.
struct DisorderField {
  CylinderLattice lattice;
  DisorderLaw law;
  std::uint64_t seed = 0;
  std::vector<double> values;

  double at(std::size_t site) const { return values[site]; }
};

struct FieldStatistics {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::size_t> histogram;  // uniform bins over [-A, A]
};

// splitmix64 finalizer; the basis of the counter-based site RNG.
std::uint64_t mix64(std::uint64_t x);
// Uniform in [0,1) from (seed, counter), independent across counters.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);
// Single-site draw from a law.
double law_sample(const DisorderLaw& law, std::uint64_t seed, std::uint64_t counter);

DisorderField sample_field(const CylinderLattice& lattice, const DisorderLaw& law,
                           std::uint64_t seed);

FieldStatistics field_statistics(const DisorderField& field, std::size_t bins = 32);

// Flat CSV, one value per site in index order.
void save_field_csv(const DisorderField& field, const std::string& path);
std::vector<double> load_field_values_csv(const std::string& path);

}  // namespace latgas
