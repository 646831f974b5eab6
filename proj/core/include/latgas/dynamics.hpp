#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "latgas/configuration.hpp"
#include "latgas/thermo.hpp"

namespace latgas {

// Kawasaki exchange rate exp(-(H(eta^{x,y}) - H(eta))/2) for the bond
// (x, x+e). Defined for every eta; no-op swaps evaluate to 1.
double bulk_rate(const DisorderField& field, const Configuration& eta, const Bond& bond);

// Birth/death rate at a face site: exp(-+(alpha(x) + lambda0(b))/2)
// for occupied/empty. Reversible w.r.t. the product measure at b.
double boundary_rate(const DisorderField& field, const ThermoContext& ctx,
                     double b_value, const Site& site, const Configuration& eta);

// All potential events of the generator N^2 (L0 + Lb): every bond (rate 0
// while the swap is a no-op) followed by every face site. Rates live in a
// complete-binary-tree partial-sum structure: O(log M) pick and update.
class EventTable {
 public:
  EventTable(const DisorderField& field, const ThermoContext& ctx,
             const ProfileSpec& boundary, const Configuration& eta);

  std::size_t event_count() const { return n_events_; }
  std::size_t bond_count() const { return n_bonds_; }
  bool is_bulk(std::size_t ev) const { return ev < n_bonds_; }
  double rate(std::size_t ev) const { return tree_[leaf0_ + ev]; }
  double total_rate() const { return tree_[1]; }

  // Leaf with cumulative rate containing u * total_rate, u in [0,1).
  std::size_t sample_event(double u) const;

  // Execute the event on eta and refresh the touched rates. A full
  // rebuild runs every 2^20 applications to wash out float drift.
  void apply(std::size_t ev, Configuration& eta);

  void rebuild(const Configuration& eta);

  // Bond and site accessors for callers interpreting an event index.
  const Bond& bond_of(std::size_t ev) const;
  std::size_t flip_site_of(std::size_t ev) const;

 private:
  void set_rate(std::size_t ev, double r);
  double compute_bulk(const Configuration& eta, std::size_t bond_idx) const;
  double compute_boundary(const Configuration& eta, std::size_t k) const;
  void refresh_site(const Configuration& eta, std::size_t site);

  const DisorderField* field_;
  double n2_;  // diffusive speed-up N^2
  std::size_t n_bonds_ = 0;
  std::size_t n_events_ = 0;
  std::vector<std::size_t> bond_from_, bond_to_;
  std::vector<std::size_t> flip_site_;      // boundary event -> site index
  std::vector<double> flip_rate_occ_;       // rate when occupied
  std::vector<double> flip_rate_emp_;       // rate when empty
  std::vector<std::vector<std::uint32_t>> incident_bonds_;  // site -> bond ids
  std::vector<std::int64_t> boundary_event_of_site_;        // -1 if bulk site
  std::size_t leaf0_ = 1;
  std::vector<double> tree_;
  std::uint64_t applies_since_rebuild_ = 0;
};

struct StepResult {
  std::size_t event;
  double dt;  // macroscopic time increment
};

// One exact-simulation step: exponential waiting time at the current
// total rate, event picked proportionally to its rate, state updated.
StepResult step(EventTable& table, Configuration& eta, std::mt19937_64& rng);

struct TrajectoryRecorder {
  std::vector<double> checkpoint_times;  // nondecreasing macroscopic times
  int box_radius = 0;                    // coarse-grain radius for checkpoints
  // Start of the time-averaging / flux window; +inf disables averaging
  // and counts flux over the whole run.
  double average_start = std::numeric_limits<double>::infinity();
};

struct RunRecord {
  std::vector<double> times;
  std::vector<std::vector<double>> coarse_fields;  // per checkpoint, per site
  std::vector<std::vector<std::uint8_t>> clipped;  // blocks clipped at faces
  std::vector<double> section_crossings;  // net signed, per section x1 in [-N, N-1]
  double flux_window = 0.0;               // elapsed macro time of the flux window
  std::vector<double> time_avg_occupation;  // empty when averaging disabled
  double average_window = 0.0;
  std::uint64_t events = 0;
  Configuration final_state;
};

RunRecord run_until(const DisorderField& field, const ThermoContext& ctx,
                    const ProfileSpec& boundary, Configuration eta, double t_end,
                    const TrajectoryRecorder& recorder, std::uint64_t seed);

// Block average of eta over sup-balls of the given radius; blocks are
// clipped at the faces and flagged.
std::vector<double> coarse_grain(const CylinderLattice& lattice, const Configuration& eta,
                                 int radius, std::vector<std::uint8_t>* clipped = nullptr);

// Net signed crossings per section per unit macroscopic time.
std::vector<double> section_flux(const RunRecord& record);

}  // namespace latgas
