#include "latgas/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace latgas {

double bulk_rate(const DisorderField& field, const Configuration& eta, const Bond& bond) {
  const CylinderLattice& lat = field.lattice;
  std::size_t x = lat.site_index(bond.from);
  std::size_t y = lat.bond_target(bond);
  double d_eta = static_cast<double>(eta.occ[x]) - static_cast<double>(eta.occ[y]);
  return std::exp(0.5 * (field.at(y) - field.at(x)) * d_eta);
}

double boundary_rate(const DisorderField& field, const ThermoContext& ctx,
                     double b_value, const Site& site, const Configuration& eta) {
  if (!(b_value > 0.0 && b_value < 1.0))
    throw std::domain_error("boundary_rate: reservoir density must be in (0,1)");
  const CylinderLattice& lat = field.lattice;
  if (!lat.on_boundary(site)) throw std::domain_error("boundary_rate: site not on a face");
  std::size_t x = lat.site_index(site);
  double z = 0.5 * (field.at(x) + ctx.lambda0(b_value));
  return eta.occ[x] ? std::exp(-z) : std::exp(z);
}

EventTable::EventTable(const DisorderField& field, const ThermoContext& ctx,
                       const ProfileSpec& boundary, const Configuration& eta)
    : field_(&field) {
  const CylinderLattice& lat = field.lattice;
  double N = static_cast<double>(lat.half_length());
  n2_ = N * N;

  const auto& bonds = lat.bonds();
  n_bonds_ = bonds.size();
  bond_from_.resize(n_bonds_);
  bond_to_.resize(n_bonds_);
  incident_bonds_.resize(lat.size());
  for (std::size_t b = 0; b < n_bonds_; ++b) {
    bond_from_[b] = lat.site_index(bonds[b].from);
    bond_to_[b] = lat.bond_target(bonds[b]);
    incident_bonds_[bond_from_[b]].push_back(static_cast<std::uint32_t>(b));
    incident_bonds_[bond_to_[b]].push_back(static_cast<std::uint32_t>(b));
  }

  boundary_event_of_site_.assign(lat.size(), -1);
  for (const Site& s : lat.boundary_sites()) {
    std::size_t x = lat.site_index(s);
    double b = boundary.boundary(macro_point(lat, s));
    if (!(b > 0.0 && b < 1.0))
      throw std::domain_error("event table: reservoir density must be in (0,1)");
    double z = 0.5 * (field.at(x) + ctx.lambda0(b));
    boundary_event_of_site_[x] =
        static_cast<std::int64_t>(n_bonds_ + flip_site_.size());
    flip_site_.push_back(x);
    flip_rate_occ_.push_back(std::exp(-z));
    flip_rate_emp_.push_back(std::exp(z));
  }

  n_events_ = n_bonds_ + flip_site_.size();
  std::size_t leaves = 1;
  while (leaves < n_events_) leaves <<= 1;
  leaf0_ = leaves;
  tree_.assign(2 * leaves, 0.0);
  rebuild(eta);
}

double EventTable::compute_bulk(const Configuration& eta, std::size_t b) const {
  std::size_t x = bond_from_[b], y = bond_to_[b];
  if (eta.occ[x] == eta.occ[y]) return 0.0;  // no-op swaps carry rate 0
  double d_eta = static_cast<double>(eta.occ[x]) - static_cast<double>(eta.occ[y]);
  return n2_ * std::exp(0.5 * (field_->at(y) - field_->at(x)) * d_eta);
}

double EventTable::compute_boundary(const Configuration& eta, std::size_t k) const {
  return n2_ * (eta.occ[flip_site_[k]] ? flip_rate_occ_[k] : flip_rate_emp_[k]);
}

void EventTable::set_rate(std::size_t ev, double r) {
  std::size_t i = leaf0_ + ev;
  tree_[i] = r;
  for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

void EventTable::rebuild(const Configuration& eta) {
  for (std::size_t b = 0; b < n_bonds_; ++b) tree_[leaf0_ + b] = compute_bulk(eta, b);
  for (std::size_t k = 0; k < flip_site_.size(); ++k)
    tree_[leaf0_ + n_bonds_ + k] = compute_boundary(eta, k);
  for (std::size_t i = leaf0_ + n_events_; i < 2 * leaf0_; ++i) tree_[i] = 0.0;
  for (std::size_t i = leaf0_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
  applies_since_rebuild_ = 0;
}

std::size_t EventTable::sample_event(double u) const {
  double r = u * tree_[1];
  std::size_t i = 1;
  while (i < leaf0_) {
    i <<= 1;
    if (r >= tree_[i]) {
      r -= tree_[i];
      ++i;
    }
  }
  std::size_t ev = i - leaf0_;
  return ev < n_events_ ? ev : n_events_ - 1;
}

void EventTable::refresh_site(const Configuration& eta, std::size_t site) {
  for (std::uint32_t b : incident_bonds_[site]) set_rate(b, compute_bulk(eta, b));
  std::int64_t be = boundary_event_of_site_[site];
  if (be >= 0) {
    std::size_t k = static_cast<std::size_t>(be) - n_bonds_;
    set_rate(static_cast<std::size_t>(be), compute_boundary(eta, k));
  }
}

void EventTable::apply(std::size_t ev, Configuration& eta) {
  if (ev < n_bonds_) {
    std::size_t x = bond_from_[ev], y = bond_to_[ev];
    std::swap(eta.occ[x], eta.occ[y]);
    refresh_site(eta, x);
    refresh_site(eta, y);
  } else {
    std::size_t x = flip_site_[ev - n_bonds_];
    eta.occ[x] ^= 1;
    refresh_site(eta, x);
  }
  if (++applies_since_rebuild_ >= (1ULL << 20)) rebuild(eta);
}

const Bond& EventTable::bond_of(std::size_t ev) const {
  return field_->lattice.bonds()[ev];
}

std::size_t EventTable::flip_site_of(std::size_t ev) const {
  return flip_site_[ev - n_bonds_];
}

StepResult step(EventTable& table, Configuration& eta, std::mt19937_64& rng) {
  double total = table.total_rate();
  if (!(total > 0)) throw std::runtime_error("step: zero total rate (absorbing state)");
  std::exponential_distribution<double> exp_dist(total);
  double dt = exp_dist(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t ev = table.sample_event(unif(rng));
  table.apply(ev, eta);
  return {ev, dt};
}

std::vector<double> coarse_grain(const CylinderLattice& lattice, const Configuration& eta,
                                 int radius, std::vector<std::uint8_t>* clipped) {
  if (radius < 0) throw std::invalid_argument("coarse_grain: radius must be >= 0");
  std::vector<double> out(lattice.size());
  if (clipped) clipped->assign(lattice.size(), 0);
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    Site s = lattice.site_at(i);
    auto blk = lattice.block(s, radius);
    std::size_t sum = 0;
    for (std::size_t j : blk) sum += eta.occ[j];
    out[i] = static_cast<double>(sum) / static_cast<double>(blk.size());
    if (clipped && (s.c[0] > lattice.half_length() - radius ||
                    s.c[0] < -lattice.half_length() + radius))
      (*clipped)[i] = 1;
  }
  return out;
}

RunRecord run_until(const DisorderField& field, const ThermoContext& ctx,
                    const ProfileSpec& boundary, Configuration eta, double t_end,
                    const TrajectoryRecorder& recorder, std::uint64_t seed) {
  if (t_end < 0) throw std::invalid_argument("run_until: t_end must be >= 0");
  const CylinderLattice& lat = field.lattice;
  int N = lat.half_length();

  RunRecord rec;
  EventTable table(field, ctx, boundary, eta);
  std::mt19937_64 rng(seed);

  rec.section_crossings.assign(static_cast<std::size_t>(2 * N), 0.0);
  bool averaging = recorder.average_start < t_end;
  double avg_start = averaging ? std::max(recorder.average_start, 0.0) : 0.0;
  double flux_start = averaging ? avg_start : 0.0;

  std::vector<double> occ_time;
  std::vector<double> last_touch;
  bool avg_active = false;
  auto start_averaging = [&](double t0) {
    occ_time.assign(lat.size(), 0.0);
    last_touch.assign(lat.size(), t0);
    avg_active = true;
  };
  if (averaging && avg_start <= 0.0) start_averaging(0.0);
  else if (!averaging) flux_start = 0.0;

  auto record_checkpoint = [&](double tc) {
    rec.times.push_back(tc);
    std::vector<std::uint8_t> clip;
    rec.coarse_fields.push_back(coarse_grain(lat, eta, recorder.box_radius, &clip));
    rec.clipped.push_back(std::move(clip));
  };

  std::size_t ck = 0;
  double t = 0.0;
  while (ck < recorder.checkpoint_times.size() && recorder.checkpoint_times[ck] <= 0.0) {
    record_checkpoint(recorder.checkpoint_times[ck]);
    ++ck;
  }

  while (t < t_end) {
    double total = table.total_rate();
    std::exponential_distribution<double> exp_dist(total);
    double t_next = t + exp_dist(rng);
    // Emit everything scheduled strictly before the next jump.
    while (ck < recorder.checkpoint_times.size() &&
           recorder.checkpoint_times[ck] <= std::min(t_next, t_end)) {
      record_checkpoint(recorder.checkpoint_times[ck]);
      ++ck;
    }
    if (averaging && !avg_active && avg_start <= std::min(t_next, t_end))
      start_averaging(avg_start);
    if (t_next >= t_end) {
      t = t_end;
      break;
    }
    t = t_next;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t ev = table.sample_event(unif(rng));

    if (table.is_bulk(ev)) {
      const Bond& b = table.bond_of(ev);
      std::size_t x = lat.site_index(b.from);
      std::size_t y = lat.bond_target(b);
      if (b.direction == 0 && t >= flux_start) {
        // Particle hops rightward if the left end was occupied.
        std::size_t section = static_cast<std::size_t>(b.from.c[0] + N);
        rec.section_crossings[section] += eta.occ[x] ? 1.0 : -1.0;
      }
      if (avg_active) {
        for (std::size_t s : {x, y}) {
          occ_time[s] += eta.occ[s] * (t - last_touch[s]);
          last_touch[s] = t;
        }
      }
    } else if (avg_active) {
      std::size_t x = table.flip_site_of(ev);
      occ_time[x] += eta.occ[x] * (t - last_touch[x]);
      last_touch[x] = t;
    }
    table.apply(ev, eta);
    ++rec.events;
  }

  rec.flux_window = t_end - flux_start;
  if (avg_active) {
    rec.average_window = t_end - avg_start;
    rec.time_avg_occupation.resize(lat.size());
    for (std::size_t s = 0; s < lat.size(); ++s) {
      occ_time[s] += eta.occ[s] * (t_end - last_touch[s]);
      rec.time_avg_occupation[s] =
          rec.average_window > 0 ? occ_time[s] / rec.average_window : eta.occ[s];
    }
  }
  rec.final_state = std::move(eta);
  return rec;
}

std::vector<double> section_flux(const RunRecord& record) {
  std::vector<double> out(record.section_crossings.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = record.flux_window > 0 ? record.section_crossings[i] / record.flux_window : 0.0;
  return out;
}

}  // namespace latgas
