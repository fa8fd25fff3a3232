#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "desplant/errors.hpp"
#include "desplant/numeric.hpp"
#include "desplant/partition.hpp"
#include "desplant/plant.hpp"

namespace desplant {

/// Output symbol issued when the state crosses hypersurface `surface`
/// (1-based) in the given direction: "z3+" means functional 3 went from
/// negative to positive.
struct PlantSymbol {
  int surface;
  Direction dir;

  std::string name() const {
    return "z" + std::to_string(surface) + direction_char(dir);
  }

  static PlantSymbol parse(const std::string& text) {
    if (text.size() < 3 || text.front() != 'z') {
      throw InputError("malformed plant symbol '" + text + "' (expected e.g. z1+)");
    }
    const char tail = text.back();
    if (tail != '+' && tail != '-') {
      throw InputError("malformed plant symbol '" + text + "' (expected trailing + or -)");
    }
    const std::string digits = text.substr(1, text.size() - 2);
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw InputError("malformed plant symbol '" + text + "' (surface index not numeric)");
    }
    const int surface = std::stoi(digits);
    if (surface < 1) {
      throw InputError("malformed plant symbol '" + text + "' (surface index must be >= 1)");
    }
    return PlantSymbol{surface, tail == '+' ? Direction::plus : Direction::minus};
  }

  friend bool operator==(const PlantSymbol&, const PlantSymbol&) = default;
  // Order matches the alphabet listing: z1+, z1-, z2+, z2-, ...
  friend bool operator<(const PlantSymbol& a, const PlantSymbol& b) {
    if (a.surface != b.surface) return a.surface < b.surface;
    return a.dir == Direction::plus && b.dir == Direction::minus;
  }
};

/// Full symbol alphabet for N surfaces, in display order.
inline std::vector<PlantSymbol> plant_symbol_alphabet(std::size_t n_surfaces) {
  std::vector<PlantSymbol> out;
  out.reserve(2 * n_surfaces);
  for (std::size_t i = 1; i <= n_surfaces; ++i) {
    out.push_back({static_cast<int>(i), Direction::plus});
    out.push_back({static_cast<int>(i), Direction::minus});
  }
  return out;
}

/// A localized hypersurface crossing: the surface and direction, the crossing
/// time, the state on the surface, and the first dense sample strictly past
/// it (used to classify the cell being entered).
struct PlantEvent {
  int surface;
  Direction dir;
  double time;
  Vec state;
  Vec post_state;
};

inline PlantSymbol event_to_symbol(const PlantEvent& e) { return {e.surface, e.dir}; }

/// Scan-quality notes that do not invalidate a result but deserve surfacing:
/// a surface whose functional hugged zero for two or more consecutive samples
/// (the trajectory may be sliding along it rather than crossing).
struct EventScanDiagnostics {
  std::vector<int> sliding_surfaces;
};

namespace detail {

// Integrates x in place from `from_t` to `to_t` under constant control,
// taking native-size steps and one final partial step.
inline void advance(const VectorField& field, const Vec& u, Vec& x, double from_t,
                    double to_t, double dt, RungeKutta4& stepper) {
  double t = from_t;
  while (to_t - t > dt * (1.0 + 1e-12)) {
    integrate_step(field, u, x, dt, stepper);
    t += dt;
  }
  const double rest = to_t - t;
  if (rest > 0.0) {
    integrate_step(field, u, x, rest, stepper);
  }
}

// Bisects a bracketed sign change of one functional along the flow. The left
// endpoint must carry a strict sign; the right endpoint must be past the
// crossing. Narrows until the bracket is shorter than eps_t and the
// functional at the estimate sits inside the zero band, then returns the
// crossing time and the state there. The search re-bases onto the midpoint
// whenever the crossing lies in the right half, so each probe integrates over
// at most the current bracket width.
inline std::pair<double, Vec> localize_crossing(const VectorField& field, const Vec& u,
                                                const Functional& h, double t_lo,
                                                Vec x_lo, double t_hi, double dt,
                                                double eps_t, double eps_h) {
  RungeKutta4 stepper(x_lo.size());
  double h_lo = h.evaluate(x_lo);
  double lo = t_lo;
  double hi = t_hi;
  for (int iter = 0; iter < 200; ++iter) {
    if (hi - lo < eps_t && std::abs(h_lo) < eps_h) {
      return {lo, std::move(x_lo)};
    }
    const double mid = 0.5 * (lo + hi);
    Vec x_mid = x_lo;
    advance(field, u, x_mid, lo, mid, dt, stepper);
    const double h_mid = h.evaluate(x_mid);
    if (h_mid == 0.0) {
      return {mid, std::move(x_mid)};
    }
    if ((h_mid > 0.0) == (h_lo > 0.0)) {
      lo = mid;
      x_lo = std::move(x_mid);
      h_lo = h_mid;
    } else {
      hi = mid;
    }
  }
  // Iteration cap reached; hand back the midpoint of the final bracket.
  const double t_e = 0.5 * (lo + hi);
  Vec x_e = x_lo;
  advance(field, u, x_e, lo, t_e, dt, stepper);
  return {t_e, std::move(x_e)};
}

}  // namespace detail

/// Scans a dense trajectory segment for hypersurface crossings. A crossing is
/// a strict sign change of one functional between two samples that each carry
/// a strict sign; samples inside the zero band may sit between them. Each
/// crossing is localized to eps_t by bisection with re-integration. Events
/// come back sorted by time (surface index breaks exact ties).
inline std::vector<PlantEvent> detect_events(const TrajectorySegment& segment,
                                             const PartitionSpec& partition,
                                             double eps_t = kDefaultEpsT,
                                             double eps_h = kDefaultEpsH,
                                             EventScanDiagnostics* diagnostics = nullptr) {
  if (segment.field == nullptr || segment.samples.empty()) {
    throw InputError("event scan needs a non-empty trajectory segment");
  }
  const auto& samples = segment.samples;
  const std::size_t n_surf = partition.size();

  std::vector<Sign> b(n_surf);
  partition.quality_into(samples.front().x, eps_h, b);
  if (!SignVector(b).is_consistent()) {
    throw BoundaryStateError("trajectory starts on a separating hypersurface");
  }

  const double dt =
      samples.size() > 1 ? samples[1].t - samples[0].t : kDefaultDt;

  std::vector<Sign> last_sign(b.begin(), b.end());
  std::vector<std::size_t> last_strict(n_surf, 0);
  std::vector<int> zero_run(n_surf, 0);
  std::vector<bool> sliding(n_surf, false);

  std::vector<PlantEvent> events;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    partition.quality_into(samples[k].x, eps_h, b);
    for (std::size_t i = 0; i < n_surf; ++i) {
      if (b[i] == 0) {
        if (++zero_run[i] >= 2) sliding[i] = true;
        continue;
      }
      zero_run[i] = 0;
      if (b[i] != last_sign[i]) {
        const std::size_t j = last_strict[i];
        auto [t_e, x_e] = detail::localize_crossing(
            *segment.field, segment.control, partition.functional(static_cast<int>(i) + 1),
            samples[j].t, samples[j].x, samples[k].t, dt, eps_t, eps_h);
        events.push_back({static_cast<int>(i) + 1, direction_of_sign(b[i]), t_e,
                          std::move(x_e), samples[k].x});
      }
      last_sign[i] = b[i];
      last_strict[i] = k;
    }
  }

  std::sort(events.begin(), events.end(), [](const PlantEvent& a, const PlantEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.surface < b.surface;
  });

  if (diagnostics != nullptr) {
    diagnostics->sliding_surfaces.clear();
    for (std::size_t i = 0; i < n_surf; ++i) {
      if (sliding[i]) diagnostics->sliding_surfaces.push_back(static_cast<int>(i) + 1);
    }
  }
  return events;
}

/// Result of checking an event list against the one-at-a-time assumption.
/// Events closer together than eps_t are indistinguishable in time; such a
/// group is flagged and deterministically re-ordered by surface index so
/// downstream consumers see a reproducible sequence.
struct SimultaneityResult {
  std::vector<PlantEvent> events;
  bool violation = false;
};

inline SimultaneityResult check_simultaneity(std::vector<PlantEvent> events,
                                             double eps_t = kDefaultEpsT) {
  std::sort(events.begin(), events.end(), [](const PlantEvent& a, const PlantEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.surface < b.surface;
  });
  SimultaneityResult result;
  std::size_t start = 0;
  while (start < events.size()) {
    std::size_t end = start + 1;
    while (end < events.size() && events[end].time - events[end - 1].time < eps_t) {
      ++end;
    }
    if (end - start >= 2) {
      result.violation = true;
      std::stable_sort(events.begin() + static_cast<std::ptrdiff_t>(start),
                       events.begin() + static_cast<std::ptrdiff_t>(end),
                       [](const PlantEvent& a, const PlantEvent& b) {
                         return a.surface < b.surface;
                       });
    }
    start = end;
  }
  result.events = std::move(events);
  return result;
}

/// Outcome of integrating under one constant control until the trajectory
/// settles in a new cell or the horizon expires. Normally `events` holds one
/// crossing; a within-resolution coincidence yields a surface-ordered chain
/// and sets the violation flag. `end_state` is the first dense sample
/// strictly inside the new cell (or the horizon-end state on expiry), the
/// point where a supervisor's next control takes over.
struct LegResult {
  std::vector<PlantEvent> events;
  bool coincident_events = false;
  bool no_event = false;
  double end_time = 0.0;
  Vec end_state;
};

inline LegResult integrate_until_event(const VectorField& field, const Vec& u,
                                       const Vec& x0, double t0,
                                       const PartitionSpec& partition, double horizon,
                                       double dt = kDefaultDt, double eps_t = kDefaultEpsT,
                                       double eps_h = kDefaultEpsH) {
  detail::require_dimension(x0, field.state_dimension(), "initial state");
  detail::require_dimension(u, field.input_dimension(), "control value");
  if (!(dt > 0.0)) throw InputError("step size must be positive");
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");

  const std::size_t n_surf = partition.size();
  std::vector<Sign> b0(n_surf);
  partition.quality_into(x0, eps_h, b0);
  if (!SignVector(b0).is_consistent()) {
    throw BoundaryStateError("leg starts on a separating hypersurface");
  }

  struct StrictSample {
    double t;
    Vec x;
  };
  std::vector<StrictSample> last_strict(n_surf, StrictSample{t0, x0});

  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
  RungeKutta4 stepper(x0.size());
  Vec x = x0;
  std::vector<Sign> b(n_surf);
  double t = t0;

  for (std::size_t j = 1; j <= steps; ++j) {
    integrate_step(field, u, x, dt, stepper);
    t = t0 + static_cast<double>(j) * dt;
    partition.quality_into(x, eps_h, b);

    bool consistent = true;
    bool changed = false;
    for (std::size_t i = 0; i < n_surf; ++i) {
      if (b[i] == 0) {
        consistent = false;
      } else if (b[i] != b0[i]) {
        changed = true;
      } else {
        last_strict[i] = {t, x};
      }
    }
    if (!consistent || !changed) continue;

    // The sample landed strictly inside a different cell. Localize every
    // surface whose sign flipped since its last on-sign sample.
    std::vector<std::size_t> flipped;
    for (std::size_t i = 0; i < n_surf; ++i) {
      if (b[i] != b0[i]) flipped.push_back(i);
    }

    std::vector<std::pair<double, Vec>> crossings(flipped.size());
    for (std::size_t fi = 0; fi < flipped.size(); ++fi) {
      const std::size_t i = flipped[fi];
      crossings[fi] = detail::localize_crossing(
          field, u, partition.functional(static_cast<int>(i) + 1), last_strict[i].t,
          last_strict[i].x, t, dt, eps_t, eps_h);
    }

    LegResult leg;
    if (flipped.size() == 1) {
      const std::size_t i = flipped[0];
      leg.events.push_back({static_cast<int>(i) + 1, direction_of_sign(b[i]),
                            crossings[0].first, std::move(crossings[0].second), x});
      leg.end_time = t;
      leg.end_state = x;
      return leg;
    }

    double t_first = crossings[0].first;
    double t_last = crossings[0].first;
    for (const auto& c : crossings) {
      t_first = std::min(t_first, c.first);
      t_last = std::max(t_last, c.first);
    }

    if (t_last - t_first >= eps_t) {
      // Distinct crossing times hidden inside one dense step: re-land between
      // the first two and retry, so each call resolves one crossing.
      std::vector<double> times;
      times.reserve(crossings.size());
      for (const auto& c : crossings) times.push_back(c.first);
      std::sort(times.begin(), times.end());
      const double t_mid = 0.5 * (times[0] + times[1]);
      Vec x_mid = last_strict[flipped[0]].x;
      double base_t = last_strict[flipped[0]].t;
      for (const std::size_t i : flipped) {
        if (last_strict[i].t < base_t) {
          base_t = last_strict[i].t;
          x_mid = last_strict[i].x;
        }
      }
      RungeKutta4 mid_stepper(x_mid.size());
      detail::advance(field, u, x_mid, base_t, t_mid, dt, mid_stepper);
      std::vector<Sign> b_mid(n_surf);
      partition.quality_into(x_mid, eps_h, b_mid);
      std::size_t diffs = 0;
      std::size_t which = 0;
      for (std::size_t i = 0; i < n_surf; ++i) {
        if (b_mid[i] == 0) {
          diffs = 2;  // still on a surface: give up on splitting
          break;
        }
        if (b_mid[i] != b0[i]) {
          ++diffs;
          which = i;
        }
      }
      bool split = false;
      if (diffs == 1) {
        for (std::size_t fi = 0; fi < flipped.size(); ++fi) {
          if (flipped[fi] == which) {
            leg.events.push_back({static_cast<int>(which) + 1,
                                  direction_of_sign(b_mid[which]), crossings[fi].first,
                                  std::move(crossings[fi].second), x_mid});
            split = true;
          }
        }
      }
      if (split) {
        leg.end_time = t_mid;
        leg.end_state = std::move(x_mid);
        return leg;
      }
      // Fall through: the mid-point probe could not separate the crossings.
    }

    // Crossings coincide within resolution. Emit the whole group ordered by
    // surface index and flag the run.
    leg.coincident_events = true;
    for (std::size_t fi = 0; fi < flipped.size(); ++fi) {
      const std::size_t i = flipped[fi];
      leg.events.push_back({static_cast<int>(i) + 1, direction_of_sign(b[i]),
                            crossings[fi].first, std::move(crossings[fi].second), x});
    }
    std::stable_sort(leg.events.begin(), leg.events.end(),
                     [](const PlantEvent& a, const PlantEvent& b) {
                       return a.surface < b.surface;
                     });
    leg.end_time = t;
    leg.end_state = x;
    return leg;
  }

  LegResult leg;
  leg.no_event = true;
  leg.end_time = t0 + static_cast<double>(steps) * dt;
  leg.end_state = std::move(x);
  return leg;
}

}  // namespace desplant
