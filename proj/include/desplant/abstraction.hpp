#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "desplant/errors.hpp"
#include "desplant/event_engine.hpp"
#include "desplant/numeric.hpp"
#include "desplant/partition.hpp"
#include "desplant/plant.hpp"
#include "desplant/system.hpp"

namespace desplant {

/// One labeled edge of the automaton: applying `control` in state `from` can
/// move to state `to` while emitting `output`. Ordering is lexicographic over
/// (from, control, to, output), which fixes serialization and export order.
struct Transition {
  std::string from;
  std::string control;
  std::string to;
  std::string output;

  friend bool operator==(const Transition&, const Transition&) = default;
  friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// A (state, control) pair whose sampled runs reached the horizon without any
/// crossing. Recorded as data rather than modeled as a transition, since the
/// transition alphabet has no silent symbol.
struct NoEventPair {
  std::string from;
  std::string control;

  friend bool operator==(const NoEventPair&, const NoEventPair&) = default;
  friend auto operator<=>(const NoEventPair&, const NoEventPair&) = default;
};

/// Provenance of an extracted automaton: the configuration that produced it
/// and counters for everything the sampling swept past (runs that diverged,
/// runs whose crossings coincided within resolution, pairs that timed out,
/// and how many initial states each state's cell contributed).
struct AutomatonMetadata {
  std::size_t samples_per_cell = 0;
  double horizon = 0.0;
  double dt = 0.0;
  double eps_t = 0.0;
  double eps_h = 0.0;
  std::uint64_t seed = 0;
  std::size_t coincident_event_runs = 0;
  std::size_t divergent_runs = 0;
  std::vector<NoEventPair> no_event;
  std::map<std::string, std::size_t> cell_samples;

  friend bool operator==(const AutomatonMetadata&, const AutomatonMetadata&) = default;
};

/// Nondeterministic automaton abstraction of the controlled plant. States are
/// cells of the partition; transitions are witnessed cell changes labeled by
/// the control in force and the crossing symbol emitted.
struct DesAutomaton {
  struct State {
    std::string symbol;
    SignVector signs;

    friend bool operator==(const State&, const State&) = default;
  };

  std::vector<State> states;
  std::vector<std::string> controls;
  std::vector<std::string> plant_symbols;
  std::set<Transition> transitions;
  AutomatonMetadata metadata;

  friend bool operator==(const DesAutomaton&, const DesAutomaton&) = default;

  const State* find_state(const std::string& symbol) const {
    for (const State& s : states) {
      if (s.symbol == symbol) return &s;
    }
    return nullptr;
  }

  bool has_control(const std::string& symbol) const {
    return std::find(controls.begin(), controls.end(), symbol) != controls.end();
  }

  bool has_plant_symbol(const std::string& symbol) const {
    return std::find(plant_symbols.begin(), plant_symbols.end(), symbol) !=
           plant_symbols.end();
  }

  // Structural soundness: unique state symbols with unique, consistent,
  // equal-length sign vectors; every transition endpoint, control and output
  // resolves; no self-loop (a crossing always changes cell).
  void validate_structure() const {
    std::set<std::string> symbols;
    std::set<SignVector> sign_set;
    for (const State& s : states) {
      if (!symbols.insert(s.symbol).second) {
        throw InputError("duplicate state symbol " + s.symbol);
      }
      if (!s.signs.is_consistent()) {
        throw InputError("state " + s.symbol + " has sign vector " +
                         s.signs.to_string() + " with a zero component");
      }
      if (s.signs.size() != states.front().signs.size()) {
        throw InputError("state " + s.symbol + ": sign vector length differs");
      }
      if (!sign_set.insert(s.signs).second) {
        throw InputError("states share the sign vector " + s.signs.to_string());
      }
    }
    for (const Transition& t : transitions) {
      if (find_state(t.from) == nullptr) {
        throw InputError("transition references unknown state " + t.from);
      }
      if (find_state(t.to) == nullptr) {
        throw InputError("transition references unknown state " + t.to);
      }
      if (!has_control(t.control)) {
        throw InputError("transition references unknown control " + t.control);
      }
      if (!has_plant_symbol(t.output)) {
        throw InputError("transition references unknown plant symbol " + t.output);
      }
      if (t.from == t.to) {
        throw InputError("transition " + t.from + " -> " + t.to +
                         " is a self-loop; a crossing always changes cell");
      }
    }
  }

  // Transitions whose endpoint cells are not adjacent, or whose output symbol
  // does not match the separating surface and crossing direction. Extracted
  // automata have none; the check is a diagnostic, not a load-time gate, so
  // deliberately broken fixtures can still be examined.
  std::vector<Transition> incoherent_transitions() const {
    std::vector<Transition> bad;
    for (const Transition& t : transitions) {
      const State* a = find_state(t.from);
      const State* b = find_state(t.to);
      if (a == nullptr || b == nullptr) {
        bad.push_back(t);
        continue;
      }
      const auto adj = adjacency(a->signs, b->signs);
      if (!adj || PlantSymbol{adj->surface, adj->dir}.name() != t.output) {
        bad.push_back(t);
      }
    }
    return bad;
  }
};

/// One observability violation: from `from`, the symbol `output` can announce
/// a move into more than one state.
struct ObservabilityWitness {
  std::string from;
  std::string output;
  std::vector<std::string> targets;
};

struct ObservabilityReport {
  bool observable = true;
  std::vector<ObservabilityWitness> witnesses;
};

/// An automaton is observable when the previous state and the emitted symbol
/// always determine the next state uniquely, regardless of the control that
/// caused the move. Every violating (state, symbol) pair is reported.
inline ObservabilityReport check_observability(const DesAutomaton& a) {
  std::map<std::pair<std::string, std::string>, std::set<std::string>> groups;
  for (const Transition& t : a.transitions) {
    groups[{t.from, t.output}].insert(t.to);
  }
  ObservabilityReport report;
  for (const auto& [key, targets] : groups) {
    if (targets.size() > 1) {
      report.witnesses.push_back(
          {key.first, key.second, {targets.begin(), targets.end()}});
    }
  }
  report.observable = report.witnesses.empty();
  return report;
}

/// Replays a symbol string from a known initial state: each symbol resolves
/// the unique next state among the transitions leaving the current one.
/// Requires an observable automaton (uniqueness is what makes the replay
/// well-defined) and reports the 1-based position of the first symbol no
/// transition can produce.
inline std::vector<std::string> reconstruct(const DesAutomaton& a,
                                            const std::string& initial,
                                            const std::vector<PlantSymbol>& symbols) {
  const ObservabilityReport report = check_observability(a);
  if (!report.observable) {
    throw NotObservableError("reconstruction requires an observable automaton (" +
                             std::to_string(report.witnesses.size()) +
                             " ambiguous state/symbol pairs)");
  }
  if (a.find_state(initial) == nullptr) {
    throw InputError("unknown state " + initial);
  }

  std::vector<std::string> sequence{initial};
  std::string current = initial;
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const std::string name = symbols[k].name();
    if (!a.has_plant_symbol(name)) {
      throw InputError("symbol " + name + " is not in the automaton's alphabet");
    }
    std::optional<std::string> next;
    for (const Transition& t : a.transitions) {
      if (t.from == current && t.output == name) {
        next = t.to;  // unique by observability
        break;
      }
    }
    if (!next) {
      throw InadmissibleSequenceError(
          "no transition from " + current + " produces " + name, k + 1);
    }
    sequence.push_back(*next);
    current = *next;
  }
  return sequence;
}

/// What one sampled run observed: the state entered, the symbol emitted, and
/// when. `coincident_events` marks runs where several crossings fell within
/// eps_t of each other; the lowest-index crossing is then taken as trigger
/// and the entered state is its immediate neighbour.
struct SuccessorOutcome {
  CellLabel to;
  PlantSymbol output;
  double event_time;
  bool coincident_events = false;
};

/// Integrates from x0 (inside `from`) under the named control until the
/// first crossing or the horizon. Returns the entered cell, the symbol, and
/// the event time, or absent when the horizon expires first.
inline std::optional<SuccessorOutcome> successor(const PlantSystem& sys,
                                                 CellRegistry& registry,
                                                 const CellLabel& from, const Vec& x0,
                                                 const std::string& control,
                                                 const ExtractionConfig& cfg) {
  cfg.validate();
  const Vec& u = sys.alphabet.actuate(control);
  if (sys.partition.quality(x0, cfg.eps_h) != from.signs) {
    throw InputError("initial state is not inside cell " + from.symbol);
  }

  LegResult leg = integrate_until_event(sys.field, u, x0, 0.0, sys.partition,
                                        cfg.horizon, cfg.dt, cfg.eps_t, cfg.eps_h);
  if (leg.no_event) return std::nullopt;

  if (leg.coincident_events) {
    const PlantEvent& trigger = leg.events.front();  // lowest surface index
    CellLabel to = registry.label_of(
        from.signs.flipped(static_cast<std::size_t>(trigger.surface) - 1));
    return SuccessorOutcome{std::move(to), event_to_symbol(trigger), trigger.time, true};
  }

  const PlantEvent& e = leg.events.front();
  CellLabel to = registry.label_of(sys.partition.quality(leg.end_state, cfg.eps_h));
  return SuccessorOutcome{std::move(to), event_to_symbol(e), e.time, false};
}

/// Builds the automaton by sampled simulation. States are discovered by
/// rejection sampling in the system's box plus every cell entered during the
/// runs; each (cell, control) pair is simulated from up to samplesPerCell
/// sampled initial states and the transition set is the union of everything
/// observed. The result under-approximates the semantic transition relation:
/// a transition can be missed if no sampled state witnesses it, never
/// invented. Identical system, configuration and seed give an identical
/// automaton, and growing samplesPerCell only ever adds transitions.
inline DesAutomaton extract(const PlantSystem& sys, const ExtractionConfig& cfg) {
  cfg.validate();
  sys.validate();

  CellRegistry registry = sys.make_registry();
  std::mt19937_64 rng(cfg.seed);
  std::map<SignVector, std::vector<Vec>> buckets;

  // The draw sequence depends only on the seed, and each cell keeps the first
  // samplesPerCell hits, so a larger budget extends rather than reshuffles
  // the runs of a smaller one.
  const std::size_t budget =
      std::max<std::size_t>(100000, 2048 * cfg.samples_per_cell);
  bool any_consistent = false;
  for (std::size_t draw = 0; draw < budget; ++draw) {
    const Vec x = sys.box.draw(rng);
    SignVector q = sys.partition.quality(x, cfg.eps_h);
    if (!q.is_consistent()) continue;
    any_consistent = true;
    registry.label_of(q);
    std::vector<Vec>& bucket = buckets[q];
    if (bucket.size() < cfg.samples_per_cell) bucket.push_back(x);

    bool all_full = true;
    for (const CellLabel& cell : registry.cells()) {
      auto it = buckets.find(cell.signs);
      if (it == buckets.end() || it->second.size() < cfg.samples_per_cell) {
        all_full = false;
        break;
      }
    }
    if (all_full) break;
  }
  if (!any_consistent) {
    throw EmptyDomainError("no consistent sample found in the sampling box");
  }

  DesAutomaton automaton;
  automaton.controls = sys.alphabet.symbols();
  for (const PlantSymbol& z : plant_symbol_alphabet(sys.partition.size())) {
    automaton.plant_symbols.push_back(z.name());
  }
  automaton.metadata.samples_per_cell = cfg.samples_per_cell;
  automaton.metadata.horizon = cfg.horizon;
  automaton.metadata.dt = cfg.dt;
  automaton.metadata.eps_t = cfg.eps_t;
  automaton.metadata.eps_h = cfg.eps_h;
  automaton.metadata.seed = cfg.seed;

  std::set<NoEventPair> no_event;

  // The registry can grow while runs execute (a run may enter a cell the box
  // never produced); newly discovered cells join the back of the queue. Such
  // cells have no sampled initial states of their own, so they contribute
  // states but no outgoing runs.
  for (std::size_t qi = 0; qi < registry.count(); ++qi) {
    const CellLabel cell = registry.cells()[qi];
    const auto bucket_it = buckets.find(cell.signs);
    const std::vector<Vec> samples =
        bucket_it == buckets.end() ? std::vector<Vec>{} : bucket_it->second;
    automaton.metadata.cell_samples[cell.symbol] = samples.size();

    for (const std::string& control : automaton.controls) {
      for (const Vec& x0 : samples) {
        std::optional<SuccessorOutcome> outcome;
        try {
          outcome = successor(sys, registry, cell, x0, control, cfg);
        } catch (const DivergenceError&) {
          ++automaton.metadata.divergent_runs;
          continue;
        }
        if (!outcome) {
          no_event.insert({cell.symbol, control});
          continue;
        }
        if (outcome->coincident_events) {
          ++automaton.metadata.coincident_event_runs;
        }
        automaton.transitions.insert(
            {cell.symbol, control, outcome->to.symbol, outcome->output.name()});
      }
    }
  }

  for (const CellLabel& cell : registry.cells()) {
    automaton.states.push_back({cell.symbol, cell.signs});
  }
  automaton.metadata.no_event.assign(no_event.begin(), no_event.end());
  automaton.validate_structure();
  return automaton;
}

/// Record of one closed-loop run: the state sequence, the applied controls,
/// the emitted symbols, when each crossing happened, and the continuous
/// waypoints (the initial state plus each leg's end state). One symbol sits
/// between every consecutive pair of states.
struct Trace {
  struct Waypoint {
    double t;
    Vec x;
  };

  std::vector<std::string> states;
  std::vector<std::string> controls;
  std::vector<std::string> symbols;
  std::vector<double> event_times;
  std::vector<Waypoint> waypoints;
  bool no_event_termination = false;
  std::size_t coincident_event_runs = 0;
};

/// Runs the plant under a control-symbol sequence, switching to the next
/// control exactly when a crossing ends the current leg. The k-th control is
/// applied from the entry into the k-th state; the final control is held
/// until its own crossing or the horizon. A leg that reaches the horizon
/// without a crossing ends the run with the no-event flag set, leaving any
/// remaining controls unapplied.
inline Trace simulate_closed_loop(const PlantSystem& sys, const Vec& x0,
                                  const std::vector<std::string>& controls,
                                  const ExtractionConfig& cfg) {
  cfg.validate();
  sys.validate();
  if (controls.empty()) {
    throw InputError("control sequence is empty");
  }
  for (const std::string& r : controls) {
    if (!sys.alphabet.contains(r)) {
      throw InputError("unknown control symbol " + r);
    }
  }

  CellRegistry registry = sys.make_registry();
  CellLabel current = cell_of(sys.partition, registry, x0, cfg.eps_h);

  Trace trace;
  trace.states.push_back(current.symbol);
  trace.waypoints.push_back({0.0, x0});

  Vec x = x0;
  double t = 0.0;
  for (const std::string& r : controls) {
    const Vec& u = sys.alphabet.actuate(r);
    LegResult leg = integrate_until_event(sys.field, u, x, t, sys.partition,
                                          cfg.horizon, cfg.dt, cfg.eps_t, cfg.eps_h);
    trace.controls.push_back(r);
    if (leg.no_event) {
      trace.no_event_termination = true;
      trace.waypoints.push_back({leg.end_time, leg.end_state});
      break;
    }
    if (leg.coincident_events) {
      ++trace.coincident_event_runs;
    }
    // A coincidence group unrolls into one hop per crossing, lowest surface
    // first, so the symbol/state bookkeeping stays aligned.
    SignVector signs = current.signs;
    for (const PlantEvent& e : leg.events) {
      signs = signs.flipped(static_cast<std::size_t>(e.surface) - 1);
      current = registry.label_of(signs);
      trace.states.push_back(current.symbol);
      trace.symbols.push_back(event_to_symbol(e).name());
      trace.event_times.push_back(e.time);
    }
    x = leg.end_state;
    t = leg.end_time;
    trace.waypoints.push_back({t, x});
  }
  return trace;
}

}  // namespace desplant
