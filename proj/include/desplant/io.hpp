#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "desplant/abstraction.hpp"
#include "desplant/errors.hpp"
#include "desplant/partition.hpp"
#include "desplant/plant.hpp"
#include "desplant/system.hpp"

namespace desplant {

inline constexpr int kFormatVersion = 1;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot open " + path + " for writing");
  }
  out << content;
  if (!out) {
    throw InputError("failed writing " + path);
  }
}

// Parses with nlohmann's line/column diagnostics and re-homes every JSON
// error under the input error type, prefixed by the file it came from.
inline nlohmann::json parse_json(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline void require_format_version(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_object()) {
    throw InputError(origin + ": top level must be a JSON object");
  }
  if (!j.contains("format_version")) {
    throw InputError(origin + ": missing format_version");
  }
  if (!j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != kFormatVersion) {
    throw InputError(origin + ": unsupported format_version (expected " +
                     std::to_string(kFormatVersion) + ")");
  }
}

inline Vec json_to_vec(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw InputError(what + " must be a non-empty array of numbers");
  }
  Vec v;
  v.reserve(j.size());
  for (const auto& c : j) {
    if (!c.is_number()) {
      throw InputError(what + " must contain only numbers");
    }
    v.push_back(c.get<double>());
  }
  return v;
}

inline Matrix json_to_matrix(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw InputError(what + " must be a non-empty array of rows");
  }
  Matrix m;
  m.reserve(j.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    m.push_back(json_to_vec(j.at(r), what + " row " + std::to_string(r + 1)));
  }
  return m;
}

// The quadrant partition of the plane gets the traditional counter-clockwise
// cell numbering so published examples keep their names.
inline bool is_canonical_quadrant_partition(const PartitionSpec& p) {
  if (p.size() != 2 || p.dimension() != 2) return false;
  const AffineMap* h1 = p.functional(1).affine();
  const AffineMap* h2 = p.functional(2).affine();
  return h1 != nullptr && h2 != nullptr && h1->offset == 0.0 && h2->offset == 0.0 &&
         h1->normal == Vec{1.0, 0.0} && h2->normal == Vec{0.0, 1.0};
}

inline std::vector<SignVector> quadrant_cell_order() {
  return {SignVector({Sign{1}, Sign{1}}), SignVector({Sign{-1}, Sign{1}}),
          SignVector({Sign{-1}, Sign{-1}}), SignVector({Sign{1}, Sign{-1}})};
}

}  // namespace detail

/// Parses a system definition. `origin` names the source in error messages
/// (typically the file path).
inline PlantSystem parse_system(const std::string& text, const std::string& origin) {
  const nlohmann::json j = detail::parse_json(text, origin);
  detail::require_format_version(j, origin);

  try {
    // Plant: a registered builtin by name, or explicit linear matrices.
    if (!j.contains("plant") || !j.at("plant").is_object()) {
      throw InputError("plant section missing or not an object");
    }
    const nlohmann::json& jp = j.at("plant");
    bool builtin_double_integrator = false;
    VectorField field = [&]() {
      if (jp.contains("builtin")) {
        const std::string name = jp.at("builtin").get<std::string>();
        if (name == "double_integrator") {
          builtin_double_integrator = true;
          return VectorField::double_integrator();
        }
        throw InputError("unknown builtin plant '" + name + "'");
      }
      if (jp.contains("linear")) {
        const nlohmann::json& jl = jp.at("linear");
        return VectorField::linear(detail::json_to_matrix(jl.at("A"), "matrix A"),
                                   detail::json_to_matrix(jl.at("B"), "matrix B"));
      }
      throw InputError("plant must specify either 'builtin' or 'linear'");
    }();

    // Controls. A builtin plant may omit them and use its stock alphabet.
    std::vector<ControlAlphabet::Entry> control_entries;
    if (j.contains("controls")) {
      const nlohmann::json& jc = j.at("controls");
      if (!jc.is_array() || jc.empty()) {
        throw InputError("controls must be a non-empty array");
      }
      for (std::size_t k = 0; k < jc.size(); ++k) {
        const std::string where = "controls[" + std::to_string(k + 1) + "]";
        const nlohmann::json& entry = jc.at(k);
        if (!entry.is_object() || !entry.contains("symbol") || !entry.contains("value")) {
          throw InputError(where + " needs 'symbol' and 'value'");
        }
        control_entries.push_back({entry.at("symbol").get<std::string>(),
                                   detail::json_to_vec(entry.at("value"), where + " value")});
      }
    } else if (builtin_double_integrator) {
      control_entries = {{"r1", {-1.0}}, {"r2", {0.0}}, {"r3", {1.0}}};
    } else {
      throw InputError("controls section is required for a linear plant");
    }
    ControlAlphabet alphabet(std::move(control_entries));

    // Partition functionals, in file order; ids must run 1..N.
    std::vector<Functional> functionals;
    if (j.contains("partition")) {
      const nlohmann::json& jpart = j.at("partition");
      if (!jpart.is_array() || jpart.empty()) {
        throw InputError("partition must be a non-empty array");
      }
      for (std::size_t k = 0; k < jpart.size(); ++k) {
        const std::string where = "partition[" + std::to_string(k + 1) + "]";
        const nlohmann::json& entry = jpart.at(k);
        if (!entry.is_object() || !entry.contains("id") || !entry.contains("normal")) {
          throw InputError(where + " needs 'id' and 'normal'");
        }
        functionals.emplace_back(entry.at("id").get<int>(),
                                 detail::json_to_vec(entry.at("normal"), where + " normal"),
                                 entry.value("offset", 0.0));
      }
    } else if (builtin_double_integrator) {
      functionals.emplace_back(1, Vec{1.0, 0.0}, 0.0);
      functionals.emplace_back(2, Vec{0.0, 1.0}, 0.0);
    } else {
      throw InputError("partition section is required");
    }
    PartitionSpec partition(std::move(functionals));

    // Sampling box.
    std::vector<SamplingBox::Interval> intervals;
    if (j.contains("sampling_box")) {
      const nlohmann::json& jb = j.at("sampling_box");
      if (!jb.is_array() || jb.empty()) {
        throw InputError("sampling_box must be a non-empty array of [lo, hi] pairs");
      }
      for (std::size_t k = 0; k < jb.size(); ++k) {
        const nlohmann::json& pair = jb.at(k);
        if (!pair.is_array() || pair.size() != 2 || !pair.at(0).is_number() ||
            !pair.at(1).is_number()) {
          throw InputError("sampling_box[" + std::to_string(k + 1) +
                           "] must be a [lo, hi] pair");
        }
        intervals.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      }
    } else if (builtin_double_integrator) {
      intervals = {{-5.0, 5.0}, {-5.0, 5.0}};
    } else {
      throw InputError("sampling_box section is required");
    }
    SamplingBox box(std::move(intervals));

    // Optional run settings carried with the file.
    ConfigOverrides overrides;
    if (j.contains("config")) {
      const nlohmann::json& jc = j.at("config");
      if (!jc.is_object()) {
        throw InputError("config must be an object");
      }
      if (jc.contains("samples")) overrides.samples_per_cell = jc.at("samples").get<std::size_t>();
      if (jc.contains("horizon")) overrides.horizon = jc.at("horizon").get<double>();
      if (jc.contains("dt")) overrides.dt = jc.at("dt").get<double>();
      if (jc.contains("eps_t")) overrides.eps_t = jc.at("eps_t").get<double>();
      if (jc.contains("eps_h")) overrides.eps_h = jc.at("eps_h").get<double>();
      if (jc.contains("seed")) overrides.seed = jc.at("seed").get<std::uint64_t>();
    }

    std::vector<SignVector> pinned;
    if (detail::is_canonical_quadrant_partition(partition)) {
      pinned = detail::quadrant_cell_order();
    }

    PlantSystem sys{j.value("name", "system"),
                    std::move(field),
                    std::move(alphabet),
                    std::move(partition),
                    std::move(box),
                    std::move(pinned),
                    overrides};
    sys.validate();
    return sys;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline PlantSystem load_system(const std::string& path) {
  return parse_system(detail::read_file(path), path);
}

inline nlohmann::json automaton_to_json(const DesAutomaton& a) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["states"] = nlohmann::json::array();
  for (const DesAutomaton::State& s : a.states) {
    nlohmann::json js;
    js["symbol"] = s.symbol;
    js["signs"] = nlohmann::json::array();
    for (std::size_t i = 0; i < s.signs.size(); ++i) {
      js["signs"].push_back(static_cast<int>(s.signs[i]));
    }
    j["states"].push_back(std::move(js));
  }
  j["controls"] = a.controls;
  j["plant_symbols"] = a.plant_symbols;
  j["transitions"] = nlohmann::json::array();
  for (const Transition& t : a.transitions) {
    j["transitions"].push_back(
        {{"from", t.from}, {"control", t.control}, {"to", t.to}, {"output", t.output}});
  }
  nlohmann::json jm;
  jm["samples_per_cell"] = a.metadata.samples_per_cell;
  jm["horizon"] = a.metadata.horizon;
  jm["dt"] = a.metadata.dt;
  jm["eps_t"] = a.metadata.eps_t;
  jm["eps_h"] = a.metadata.eps_h;
  jm["seed"] = a.metadata.seed;
  jm["coincident_event_runs"] = a.metadata.coincident_event_runs;
  jm["divergent_runs"] = a.metadata.divergent_runs;
  jm["no_event"] = nlohmann::json::array();
  for (const NoEventPair& p : a.metadata.no_event) {
    jm["no_event"].push_back({{"from", p.from}, {"control", p.control}});
  }
  jm["cell_samples"] = a.metadata.cell_samples;
  j["metadata"] = std::move(jm);
  return j;
}

inline DesAutomaton automaton_from_json(const nlohmann::json& j, const std::string& origin) {
  detail::require_format_version(j, origin);
  try {
    DesAutomaton a;
    for (const auto& js : j.at("states")) {
      std::vector<Sign> signs;
      for (const auto& c : js.at("signs")) {
        const int v = c.get<int>();
        if (v != -1 && v != 1) {
          throw InputError("state " + js.at("symbol").get<std::string>() +
                           ": signs must be -1 or 1");
        }
        signs.push_back(static_cast<Sign>(v));
      }
      a.states.push_back({js.at("symbol").get<std::string>(), SignVector(std::move(signs))});
    }
    a.controls = j.at("controls").get<std::vector<std::string>>();
    a.plant_symbols = j.at("plant_symbols").get<std::vector<std::string>>();
    for (const auto& jt : j.at("transitions")) {
      a.transitions.insert({jt.at("from").get<std::string>(),
                            jt.at("control").get<std::string>(),
                            jt.at("to").get<std::string>(),
                            jt.at("output").get<std::string>()});
    }
    if (j.contains("metadata")) {
      const nlohmann::json& jm = j.at("metadata");
      a.metadata.samples_per_cell = jm.value("samples_per_cell", std::size_t{0});
      a.metadata.horizon = jm.value("horizon", 0.0);
      a.metadata.dt = jm.value("dt", 0.0);
      a.metadata.eps_t = jm.value("eps_t", 0.0);
      a.metadata.eps_h = jm.value("eps_h", 0.0);
      a.metadata.seed = jm.value("seed", std::uint64_t{0});
      a.metadata.coincident_event_runs = jm.value("coincident_event_runs", std::size_t{0});
      a.metadata.divergent_runs = jm.value("divergent_runs", std::size_t{0});
      if (jm.contains("no_event")) {
        for (const auto& jp : jm.at("no_event")) {
          a.metadata.no_event.push_back(
              {jp.at("from").get<std::string>(), jp.at("control").get<std::string>()});
        }
      }
      if (jm.contains("cell_samples")) {
        a.metadata.cell_samples =
            jm.at("cell_samples").get<std::map<std::string, std::size_t>>();
      }
    }
    a.validate_structure();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline void save_automaton(const DesAutomaton& a, const std::string& path) {
  detail::write_file(path, automaton_to_json(a).dump(2) + "\n");
}

inline DesAutomaton load_automaton(const std::string& path) {
  return automaton_from_json(detail::parse_json(detail::read_file(path), path), path);
}

inline nlohmann::json trace_to_json(const Trace& trace) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["states"] = trace.states;
  j["controls"] = trace.controls;
  j["symbols"] = trace.symbols;
  j["event_times"] = trace.event_times;
  j["waypoints"] = nlohmann::json::array();
  for (const Trace::Waypoint& w : trace.waypoints) {
    j["waypoints"].push_back({{"t", w.t}, {"x", w.x}});
  }
  j["no_event_termination"] = trace.no_event_termination;
  j["coincident_event_runs"] = trace.coincident_event_runs;
  return j;
}

inline void save_trace(const Trace& trace, const std::string& path) {
  detail::write_file(path, trace_to_json(trace).dump(2) + "\n");
}

/// Renders the automaton as a DOT digraph: one node per state labeled with
/// its symbol and sign vector, one edge per transition labeled
/// "control / output". Nodes are sorted by symbol and edges by
/// (from, control, to, output), so equal automata render byte-identically.
inline std::string to_dot(const DesAutomaton& a) {
  std::vector<const DesAutomaton::State*> states;
  states.reserve(a.states.size());
  for (const DesAutomaton::State& s : a.states) states.push_back(&s);
  std::sort(states.begin(), states.end(),
            [](const DesAutomaton::State* x, const DesAutomaton::State* y) {
              return x->symbol < y->symbol;
            });

  std::ostringstream out;
  out << "digraph desplant {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=circle];\n";
  for (const DesAutomaton::State* s : states) {
    out << "  \"" << s->symbol << "\" [label=\"" << s->symbol << "\\n"
        << s->signs.to_string() << "\"];\n";
  }
  for (const Transition& t : a.transitions) {
    out << "  \"" << t.from << "\" -> \"" << t.to << "\" [label=\"" << t.control
        << " / " << t.output << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace desplant
