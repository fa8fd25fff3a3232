#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "desplant/abstraction.hpp"
#include "desplant/errors.hpp"
#include "desplant/io.hpp"
#include "desplant/system.hpp"

namespace desplant {

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  if (text.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
}

inline Vec parse_reals(const std::string& text, const std::string& what) {
  Vec values;
  for (const std::string& part : split_list(text)) {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) {
        throw InputError(what + ": cannot parse '" + part + "' as a real number");
      }
      values.push_back(v);
    } catch (const std::logic_error&) {
      throw InputError(what + ": cannot parse '" + part + "' as a real number");
    }
  }
  if (values.empty()) {
    throw InputError(what + " must list at least one number");
  }
  return values;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Numeric flags shared by the commands that integrate. Only flags the user
// actually passed end up in the overrides, so precedence stays CLI over file
// settings over defaults.
struct NumericFlags {
  double dt = 0.0;
  double horizon = 0.0;
  double eps_t = 0.0;
  double eps_h = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd, bool with_sampling) {
    cmd->add_option("--dt", dt, "integrator step size");
    cmd->add_option("--horizon", horizon, "maximum integration time per control");
    cmd->add_option("--eps-t", eps_t, "event time localization tolerance");
    cmd->add_option("--eps-h", eps_h, "surface zero-band half-width");
    if (with_sampling) {
      cmd->add_option("--samples", samples, "sampled initial states per cell");
      cmd->add_option("--seed", seed, "sampling seed");
    }
  }

  ConfigOverrides overrides(const CLI::App* cmd) const {
    ConfigOverrides o;
    if (cmd->count("--dt")) o.dt = dt;
    if (cmd->count("--horizon")) o.horizon = horizon;
    if (cmd->count("--eps-t")) o.eps_t = eps_t;
    if (cmd->count("--eps-h")) o.eps_h = eps_h;
    if (cmd->get_option_no_throw("--samples") != nullptr && cmd->count("--samples")) {
      o.samples_per_cell = samples;
    }
    if (cmd->get_option_no_throw("--seed") != nullptr && cmd->count("--seed")) {
      o.seed = seed;
    }
    return o;
  }
};

inline ExtractionConfig effective_config(const PlantSystem& sys,
                                         const ConfigOverrides& cli) {
  return cli.apply(sys.file_config.apply(ExtractionConfig{}));
}

}  // namespace detail

inline int cmd_extract(const std::string& system_path, const ConfigOverrides& overrides,
                       const std::string& out_path, std::ostream& out) {
  const PlantSystem sys = load_system(system_path);
  const ExtractionConfig cfg = detail::effective_config(sys, overrides);
  const DesAutomaton automaton = extract(sys, cfg);
  save_automaton(automaton, out_path);

  const ObservabilityReport report = check_observability(automaton);
  out << "states: " << automaton.states.size() << "\n";
  out << "transitions: " << automaton.transitions.size() << "\n";
  out << "observable: " << (report.observable ? "yes" : "no") << "\n";
  out << "coincident-event runs: " << automaton.metadata.coincident_event_runs << "\n";
  out << "divergent runs: " << automaton.metadata.divergent_runs << "\n";
  if (automaton.metadata.no_event.empty()) {
    out << "no-event pairs: none\n";
  } else {
    std::vector<std::string> pairs;
    for (const NoEventPair& p : automaton.metadata.no_event) {
      pairs.push_back(p.from + "/" + p.control);
    }
    out << "no-event pairs: " << detail::join(pairs, ", ") << "\n";
  }
  out << "wrote " << out_path << "\n";
  return 0;
}

inline int cmd_simulate(const std::string& system_path, const std::string& x0_text,
                        const std::string& controls_text, const ConfigOverrides& overrides,
                        const std::string& out_path, std::ostream& out) {
  const PlantSystem sys = load_system(system_path);
  const ExtractionConfig cfg = detail::effective_config(sys, overrides);
  const Vec x0 = detail::parse_reals(x0_text, "--x0");
  const std::vector<std::string> controls = detail::split_list(controls_text);

  const Trace trace = simulate_closed_loop(sys, x0, controls, cfg);
  save_trace(trace, out_path);

  out << detail::join(trace.states, " ") << "\n";
  out << detail::join(trace.symbols, " ") << "\n";
  if (trace.no_event_termination) {
    out << "note: horizon expired with no event under " << trace.controls.back() << "\n";
  }
  out << "wrote " << out_path << "\n";
  return 0;
}

inline int cmd_check(const std::string& automaton_path, std::ostream& out) {
  const DesAutomaton automaton = load_automaton(automaton_path);
  const ObservabilityReport report = check_observability(automaton);
  out << "observable: " << (report.observable ? "yes" : "no") << "\n";
  for (const ObservabilityWitness& w : report.witnesses) {
    out << "witness: " << w.from << " / " << w.output << " -> {"
        << detail::join(w.targets, ", ") << "}\n";
  }
  return report.observable ? 0 : 2;
}

inline int cmd_reconstruct(const std::string& automaton_path, const std::string& initial,
                           const std::string& symbols_text, std::ostream& out) {
  const DesAutomaton automaton = load_automaton(automaton_path);
  std::vector<PlantSymbol> symbols;
  for (const std::string& part : detail::split_list(symbols_text)) {
    symbols.push_back(PlantSymbol::parse(part));
  }
  const std::vector<std::string> sequence = reconstruct(automaton, initial, symbols);
  out << detail::join(sequence, " ") << "\n";
  return 0;
}

inline int cmd_export_dot(const std::string& automaton_path, const std::string& out_path,
                          std::ostream& out) {
  const DesAutomaton automaton = load_automaton(automaton_path);
  const std::string dot = to_dot(automaton);
  if (out_path.empty()) {
    out << dot;
  } else {
    detail::write_file(out_path, dot);
    out << "wrote " << out_path << "\n";
  }
  return 0;
}

/// Command-line entry point. `args` excludes the program name. All output
/// goes to the given streams so tests can run commands in-process.
/// Exit codes: 0 success, 1 input or usage error, 2 automaton not observable,
/// 3 inadmissible symbol sequence, 4 numeric failure.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"discrete abstraction of a continuous plant over a hypersurface partition"};
  app.require_subcommand(1);

  // extract
  CLI::App* extract_cmd =
      app.add_subcommand("extract", "build the automaton from a system file");
  std::string extract_system;
  std::string extract_out = "automaton.json";
  detail::NumericFlags extract_flags;
  extract_cmd->add_option("system", extract_system, "system definition file")->required();
  extract_cmd->add_option("--out", extract_out, "output automaton file");
  extract_flags.attach(extract_cmd, true);

  // simulate
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "run a control sequence from an initial state");
  std::string simulate_system;
  std::string simulate_x0;
  std::string simulate_controls;
  std::string simulate_out = "trace.json";
  detail::NumericFlags simulate_flags;
  simulate_cmd->add_option("system", simulate_system, "system definition file")->required();
  simulate_cmd->add_option("--x0", simulate_x0, "initial state, comma-separated reals")
      ->required();
  simulate_cmd
      ->add_option("--controls", simulate_controls, "control symbols, comma-separated")
      ->required();
  simulate_cmd->add_option("--out", simulate_out, "output trace file");
  simulate_flags.attach(simulate_cmd, false);

  // check-observability
  CLI::App* check_cmd =
      app.add_subcommand("check-observability", "verify state/symbol uniqueness");
  std::string check_automaton;
  check_cmd->add_option("automaton", check_automaton, "automaton file")->required();

  // reconstruct
  CLI::App* reconstruct_cmd = app.add_subcommand(
      "reconstruct", "recover the state sequence behind a symbol string");
  std::string reconstruct_automaton;
  std::string reconstruct_initial;
  std::string reconstruct_symbols;
  reconstruct_cmd->add_option("automaton", reconstruct_automaton, "automaton file")
      ->required();
  reconstruct_cmd->add_option("--initial", reconstruct_initial, "starting state symbol")
      ->required();
  reconstruct_cmd
      ->add_option("--symbols", reconstruct_symbols,
                   "plant symbols, comma-separated (may be empty)");

  // export-dot
  CLI::App* dot_cmd = app.add_subcommand("export-dot", "render the automaton as DOT");
  std::string dot_automaton;
  std::string dot_out;
  dot_cmd->add_option("automaton", dot_automaton, "automaton file")->required();
  dot_cmd->add_option("--out", dot_out, "output file (default: standard output)");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("desplant");
  for (const std::string& a : args) argv_storage.push_back(a);
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*extract_cmd) {
      return cmd_extract(extract_system, extract_flags.overrides(extract_cmd),
                         extract_out, out);
    }
    if (*simulate_cmd) {
      return cmd_simulate(simulate_system, simulate_x0, simulate_controls,
                          simulate_flags.overrides(simulate_cmd), simulate_out, out);
    }
    if (*check_cmd) {
      return cmd_check(check_automaton, out);
    }
    if (*reconstruct_cmd) {
      return cmd_reconstruct(reconstruct_automaton, reconstruct_initial,
                             reconstruct_symbols, out);
    }
    if (*dot_cmd) {
      return cmd_export_dot(dot_automaton, dot_out, out);
    }
    err << "error: no command given\n";
    return 1;
  } catch (const InadmissibleSequenceError& e) {
    err << "error: " << e.what() << " (position " << e.position() << ")\n";
    return 3;
  } catch (const NotObservableError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace desplant
