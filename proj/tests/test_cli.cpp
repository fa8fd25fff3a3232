#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "desplant/cli.hpp"
#include "desplant/io.hpp"
#include "desplant/system.hpp"

#include "support/common.hpp"
#include "support/random_system.hpp"

using namespace desplant;
using Catch::Matchers::ContainsSubstring;
using testsupport::scratch_path;
using testsupport::sv;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string& bundled() {
  static const std::string path = testsupport::bundled_double_integrator();
  return path;
}

// An observable automaton saved to disk for the read-only commands.
const std::string& saved_automaton() {
  static const std::string path = [] {
    ExtractionConfig cfg;
    cfg.samples_per_cell = 16;
    cfg.horizon = 20.0;
    const DesAutomaton automaton = extract(double_integrator_system(), cfg);
    const std::string p = scratch_path("cli_fixture_automaton.json");
    save_automaton(automaton, p);
    return p;
  }();
  return path;
}

}  // namespace

TEST_CASE("extract builds, reports and writes the automaton", "[cli]") {
  const std::string out_path = scratch_path("cli_extracted.json");
  const CliResult r = run({"extract", bundled(), "--out", out_path,
                           "--samples", "16", "--horizon", "20", "--seed", "3"});
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("states: 4"));
  CHECK_THAT(r.out, ContainsSubstring("observable: yes"));
  CHECK_THAT(r.out, ContainsSubstring("transitions:"));
  CHECK_THAT(r.out, ContainsSubstring("wrote " + out_path));

  SECTION("the flags landed in the recorded configuration") {
    const DesAutomaton automaton = load_automaton(out_path);
    CHECK(automaton.metadata.samples_per_cell == 16);
    CHECK(automaton.metadata.horizon == 20.0);
    CHECK(automaton.metadata.seed == 3);
    CHECK(automaton.states.size() == 4);
  }
}

TEST_CASE("extract layers CLI flags over file config over defaults", "[cli]") {
  const std::string system_path = scratch_path("cli_layered_system.json");
  detail::write_file(system_path,
                     R"({"format_version": 1,
                         "plant": {"builtin": "double_integrator"},
                         "config": {"samples": 8, "dt": 0.01, "horizon": 20}})");

  const std::string a_path = scratch_path("cli_layered_a.json");
  const CliResult file_only = run({"extract", system_path, "--out", a_path});
  REQUIRE(file_only.code == 0);
  const DesAutomaton a = load_automaton(a_path);
  CHECK(a.metadata.samples_per_cell == 8);
  CHECK(a.metadata.dt == 0.01);
  CHECK(a.metadata.horizon == 20.0);

  const std::string b_path = scratch_path("cli_layered_b.json");
  const CliResult with_flag =
      run({"extract", system_path, "--dt", "0.005", "--out", b_path});
  REQUIRE(with_flag.code == 0);
  const DesAutomaton b = load_automaton(b_path);
  CHECK(b.metadata.dt == 0.005);
  CHECK(b.metadata.samples_per_cell == 8);
}

TEST_CASE("simulate prints the state and symbol lines", "[cli]") {
  SECTION("the quadrant tour, including a negative coordinate on the command line") {
    const std::string trace_path = scratch_path("cli_tour_trace.json");
    const CliResult r =
        run({"simulate", bundled(), "--x0", "-1,0.5", "--controls", "r3,r1,r1,r3",
             "--horizon", "20", "--out", trace_path});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("p2 p1 p4 p3 p2\n"));
    CHECK_THAT(r.out, ContainsSubstring("z1+ z2- z1- z2+\n"));
    CHECK_THAT(r.out, ContainsSubstring("wrote " + trace_path));
  }

  SECTION("a horizon expiry is noted") {
    const CliResult r = run({"simulate", bundled(), "--x0", "1,1", "--controls", "r3",
                             "--horizon", "5", "--out", scratch_path("cli_expiry.json")});
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("p1\n\n"));
    CHECK_THAT(r.out, ContainsSubstring("note: horizon expired with no event under r3"));
  }

  SECTION("a start on the partition boundary is an input error") {
    const CliResult r = run({"simulate", bundled(), "--x0", "0,0", "--controls", "r1"});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("hypersurface"));
  }

  SECTION("an empty control list is an input error") {
    const CliResult r = run({"simulate", bundled(), "--x0", "1,1", "--controls", ""});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("control sequence is empty"));
  }

  SECTION("unparseable coordinates name the flag") {
    const CliResult r = run({"simulate", bundled(), "--x0", "1,abc", "--controls", "r1"});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("--x0"));
  }
}

TEST_CASE("check-observability separates clean and ambiguous automata", "[cli]") {
  SECTION("the extracted benchmark automaton passes") {
    const CliResult r = run({"check-observability", saved_automaton()});
    CHECK(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("observable: yes"));
  }

  SECTION("an ambiguous automaton exits 2 with its witnesses") {
    DesAutomaton a;
    a.states.push_back({"p1", sv({1, 1})});
    a.states.push_back({"p2", sv({-1, 1})});
    a.states.push_back({"p4", sv({1, -1})});
    a.controls = {"r1", "r2"};
    a.plant_symbols = {"z1+", "z1-", "z2+", "z2-"};
    a.transitions.insert({"p1", "r1", "p2", "z1-"});
    a.transitions.insert({"p1", "r2", "p4", "z1-"});
    const std::string path = scratch_path("cli_ambiguous.json");
    save_automaton(a, path);

    const CliResult r = run({"check-observability", path});
    CHECK(r.code == 2);
    CHECK_THAT(r.out, ContainsSubstring("observable: no"));
    CHECK_THAT(r.out, ContainsSubstring("witness: p1 / z1- -> {p2, p4}"));
  }
}

TEST_CASE("reconstruct replays symbol strings from the command line", "[cli]") {
  SECTION("the quadrant cycle") {
    const CliResult r = run({"reconstruct", saved_automaton(), "--initial", "p2",
                             "--symbols", "z1+,z2-,z1-,z2+"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "p2 p1 p4 p3 p2\n");
  }

  SECTION("an empty symbol string yields just the initial state") {
    const CliResult with_flag =
        run({"reconstruct", saved_automaton(), "--initial", "p2", "--symbols", ""});
    CHECK(with_flag.code == 0);
    CHECK(with_flag.out == "p2\n");

    const CliResult without_flag =
        run({"reconstruct", saved_automaton(), "--initial", "p2"});
    CHECK(without_flag.code == 0);
    CHECK(without_flag.out == "p2\n");
  }

  SECTION("an inadmissible symbol reports its position and exits 3") {
    const CliResult r = run({"reconstruct", saved_automaton(), "--initial", "p1",
                             "--symbols", "z1+"});
    CHECK(r.code == 3);
    CHECK_THAT(r.err, ContainsSubstring("(position 1)"));
  }

  SECTION("an unknown initial state is an input error") {
    const CliResult r = run({"reconstruct", saved_automaton(), "--initial", "p9"});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("unknown state p9"));
  }

  SECTION("an unobservable automaton exits 2") {
    DesAutomaton a;
    a.states.push_back({"p1", sv({1, 1})});
    a.states.push_back({"p2", sv({-1, 1})});
    a.states.push_back({"p4", sv({1, -1})});
    a.controls = {"r1", "r2"};
    a.plant_symbols = {"z1+", "z1-", "z2+", "z2-"};
    a.transitions.insert({"p1", "r1", "p2", "z1-"});
    a.transitions.insert({"p1", "r2", "p4", "z1-"});
    const std::string path = scratch_path("cli_ambiguous_replay.json");
    save_automaton(a, path);
    const CliResult r = run({"reconstruct", path, "--initial", "p1"});
    CHECK(r.code == 2);
  }
}

TEST_CASE("export-dot renders to standard output or a file", "[cli]") {
  const CliResult to_stdout = run({"export-dot", saved_automaton()});
  REQUIRE(to_stdout.code == 0);
  CHECK_THAT(to_stdout.out, ContainsSubstring("digraph desplant {"));
  CHECK_THAT(to_stdout.out, ContainsSubstring(R"("p1" [label="p1\n[1 1]"];)"));

  SECTION("repeated runs are byte-identical") {
    const CliResult again = run({"export-dot", saved_automaton()});
    CHECK(again.out == to_stdout.out);
  }

  SECTION("--out redirects the rendering into a file") {
    const std::string dot_path = scratch_path("cli_automaton.dot");
    const CliResult to_file = run({"export-dot", saved_automaton(), "--out", dot_path});
    REQUIRE(to_file.code == 0);
    CHECK_THAT(to_file.out, ContainsSubstring("wrote " + dot_path));
    CHECK(detail::read_file(dot_path) == to_stdout.out);
  }
}

TEST_CASE("usage problems and bad files exit 1 with a message", "[cli]") {
  SECTION("no subcommand") {
    const CliResult r = run({});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
  }

  SECTION("unknown subcommand") {
    CHECK(run({"frobnicate"}).code == 1);
  }

  SECTION("help prints the command list and exits 0") {
    const CliResult r = run({"--help"});
    CHECK(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("extract"));
    CHECK_THAT(r.out, ContainsSubstring("simulate"));
    CHECK_THAT(r.out, ContainsSubstring("reconstruct"));
  }

  SECTION("missing required arguments") {
    CHECK(run({"extract"}).code == 1);
    CHECK(run({"simulate", bundled(), "--x0", "1,1"}).code == 1);
  }

  SECTION("missing input files") {
    const CliResult r = run({"extract", "/nonexistent/system.json"});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("cannot open"));
  }

  SECTION("a zero normal in the system file names the functional") {
    const std::string path = scratch_path("cli_zero_normal.json");
    detail::write_file(path,
                       R"({"format_version": 1,
                           "plant": {"builtin": "double_integrator"},
                           "partition": [{"id": 1, "normal": [0, 0]},
                                          {"id": 2, "normal": [0, 1]}]})");
    const CliResult r = run({"extract", path});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("functional 1"));
  }

  SECTION("duplicate control symbols in the system file") {
    const std::string path = scratch_path("cli_dup_controls.json");
    detail::write_file(path,
                       R"({"format_version": 1,
                           "plant": {"builtin": "double_integrator"},
                           "controls": [{"symbol": "r1", "value": [-1]},
                                         {"symbol": "r1", "value": [1]}]})");
    const CliResult r = run({"extract", path});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, ContainsSubstring("duplicate control symbol"));
  }
}

TEST_CASE("numeric blowups exit with the dedicated code", "[cli]") {
  // An unstable diagonal plant with no reachable hypersurface: the state
  // doubles every fraction of a second until it overflows, well before the
  // configured horizon.
  const std::string path = scratch_path("cli_unstable.json");
  detail::write_file(path,
                     R"({"format_version": 1,
                         "plant": {"linear": {"A": [[5, 0], [0, 5]], "B": [[0], [1]]}},
                         "controls": [{"symbol": "r1", "value": [0]}],
                         "partition": [{"id": 1, "normal": [1, 0], "offset": 1e9}],
                         "sampling_box": [[1, 2], [1, 2]],
                         "config": {"horizon": 200, "dt": 0.01}})");
  const CliResult r = run({"simulate", path, "--x0", "1,1",
                           "--controls", "r1", "--out", scratch_path("cli_unstable_trace.json")});
  CHECK(r.code == 4);
  CHECK_THAT(r.err, ContainsSubstring("non-finite"));
}
