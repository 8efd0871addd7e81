#include "branchlab/scenario.hpp"

#include <array>
#include <cstdio>
#include <filesystem>

#include "catch2/catch_amalgamated.hpp"

using namespace branchlab;

namespace {

nlohmann::json sc_parse(const std::string& text) {
  return nlohmann::json::parse(text);
}

struct CliRun {
  int exit_code;
  std::string out;
};

// End-to-end invocation of the built binary.
CliRun cli(const std::string& args) {
  std::string cmd = std::string(BRANCHLAB_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
    out.append(buf.data(), n);
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

}  // namespace

TEST_CASE("scenario schema rejects malformed input") {
  CHECK_THROWS_AS(run_scenario_text("not json"), Error);
  CHECK_THROWS_AS(run_scenario_text("{}"), Error);
  CHECK_THROWS_AS(run_scenario(sc_parse(R"x({"task":"nope",
      "group":"grigorchuk"})x")),
                  Error);
  CHECK_THROWS_AS(run_scenario(sc_parse(R"x({"task":"schreier",
      "group":"no_such_group","level":2})x")),
                  Error);
  CHECK_THROWS_AS(run_scenario(sc_parse(R"x({"task":"schreier",
      "group":"grigorchuk","level":-3})x")),
                  Error);
  CHECK_THROWS_WITH(run_scenario_text(R"x({"task":"schreier",
      "group":"grigorchuk"})x"),
                    Catch::Matchers::ContainsSubstring("scenario schema"));
  CHECK_THROWS_AS(run_scenario(sc_parse(R"x({"task":"confine","mode":"check",
      "group":"grigorchuk","p":["b"],"scale":3})x")),
                  Error);  // no oracle
  CHECK_THROWS_AS(run_scenario(sc_parse(R"x({"task":"confine","mode":"check",
      "group":"grigorchuk","p":["b"],"scale":3,
      "oracle":{"kind":"mystery"}})x")),
                  Error);
}

TEST_CASE("schreier and orbital scenarios export graphs") {
  ScenarioResult r = run_scenario(sc_parse(R"x({"task":"schreier",
      "group":"grigorchuk","level":3,"format":"dot"})x"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["vertices"] == 8);
  CHECK(r.report["edges"] == 32);
  std::string dot = r.report["artifact"].get<std::string>();
  CHECK(dot.find("digraph") == 0);
  CHECK(dot.find("label=\"a\"") != std::string::npos);
  CHECK(dot.find("peripheries=2") != std::string::npos);
  std::size_t arrows = 0;
  for (std::size_t i = 0; (i = dot.find(" -> ", i)) != std::string::npos;
       i += 4)
    ++arrows;
  CHECK(arrows == 32);

  ScenarioResult o = run_scenario(sc_parse(R"x({"task":"orbital",
      "group":"grigorchuk","ray":"(1)","radius":4})x"));
  CHECK(o.report["vertices"] == 5);
  CHECK(o.report["artifact"].is_object());

  CHECK_THROWS_WITH(run_scenario(sc_parse(R"x({"task":"schreier",
      "group":"grigorchuk","level":2,"format":"csv"})x")),
                    Catch::Matchers::ContainsSubstring("unsupported"));
}

TEST_CASE("growth scenario fits the orbit line") {
  ScenarioResult r = run_scenario(sc_parse(R"x({"task":"growth",
      "group":"grigorchuk","ray":"(1)","radius":6})x"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["fitted_degree"] == 1);
  std::string csv = r.report["artifact"].get<std::string>();
  CHECK(csv.rfind("radius,max_ball,min_ball,base_ball\n", 0) == 0);
  std::string verdict = r.report["verdicts"][0].get<std::string>();
  CHECK(verdict.find("degree 1") != std::string::npos);
  CHECK(verdict.find("[3,6]") != std::string::npos);
}

TEST_CASE("germ scenario reports the covering") {
  ScenarioResult r = run_scenario(sc_parse(R"x({"task":"germ",
      "group":"gupta_sidki_3","ray":"(2)","radius":5,
      "expect":"confirmed"})x"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["covering_ok"] == true);
  CHECK(r.report["germ_vertices"].get<int>() >
        r.report["orbital_vertices"].get<int>());
}

TEST_CASE("confine scenarios mirror the library results") {
  ScenarioResult r = run_scenario(sc_parse(R"x({"task":"confine",
      "mode":"check","group":"grigorchuk","p":["b","c","d"],
      "oracle":{"kind":"point_stabilizer","ray":"(1)"},"scale":6,
      "expect":"confirmed"})x"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["confining"]["confirmed"] == true);
  CHECK(r.report["confining"]["ball_size"] == 108);

  // a.a enumerates only the identity, so the check refutes immediately.
  ScenarioResult bad = run_scenario(sc_parse(R"x({"task":"confine",
      "mode":"check","group":"grigorchuk","p":["b"],
      "oracle":{"kind":"word_list","words":["a.a"],"scope":4},
      "scale":2,"expect":"confirmed"})x"));
  CHECK(bad.exit_code == 2);
  CHECK(bad.report["confining"]["confirmed"] == false);
  CHECK(bad.report["confining"]["refuting_word"] == "e");

  ScenarioResult ref = run_scenario(sc_parse(R"x({"task":"confine",
      "mode":"refine","group":"grigorchuk","p":["b","c","d"],
      "oracle":{"kind":"point_stabilizer","ray":"(1)"},"scale":6})x"));
  CHECK(ref.exit_code == 0);
  CHECK(ref.report["ok"] == true);
  CHECK(ref.report["changed"] == true);
  CHECK(ref.report["recheck"]["confirmed"] == true);
}

TEST_CASE("displace scenarios build and verify") {
  ScenarioResult b = run_scenario(sc_parse(R"x({"task":"displace",
      "mode":"build","group":"grigorchuk","p":["a.b","a.d"],"depth":6})x"));
  CHECK(b.exit_code == 0);
  CHECK(b.report["omega"].size() == 2);
  CHECK(b.report["verified"] == true);

  ScenarioResult v = run_scenario(sc_parse(R"x({"task":"displace",
      "mode":"verify","group":"adding_machine","p":["a"],
      "omega":[["00"]],"expect":"confirmed"})x"));
  CHECK(v.exit_code == 0);
  CHECK(v.report["check"]["ok"] == true);

  ScenarioResult fail = run_scenario(sc_parse(R"x({"task":"displace",
      "mode":"verify","group":"adding_machine","p":["a"],
      "omega":[["0"]],"expect":"confirmed"})x"));
  CHECK(fail.exit_code == 2);
  CHECK(fail.report["check"]["ok"] == false);
}

TEST_CASE("engine scenario runs the pipeline to a full ledger") {
  ScenarioResult r = run_scenario(sc_parse(R"x({"task":"engine",
      "group":"grigorchuk","p":["b","c","d"],
      "oracle":{"kind":"point_stabilizer","ray":"(1)"},"scale":8,
      "expect":"confirmed"})x"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["conclusive"] == true);
  const nlohmann::json& ledger = r.report["engine"]["ledger"];
  CHECK(ledger.size() == 14);
  for (const auto& e : ledger) CHECK(e["pass"] == true);

  // The embedded report parses back to the same JSON.
  EngineReport back = engine_report_from_json(r.report["engine"]);
  CHECK(to_json(back) == r.report["engine"]);
}

TEST_CASE("urs scenarios answer fingerprint, orbit and sandwich") {
  ScenarioResult fp = run_scenario(sc_parse(R"x({"task":"urs",
      "mode":"fingerprint","group":"grigorchuk","level":3,
      "set":{"kind":"rays","rays":["(1)"]}})x"));
  CHECK(fp.report["fingerprint"]["size"] == 7);
  CHECK(fp.report["fingerprint"]["bitset"] == "11111110");

  ScenarioResult fo = run_scenario(sc_parse(R"x({"task":"urs",
      "mode":"fingerprint","group":"grigorchuk","level":2,"scale":3,
      "kind":"fix_level",
      "oracle":{"kind":"point_stabilizer","ray":"(1)"}})x"));
  CHECK(fo.report["fingerprint"]["members"] ==
        nlohmann::json::array({"10", "11"}));
  CHECK(fo.report["fingerprint"]["direction"] == "over");

  ScenarioResult eq = run_scenario(sc_parse(R"x({"task":"urs","mode":"orbit",
      "group":"grigorchuk","level":2,"level_sets":[["11"],["00"]],
      "expect":"confirmed"})x"));
  CHECK(eq.exit_code == 0);
  CHECK(eq.report["equal"] == true);

  ScenarioResult ne = run_scenario(sc_parse(R"x({"task":"urs","mode":"orbit",
      "group":"grigorchuk","level":1,"level_sets":[["1"],[]],
      "expect":"confirmed"})x"));
  CHECK(ne.exit_code == 2);
  CHECK(ne.report["equal"] == false);

  ScenarioResult sw = run_scenario(sc_parse(R"x({"task":"urs",
      "mode":"sandwich","group":"grigorchuk","level":3,"scale":4,
      "oracle":{"kind":"point_stabilizer","ray":"(1)"},
      "expect":"confirmed"})x"));
  CHECK(sw.exit_code == 0);
  CHECK(sw.report["sandwich"]["pass"] == true);
  CHECK(sw.report["sandwich"]["fixed"]["bitset"] == "00000011");
}

TEST_CASE("bratteli scenario profiles an element") {
  ScenarioResult r = run_scenario(sc_parse(R"x({"task":"bratteli",
      "group":"adding_machine","element":"a","horizon":6,
      "diagram":{"levels":[{"vertices":1},
                           {"vertices":1,"edges":[[0,0],[0,0]]}],
                 "tail":"repeat"}})x"));
  CHECK(r.exit_code == 0);
  CHECK(r.report["profile"]["verdict"] == "bounded");
  std::string csv = r.report["artifact"].get<std::string>();
  CHECK(csv.rfind("level,vertex,A_v\n", 0) == 0);
  CHECK(csv.find("6,0,1\n") != std::string::npos);
}

TEST_CASE("scenario reports are byte-identical across runs") {
  const char* text = R"x({"task":"engine","group":"grigorchuk",
      "p":["b","c","d"],"oracle":{"kind":"point_stabilizer","ray":"(1)"},
      "scale":6})x";
  ScenarioResult r1 = run_scenario_text(text);
  ScenarioResult r2 = run_scenario_text(text);
  CHECK(r1.report_text() == r2.report_text());
  CHECK(r1.exit_code == r2.exit_code);
}

TEST_CASE("scenario artifacts are written to the requested path") {
  std::string path = "cli_artifact_tmp.csv";
  nlohmann::json sc = sc_parse(R"x({"task":"growth","group":"grigorchuk",
      "ray":"(1)","radius":4})x");
  sc["out"] = path;
  ScenarioResult r = run_scenario(sc);
  REQUIRE(r.artifacts == std::vector<std::string>{path});
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "radius,max_ball,min_ball,base_ball");
  in.close();
  std::remove(path.c_str());
}

TEST_CASE("shipped scenario files run clean") {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(BRANCHLAB_SCENARIO_DIR))
    if (e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() >= 10);
  for (const std::string& f : files) {
    INFO(f);
    ScenarioResult r = run_scenario_file(f);
    CHECK(r.exit_code == 0);
    for (const std::string& a : r.artifacts) std::remove(a.c_str());
  }
}

TEST_CASE("binary end to end") {
  CliRun check = cli("group check --group grigorchuk");
  CHECK(check.exit_code == 0);
  CHECK(check.out.find("\"involution\": true") != std::string::npos);

  CliRun missing = cli("group check --group not_a_group");
  CHECK(missing.exit_code == 1);
  CHECK(missing.out.find("error:") != std::string::npos);

  CliRun s = cli("schreier --group grigorchuk --level 2");
  CHECK(s.exit_code == 0);
  CHECK(s.out.find("\"vertices\": 4") != std::string::npos);

  CliRun conf = cli(
      "confine check --group grigorchuk --word b --word c --word d "
      "--stab-ray \"(1)\" --scale 6 --expect confirmed");
  CHECK(conf.exit_code == 0);
  CHECK(conf.out.find("confining confirmed") != std::string::npos);

  // Definitive refutation with expectation: exit 2.
  CliRun ref = cli(
      "urs orbit --group grigorchuk --level 1 --scenario " +
      [] {
        std::string p = "cli_orbit_tmp.json";
        std::ofstream out(p);
        out << R"x({"level_sets":[["1"],[]],"expect":"confirmed"})x";
        return p;
      }());
  CHECK(ref.exit_code == 2);
  std::remove("cli_orbit_tmp.json");

  CliRun bad = cli("run --scenario does_not_exist.json");
  CHECK(bad.exit_code == 1);

  // Same invocation twice: identical bytes.
  CliRun g1 = cli("growth --group grigorchuk --ray \"(1)\" --radius 5");
  CliRun g2 = cli("growth --group grigorchuk --ray \"(1)\" --radius 5");
  CHECK(g1.exit_code == 0);
  CHECK(g1.out == g2.out);
}
