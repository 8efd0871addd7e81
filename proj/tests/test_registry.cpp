#include "branchlab/registry.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "catch2/catch_amalgamated.hpp"

using namespace branchlab;

namespace {

TreeAutomorphism hand_grig(int which) {
  std::vector<AutState> t = {
      {{0, 1}, {0, 0}},
      {{1, 0}, {0, 0}},
      {{0, 1}, {1, 3}},
      {{0, 1}, {1, 4}},
      {{0, 1}, {0, 2}},
  };
  return TreeAutomorphism::from_states(TreeSpec({2}, true), t, which);
}

// Orbit of 0^n under the generating set, by plain BFS over vertices.
std::size_t orbit_size(const GroupSpec& g, std::size_t n) {
  Word start(n, 0);
  std::set<Word> seen{start};
  std::vector<Word> queue{start};
  while (!queue.empty()) {
    Word v = queue.back();
    queue.pop_back();
    for (const auto& sg : g.symmetric_generators()) {
      Word u = sg.g.apply(v);
      if (seen.insert(u).second) queue.push_back(u);
    }
  }
  return seen.size();
}

}  // namespace

TEST_CASE("builtin list") {
  auto names = builtin_names();
  CHECK(names == std::vector<std::string>{"adding_machine", "basilica",
                                          "grigorchuk", "gupta_sidki_3",
                                          "mirror"});
  for (const auto& n : names) CHECK(load_builtin(n).name() == n);
  CHECK_THROWS_AS(load_builtin("nope"), Error);
}

TEST_CASE("grigorchuk matches the hand encoding") {
  GroupSpec g = load_builtin("grigorchuk");
  CHECK(g.tree() == TreeSpec({2}, true));
  REQUIRE(g.generator_names() == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(g.generator("a") == hand_grig(1));
  CHECK(g.generator("b") == hand_grig(2));
  CHECK(g.generator("c") == hand_grig(3));
  CHECK(g.generator("d") == hand_grig(4));
  // Involutions fold into the symmetric closure without formal inverses.
  CHECK(g.symmetric_generators().size() == 4);
  CHECK(g.word({"b", "c", "d"}).is_identity());
  CHECK(g.word({"a", "b"}).apply(parse_word("00")) ==
        hand_grig(1).apply(hand_grig(2).apply(parse_word("00"))));
  CHECK(g.level_transitive_declared());
}

TEST_CASE("adding machine and word semantics") {
  GroupSpec g = load_builtin("adding_machine");
  const TreeAutomorphism& a = g.generator("a");
  CHECK(g.symmetric_generators().size() == 2);
  CHECK(g.resolve("a^-1") == a.inverse());
  // Leftmost factor acts last: w = x.y means x after y.
  TreeAutomorphism w = g.word({"a", "a^-1"});
  CHECK(w.is_identity());
  CHECK(g.word({"a", "a", "a"}) == power(a, 3));
  CHECK_THROWS_AS(g.word({"z"}), Error);
}

TEST_CASE("gupta sidki relations") {
  GroupSpec g = load_builtin("gupta_sidki_3");
  CHECK(g.tree() == TreeSpec({3}, true));
  CHECK(g.word({"t", "t", "t"}).is_identity());
  CHECK(g.word({"a", "a", "a"}).is_identity());
  CHECK(!g.word({"t", "a"}).is_identity());
  CHECK(g.generator("t").section({2}) == g.generator("t"));
  CHECK(g.generator("t").section({1}) == g.generator("a").inverse());
}

TEST_CASE("basilica smoke") {
  GroupSpec g = load_builtin("basilica");
  const TreeAutomorphism &a = g.generator("a"), &b = g.generator("b");
  CHECK(a.section({1}) == b);
  CHECK(b.section({1}) == a);
  CHECK(b.section({0}).is_identity());
  CHECK(!power(a, 2).is_identity());
  CHECK(!power(b, 4).is_identity());
  CHECK(g.symmetric_generators().size() == 4);
}

TEST_CASE("declared level transitivity holds") {
  for (const char* name : {"grigorchuk", "adding_machine", "basilica"}) {
    GroupSpec g = load_builtin(name);
    REQUIRE(g.level_transitive_declared());
    for (std::size_t n = 1; n <= 8; ++n)
      CHECK(orbit_size(g, n) == (std::size_t{1} << n));
  }
  GroupSpec gs = load_builtin("gupta_sidki_3");
  REQUIRE(gs.level_transitive_declared());
  std::size_t p = 1;
  for (std::size_t n = 1; n <= 6; ++n) {
    p *= 3;
    CHECK(orbit_size(gs, n) == p);
  }
  GroupSpec m = load_builtin("mirror");
  CHECK(!m.level_transitive_declared());
  CHECK(orbit_size(m, 2) == 2);
}

TEST_CASE("schema validation") {
  auto parse = [](const std::string& s) {
    return group_from_json(nlohmann::json::parse(s));
  };
  CHECK_THROWS_AS(parse(R"({"tree":{"degrees":[2]}})"), SchemaError);
  CHECK_THROWS_AS(parse(R"({"name":"x","tree":{"degrees":[2],"repeat":false},
      "generators":{"a":{"perm":[1,0],"sections":["e","e"]}}})"),
                  SchemaError);
  // Bad permutation.
  CHECK_THROWS_AS(parse(R"({"name":"x","tree":{"degrees":[2]},
      "generators":{"a":{"perm":[0,0],"sections":["e","e"]}}})"),
                  SchemaError);
  // Unknown section name.
  CHECK_THROWS_AS(parse(R"({"name":"x","tree":{"degrees":[2]},
      "generators":{"a":{"perm":[1,0],"sections":["e","q"]}}})"),
                  SchemaError);
  // Declared involution that is not one.
  CHECK_THROWS_AS(parse(R"({"name":"x","tree":{"degrees":[2]},
      "generators":{"a":{"perm":[1,0],"sections":["e","a"]}},
      "involutions":["a"]})"),
                  SchemaError);
  // Smoke relation that fails to hold.
  CHECK_THROWS_AS(parse(R"({"name":"x","tree":{"degrees":[2]},
      "generators":{"a":{"perm":[1,0],"sections":["e","a"]}},
      "relations_smoke":[["a","a"]]})"),
                  SchemaError);
  // Valid: inverse sections allowed.
  GroupSpec ok = parse(R"({"name":"x","tree":{"degrees":[2]},
      "generators":{"a":{"perm":[1,0],"sections":["a^-1","a"]}}})");
  CHECK(ok.generator("a").num_states() >= 1);
}

TEST_CASE("group files and resolve") {
  std::string path = "registry_roundtrip_tmp.json";
  {
    std::ofstream out(path);
    out << builtin_source("adding_machine");
  }
  GroupSpec g = load_group_file(path);
  CHECK(g.name() == "adding_machine");
  CHECK(resolve_group(path).generator("a") == g.generator("a"));
  CHECK(resolve_group("adding_machine").generator("a") == g.generator("a"));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_group_file("missing_file_xyz.json"), Error);
  CHECK_THROWS_AS(resolve_group("missing_file_xyz.json"), Error);
}

TEST_CASE("rist hints parse") {
  GroupSpec g = load_builtin("grigorchuk");
  // Placeholder table may be empty; when present every word must be valid.
  for (const auto& [vertex, words] : g.rist_hints()) {
    CHECK(g.tree().valid_vertex(parse_word(vertex)));
    for (const auto& w : words) CHECK(!g.word(w).is_identity());
  }
}
