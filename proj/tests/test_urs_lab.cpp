#include "branchlab/urs.hpp"

#include <map>
#include <set>

#include "branchlab/registry.hpp"
#include "catch2/catch_amalgamated.hpp"

using namespace branchlab;

namespace {

Ray ray1(const TreeSpec& t) { return Ray::periodic(t, {}, {1}); }

std::set<Word> as_set(const Fingerprint& f) {
  return std::set<Word>(f.members().begin(), f.members().end());
}

}  // namespace

TEST_CASE("closed set construction rejects degenerate inputs") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  REQUIRE_THROWS_AS(ClosedSetSpec::rays(t, {}), Error);
  REQUIRE_THROWS_AS(ClosedSetSpec::rays(t, {Ray::truncation(t, Word{0})}),
                    Error);
  REQUIRE_THROWS_AS(ClosedSetSpec::complement_of(Antichain(t, {Word{}})),
                    Error);
  REQUIRE_THROWS_AS(
      ClosedSetSpec::complement_of(Antichain(t, {Word{0}, Word{1}})), Error);
  REQUIRE_THROWS_AS(ClosedSetSpec::subtree(t, {}), Error);
  REQUIRE_THROWS_AS(ClosedSetSpec::subtree(t, {3}), Error);
  REQUIRE_THROWS_AS(ClosedSetSpec::subtree(t, {0}), Error);
}

TEST_CASE("empty cylinder fingerprints are exact per representation") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();

  ClosedSetSpec single_ray = ClosedSetSpec::rays(t, {ray1(t)});
  Fingerprint f = empty_cylinder_fingerprint(single_ray, 3);
  REQUIRE(f.size() == 7);
  REQUIRE_FALSE(f.contains(Word{1, 1, 1}));

  ClosedSetSpec whole = ClosedSetSpec::complement_of(Antichain());
  for (std::size_t n = 1; n <= 4; ++n)
    REQUIRE(empty_cylinder_fingerprint(whole, n).empty());

  ClosedSetSpec left = ClosedSetSpec::complement_of(Antichain(t, {Word{1}}));
  REQUIRE(as_set(empty_cylinder_fingerprint(left, 2)) ==
          std::set<Word>{Word{1, 0}, Word{1, 1}});

  REQUIRE_THROWS_AS(empty_cylinder_fingerprint(single_ray, 0), Error);
}

TEST_CASE("cylinder coverage by several removed pieces is recognized") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  // {00, 01, 10} covers the 0-cylinder and half the 1-cylinder.
  ClosedSetSpec c = ClosedSetSpec::complement_of(
      Antichain(t, {Word{0, 0}, Word{0, 1}, Word{1, 0}}));
  Fingerprint f1 = empty_cylinder_fingerprint(c, 1);
  REQUIRE(as_set(f1) == std::set<Word>{Word{0}});
  Fingerprint f2 = empty_cylinder_fingerprint(c, 2);
  REQUIRE(as_set(f2) ==
          std::set<Word>{Word{0, 0}, Word{0, 1}, Word{1, 0}});
}

TEST_CASE("refinement consistency: a missing cylinder stays missing under "
          "children") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  std::vector<ClosedSetSpec> cases = {
      ClosedSetSpec::rays(t, {ray1(t), Ray::periodic(t, {0, 1}, {0, 1})}),
      ClosedSetSpec::complement_of(Antichain(t, {Word{0, 1}, Word{1, 0}})),
      ClosedSetSpec::subtree(t, {1}),
  };
  for (const ClosedSetSpec& c : cases)
    for (std::size_t n = 1; n <= 5; ++n) {
      Fingerprint cur = empty_cylinder_fingerprint(c, n);
      Fingerprint next = empty_cylinder_fingerprint(c, n + 1);
      for (const Word& v : cur.members())
        for (int x = 0; x < t.degree(n); ++x) {
          Word child = v;
          child.push_back(static_cast<Letter>(x));
          REQUIRE(next.contains(child));
        }
    }
}

TEST_CASE("degree-width schedules are told apart by fingerprint size") {
  GroupSpec g = load_builtin("gupta_sidki_3");
  const TreeSpec& t = g.tree();
  std::set<std::size_t> sizes;
  for (int w = 1; w <= 3; ++w) {
    ClosedSetSpec c = ClosedSetSpec::subtree(t, {w});
    sizes.insert(empty_cylinder_fingerprint(c, 2).size());
  }
  REQUIRE(sizes == std::set<std::size_t>{0, 5, 8});
}

TEST_CASE("rist containment fingerprint at the first level") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();

  FingerprintApprox whole = rist_containment_fingerprint(
      g, SubgroupOracle::fixator(Antichain()), 1, 3);
  REQUIRE(whole.fp.size() == 2);
  REQUIRE(whole.direction == "over");

  FingerprintApprox stab = rist_containment_fingerprint(
      g, SubgroupOracle::point_stabilizer(t, ray1(t)), 1, 3);
  REQUIRE(as_set(stab.fp) == std::set<Word>{Word{0}});

  FingerprintApprox rigid = rist_containment_fingerprint(
      g, SubgroupOracle::rigid_stabilizer(t, Word{0}), 1, 3);
  REQUIRE(as_set(rigid.fp) == std::set<Word>{Word{0}});
}

TEST_CASE("rist containment only shrinks as the scale grows") {
  GroupSpec g = load_builtin("grigorchuk");
  SubgroupOracle h = SubgroupOracle::point_stabilizer(g.tree(), ray1(g.tree()));
  Fingerprint prev;
  for (int scale = 1; scale <= 4; ++scale) {
    FingerprintApprox cur = rist_containment_fingerprint(g, h, 2, scale);
    if (scale > 1)
      for (const Word& v : cur.fp.members()) REQUIRE(prev.contains(v));
    prev = cur.fp;
  }
}

TEST_CASE("fix_level over-approximates from oracle samples") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  SubgroupOracle h = SubgroupOracle::point_stabilizer(t, ray1(t));

  for (std::size_t n = 1; n <= 4; ++n) {
    FingerprintApprox fa = fix_level(g, h, n, 4);
    REQUIRE(fa.fp.contains(Word(n, 1)));
    REQUIRE(fa.direction == "over");
  }

  // The rigid stabilizer of 0 fixes everything under 1.
  FingerprintApprox rigid =
      fix_level(g, SubgroupOracle::rigid_stabilizer(t, Word{0}), 2, 4);
  REQUIRE(rigid.fp.contains(Word{1, 0}));
  REQUIRE(rigid.fp.contains(Word{1, 1}));

  FingerprintApprox germ =
      fix_level(g, SubgroupOracle::germ_stabilizer(t, ray1(t)), 2, 4);
  REQUIRE(germ.fp.contains(Word{1, 1}));

  REQUIRE_THROWS_AS(fix_level(g, h, 0, 4), Error);
  REQUIRE_THROWS_AS(fix_level(g, h, 2, 0), Error);
}

TEST_CASE("fix_level only shrinks as the scale grows") {
  GroupSpec g = load_builtin("grigorchuk");
  SubgroupOracle h = SubgroupOracle::germ_stabilizer(g.tree(), ray1(g.tree()));
  Fingerprint prev;
  for (int scale = 1; scale <= 5; ++scale) {
    FingerprintApprox cur = fix_level(g, h, 3, scale);
    if (scale > 1)
      for (const Word& v : cur.fp.members()) REQUIRE(prev.contains(v));
    prev = cur.fp;
  }
}

TEST_CASE("fix_level draws word-list samples from the oracle's own ball") {
  GroupSpec g = load_builtin("grigorchuk");
  SubgroupOracle h = SubgroupOracle::word_list(g, {{"b"}, {"c"}}, 4);
  FingerprintApprox fa = fix_level(g, h, 1, 4);
  // b and c act trivially on the first level.
  REQUIRE(fa.fp.size() == 2);
}

TEST_CASE("subset orbit equality on the first two levels") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  Fingerprint s0(t, 1, {Word{0}});
  Fingerprint s1(t, 1, {Word{1}});
  REQUIRE(subset_orbit_equal(g, s0, s1));
  REQUIRE(subset_orbit_equal(g, s1, s0));

  Fingerprint empty1(t, 1, {});
  REQUIRE_FALSE(subset_orbit_equal(g, empty1, s0));

  Fingerprint s11(t, 2, {Word{1, 1}});
  Fingerprint s00(t, 2, {Word{0, 0}});
  REQUIRE(subset_orbit_equal(g, s11, s00));

  REQUIRE_THROWS_AS(subset_orbit_equal(g, s0, s00), Error);
  REQUIRE_THROWS_AS(subset_orbit_equal(g, s00, s11, 1), Error);
}

TEST_CASE("subset orbit equality matches brute-force orbits on level 2") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  std::vector<Word> lvl = level_vertices(t, 2);

  // Brute-force orbit partition of all 16 subsets under the level action.
  std::vector<std::set<Word>> subsets;
  for (unsigned mask = 0; mask < 16; ++mask) {
    std::set<Word> s;
    for (unsigned i = 0; i < 4; ++i)
      if (mask & (1u << i)) s.insert(lvl[i]);
    subsets.push_back(std::move(s));
  }
  std::map<std::set<Word>, int> component;
  int comp_count = 0;
  for (const auto& start : subsets) {
    if (component.count(start)) continue;
    int id = comp_count++;
    std::vector<std::set<Word>> frontier{start};
    component[start] = id;
    while (!frontier.empty()) {
      std::vector<std::set<Word>> next;
      for (const auto& cur : frontier)
        for (const auto& gen : g.symmetric_generators()) {
          std::set<Word> img;
          for (const Word& v : cur) img.insert(gen.g.apply(v));
          if (!component.count(img)) {
            component[img] = id;
            next.push_back(std::move(img));
          }
        }
      frontier = std::move(next);
    }
  }

  for (const auto& s1 : subsets)
    for (const auto& s2 : subsets) {
      Fingerprint f1(t, 2, std::vector<Word>(s1.begin(), s1.end()));
      Fingerprint f2(t, 2, std::vector<Word>(s2.begin(), s2.end()));
      REQUIRE(subset_orbit_equal(g, f1, f2) ==
              (component[s1] == component[s2]));
    }
}

TEST_CASE("orbit equality is an equivalence relation on samples") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  std::vector<Fingerprint> samples = {
      Fingerprint(t, 2, {Word{0, 0}}),
      Fingerprint(t, 2, {Word{1, 1}}),
      Fingerprint(t, 2, {Word{0, 1}, Word{1, 0}}),
      Fingerprint(t, 2, {Word{0, 0}, Word{0, 1}}),
      Fingerprint(t, 2, {}),
  };
  for (const auto& s : samples) REQUIRE(subset_orbit_equal(g, s, s));
  for (const auto& s1 : samples)
    for (const auto& s2 : samples)
      REQUIRE(subset_orbit_equal(g, s1, s2) == subset_orbit_equal(g, s2, s1));
  for (const auto& s1 : samples)
    for (const auto& s2 : samples)
      for (const auto& s3 : samples)
        if (subset_orbit_equal(g, s1, s2) && subset_orbit_equal(g, s2, s3))
          REQUIRE(subset_orbit_equal(g, s1, s3));
}

TEST_CASE("orbit-equal fingerprints have equal cardinality") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();
  std::vector<Word> lvl = level_vertices(t, 2);
  for (unsigned m1 = 0; m1 < 16; ++m1)
    for (unsigned m2 = 0; m2 < 16; ++m2) {
      std::vector<Word> v1, v2;
      for (unsigned i = 0; i < 4; ++i) {
        if (m1 & (1u << i)) v1.push_back(lvl[i]);
        if (m2 & (1u << i)) v2.push_back(lvl[i]);
      }
      Fingerprint f1(t, 2, std::move(v1)), f2(t, 2, std::move(v2));
      if (subset_orbit_equal(g, f1, f2)) REQUIRE(f1.size() == f2.size());
    }
}

TEST_CASE("antichain subgroup collects per-vertex rigid generators") {
  GroupSpec g = load_builtin("grigorchuk");
  const TreeSpec& t = g.tree();

  AntichainSubgroup single =
      antichain_subgroup(g, Antichain(t, {Word{1}}), 3);
  RistBall direct = rist_ball(g, Word{1}, 3);
  REQUIRE(single.words == direct.words);
  REQUIRE(single.derived.size() > 0);

  AntichainSubgroup both =
      antichain_subgroup(g, Antichain(t, {Word{0}, Word{1}}), 3);
  std::set<std::string> words(both.words.begin(), both.words.end());
  REQUIRE(words.count("d") == 1);
  REQUIRE(words.count("a.d.a") == 1);
  // Same-vertex derived generators are supported inside their cylinder.
  for (std::size_t i = 0; i < both.derived.size(); ++i)
    REQUIRE_FALSE(both.derived[i].is_identity());
}

TEST_CASE("cross-vertex commutators vanish exactly") {
  GroupSpec g = load_builtin("grigorchuk");
  RistBall left = rist_ball(g, Word{0}, 3);
  RistBall right = rist_ball(g, Word{1}, 3);
  for (const TreeAutomorphism& x : left.elems)
    for (const TreeAutomorphism& y : right.elems)
      REQUIRE(commutator(x, y).is_identity());
}

TEST_CASE("sandwich check passes for the ray stabilizer") {
  GroupSpec g = load_builtin("grigorchuk");
  SubgroupOracle h = SubgroupOracle::point_stabilizer(g.tree(), ray1(g.tree()));
  SandwichReport rep = sandwich_check(g, h, 3, 4);
  REQUIRE(rep.pass());
  REQUIRE(rep.lower_pass);
  REQUIRE(rep.upper_pass);
  REQUIRE(as_set(rep.fixed) == std::set<Word>{Word{1, 1, 0}, Word{1, 1, 1}});
  REQUIRE(rep.fixed.bitset_string() == "00000011");
  REQUIRE(rep.ledger.size() == 3);
  for (const LedgerEntry& e : rep.ledger) REQUIRE(e.pass);
}

TEST_CASE("sandwich check on the whole group is vacuous but consistent") {
  GroupSpec g = load_builtin("grigorchuk");
  SubgroupOracle whole = SubgroupOracle::fixator(Antichain());
  SandwichReport rep = sandwich_check(g, whole, 2, 3);
  REQUIRE(rep.pass());
  REQUIRE(rep.fixed.empty());
  REQUIRE(rep.unfixed.size() == 4);
}

TEST_CASE("sandwich upper direction reflects rigid support") {
  GroupSpec g = load_builtin("grigorchuk");
  SubgroupOracle h = SubgroupOracle::rigid_stabilizer(g.tree(), Word{0});
  SandwichReport rep = sandwich_check(g, h, 2, 4);
  REQUIRE(rep.upper_pass);
  REQUIRE(rep.fixed.contains(Word{1, 0}));
  REQUIRE(rep.fixed.contains(Word{1, 1}));
}
