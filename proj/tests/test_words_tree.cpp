#include "branchlab/tree.hpp"

#include <random>
#include <set>

#include "catch2/catch_amalgamated.hpp"

using namespace branchlab;

namespace {

// Oracle: every depth-d word has exactly one prefix among the vertices of
// a and b together, i.e. the two cylinder unions partition the boundary.
bool partitions_boundary(const TreeSpec& t, const Antichain& a,
                         const Antichain& b, std::size_t depth) {
  for (const Word& w : level_vertices(t, depth)) {
    int hits = 0;
    for (const Word& v : a.vertices())
      if (is_prefix(v, w)) ++hits;
    for (const Word& v : b.vertices())
      if (is_prefix(v, w)) ++hits;
    if (hits != 1) return false;
  }
  return true;
}

Antichain random_antichain(const TreeSpec& t, std::mt19937& rng,
                           std::size_t max_depth) {
  std::vector<Word> out;
  std::vector<Word> stack{Word{}};
  std::uniform_int_distribution<int> coin(0, 3);
  while (!stack.empty()) {
    Word v = stack.back();
    stack.pop_back();
    if (!v.empty() && (v.size() >= max_depth || coin(rng) == 0)) {
      if (coin(rng) != 1) out.push_back(v);  // sometimes drop a branch
      continue;
    }
    for (int x = 0; x < t.degree(v.size()); ++x) {
      Word c = v;
      c.push_back(static_cast<Letter>(x));
      stack.push_back(std::move(c));
    }
  }
  return Antichain(t, std::move(out));
}

}  // namespace

TEST_CASE("tree spec basics") {
  TreeSpec bin({2}, true);
  CHECK(bin.regular());
  CHECK(bin.degree(0) == 2);
  CHECK(bin.degree(17) == 2);
  CHECK(bin.level_size(4) == 16);

  TreeSpec mixed({2, 3}, true);
  CHECK(!mixed.regular());
  CHECK(mixed.degree(0) == 2);
  CHECK(mixed.degree(1) == 3);
  CHECK(mixed.degree(2) == 2);
  CHECK(mixed.level_size(3) == 12);
  CHECK(mixed.shifted(1).degree(0) == 3);
  CHECK(mixed.shifted(2) == mixed);

  TreeSpec finite({2, 2, 2}, false);
  CHECK(finite.finite_depth() == 3);
  CHECK_THROWS_AS(finite.degree(3), Error);

  CHECK_THROWS_AS(TreeSpec({}, true), Error);
  CHECK_THROWS_AS(TreeSpec({1}, true), Error);
  CHECK_NOTHROW(TreeSpec({1}, true, true));
  CHECK_THROWS_AS(TreeSpec({2}, true).level_size(40), LevelCapExceeded);
}

TEST_CASE("word parse and order") {
  CHECK(word_str(parse_word("011")) == "011");
  CHECK(parse_word("") == Word{});
  CHECK(word_str(Word{0, 12, 1}) == "0[12]1");
  CHECK(parse_word("0[12]1") == Word{0, 12, 1});
  CHECK(shortlex_less(parse_word("1"), parse_word("01")));
  CHECK(shortlex_less(parse_word("01"), parse_word("10")));
  CHECK(!shortlex_less(parse_word("10"), parse_word("10")));
}

TEST_CASE("cylinder relation") {
  Word e{}, v0 = parse_word("0"), v00 = parse_word("00"), v1 = parse_word("1");
  CHECK(cylinder_relation(e, v0) == CylinderRel::second_inside_first);
  CHECK(cylinder_relation(v00, v0) == CylinderRel::first_inside_second);
  CHECK(cylinder_relation(v0, v1) == CylinderRel::disjoint);
  CHECK(cylinder_relation(v0, v0) == CylinderRel::equal);
  CHECK(cylinders_disjoint(v00, v1));
  CHECK(!cylinders_disjoint(e, v1));
}

TEST_CASE("antichain validation and order") {
  TreeSpec bin({2}, true);
  CHECK_THROWS_AS(Antichain(bin, {parse_word("0"), parse_word("00")}), Error);
  CHECK_THROWS_AS(Antichain(bin, {parse_word("2")}), Error);
  Antichain a(bin, {parse_word("01"), parse_word("1"), parse_word("001")});
  CHECK(a.vertices() ==
        std::vector<Word>{parse_word("1"), parse_word("01"), parse_word("001")});
  CHECK(a.str() == "{1,01,001}");
  CHECK(a.contains_cylinder(parse_word("011")));
  CHECK(!a.contains_cylinder(parse_word("0")));
  CHECK(a.meets_cylinder(parse_word("0")));
  CHECK(!a.meets_cylinder(parse_word("000")));
}

TEST_CASE("complement antichain, pinned cases") {
  TreeSpec bin({2}, true);

  Antichain a(bin, {parse_word("00")});
  Antichain c = complement_antichain(a);
  CHECK(c.vertices() == std::vector<Word>{parse_word("1"), parse_word("01")});

  // Root antichain: empty complement. Empty antichain: complement is the root.
  CHECK(complement_antichain(Antichain(bin, {Word{}})).empty());
  CHECK(complement_antichain(Antichain()).vertices() ==
        std::vector<Word>{Word{}});

  // Full level: complement empty.
  Antichain lev(bin, level_vertices(bin, 3));
  CHECK(complement_antichain(lev).empty());
}

TEST_CASE("complement antichain partitions the boundary") {
  std::mt19937 rng(20260815);
  for (auto degrees : std::vector<std::vector<int>>{{2}, {3}, {2, 3}}) {
    TreeSpec t(degrees, true);
    for (int it = 0; it < 60; ++it) {
      Antichain a = random_antichain(t, rng, 5);
      Antichain b = complement_antichain(a);
      std::size_t d = std::max(a.max_depth(), b.max_depth());
      CHECK(partitions_boundary(t, a, b, d));
      // Coarseness: no complete sibling family in the complement.
      for (const Word& v : b.vertices()) {
        if (v.empty()) continue;
        Word parent(v.begin(), v.end() - 1);
        int siblings = 0;
        for (const Word& u : b.vertices())
          if (u.size() == v.size() && is_prefix(parent, u)) ++siblings;
        CHECK(siblings < t.degree(parent.size()));
      }
      // Complementing twice yields a set with the same cylinder union.
      Antichain back = complement_antichain(b);
      std::size_t d2 = std::max(a.max_depth(), back.max_depth());
      for (const Word& w : level_vertices(t, d2)) {
        CHECK(a.contains_cylinder(w) == back.contains_cylinder(w));
      }
    }
  }
}

TEST_CASE("cylinder covered") {
  TreeSpec bin({2}, true);
  Antichain a(bin, {parse_word("00"), parse_word("01"), parse_word("10")});
  CHECK(cylinder_covered(bin, parse_word("0"), a));
  CHECK(!cylinder_covered(bin, parse_word("1"), a));
  CHECK(cylinder_covered(bin, parse_word("100"), a));
  CHECK(!cylinder_covered(bin, Word{}, a));
}

TEST_CASE("refine to depth") {
  TreeSpec bin({2}, true);
  Antichain a(bin, {parse_word("0"), parse_word("11")});
  Antichain r = refine_to_depth(a, 2);
  CHECK(r.vertices() == std::vector<Word>{parse_word("00"), parse_word("01"),
                                          parse_word("11")});
  CHECK(partitions_boundary(bin, r, complement_antichain(a), 3));
}

TEST_CASE("ray canonical form") {
  TreeSpec bin({2}, true);
  Ray r1 = Ray::parse(bin, "1(1)");
  CHECK(r1.preperiod().empty());
  CHECK(r1.period() == parse_word("1"));
  CHECK(r1.str() == "(1)");

  // 01(01) = 0(10) = (01).
  CHECK(Ray::parse(bin, "01(01)") == Ray::parse(bin, "0(10)"));
  CHECK(Ray::parse(bin, "01(01)") == Ray::parse(bin, "(01)"));
  CHECK(Ray::parse(bin, "(0101)") == Ray::parse(bin, "(01)"));
  CHECK(Ray::parse(bin, "(01)") != Ray::parse(bin, "(10)"));

  CHECK(Ray::parse(bin, "(1)").prefix(3) == parse_word("111"));
  CHECK(Ray::parse(bin, "0(10)").prefix(4) == parse_word("0101"));
  CHECK(Ray::parse(bin, "(1)").in_cylinder(parse_word("11")));
  CHECK(!Ray::parse(bin, "(1)").in_cylinder(parse_word("10")));

  CHECK_THROWS_AS(Ray::periodic(bin, {}, parse_word("2")), Error);
  CHECK_THROWS_AS(Ray::periodic(bin, {}, {}), Error);
}

TEST_CASE("ray truncation records") {
  TreeSpec bin({2}, true);
  Ray tr = Ray::truncation(bin, parse_word("0110"));
  CHECK(tr.truncated());
  CHECK(tr.prefix(4) == parse_word("0110"));
  CHECK_THROWS_AS(tr.at(4), Error);
  CHECK(tr.in_cylinder(parse_word("011")));
  CHECK_THROWS_AS(tr.in_cylinder(parse_word("01101")), Error);
  CHECK(Ray::parse(bin, "0110...") == tr);
}

TEST_CASE("rays on periodic non-constant schedules") {
  TreeSpec mixed({2, 3}, true);
  // Tail letter 2 is only valid at odd levels; period length 1 would put it
  // at every level.
  CHECK_THROWS_AS(Ray::periodic(mixed, {}, parse_word("2")), Error);
  Ray r = Ray::periodic(mixed, {}, parse_word("02"));
  CHECK(r.prefix(4) == parse_word("0202"));
  TreeSpec finite({2, 2}, false);
  CHECK_THROWS_AS(Ray::periodic(finite, {}, parse_word("0")), Error);
  CHECK_NOTHROW(Ray::truncation(finite, parse_word("01")));
}

TEST_CASE("level vertices") {
  TreeSpec mixed({2, 3}, true);
  auto lv = level_vertices(mixed, 2);
  CHECK(lv.size() == 6);
  CHECK(lv.front() == parse_word("00"));
  CHECK(lv.back() == parse_word("12"));
  CHECK_THROWS_AS(level_vertices(TreeSpec({2}, true), 30), LevelCapExceeded);
}
