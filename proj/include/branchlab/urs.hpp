#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "branchlab/confinement.hpp"
#include "branchlab/group.hpp"
#include "branchlab/oracle.hpp"
#include "branchlab/tree.hpp"

namespace branchlab {

// Nonempty closed subset of the boundary in one of three representations,
// each making "does the cylinder at v miss the set" exactly decidable.
class ClosedSetSpec {
 public:
  enum class Rep { complement_of_antichain, finite_ray_set, subtree };

  // Boundary minus the union of the antichain's cylinders.
  static ClosedSetSpec complement_of(Antichain removed) {
    if (complement_antichain(removed).empty())
      throw Error("ClosedSetSpec: removed cylinders cover the boundary");
    ClosedSetSpec c;
    c.rep_ = Rep::complement_of_antichain;
    c.tree_ = removed.tree();
    c.removed_ = std::move(removed);
    return c;
  }

  static ClosedSetSpec rays(const TreeSpec& t, std::vector<Ray> rs) {
    if (rs.empty()) throw Error("ClosedSetSpec: empty ray set");
    for (const Ray& r : rs)
      if (r.truncated())
        throw Error("ClosedSetSpec: truncated ray is not a boundary point");
    ClosedSetSpec c;
    c.rep_ = Rep::finite_ray_set;
    c.tree_ = t;
    c.rays_ = std::move(rs);
    return c;
  }

  // Boundary of the spherically homogeneous subtree keeping the first
  // widths[i] children at level i (schedule repeats its last entry).
  static ClosedSetSpec subtree(const TreeSpec& t, std::vector<int> widths) {
    if (widths.empty()) throw Error("ClosedSetSpec: empty width schedule");
    for (std::size_t i = 0; i < widths.size(); ++i)
      if (widths[i] < 1 || widths[i] > t.degree(i))
        throw Error("ClosedSetSpec: width out of range at level " +
                    std::to_string(i));
    if (!t.repeating() && widths.size() < t.period())
      throw Error("ClosedSetSpec: width schedule shorter than the tree");
    ClosedSetSpec c;
    c.rep_ = Rep::subtree;
    c.tree_ = t;
    c.widths_ = std::move(widths);
    return c;
  }

  Rep rep() const { return rep_; }
  const TreeSpec& tree() const { return tree_; }

  // Exact test for boundary(T_v) and the set being disjoint.
  bool cylinder_misses(const Word& v) const {
    switch (rep_) {
      case Rep::complement_of_antichain:
        return covered(v);
      case Rep::finite_ray_set: {
        for (const Ray& r : rays_)
          if (r.in_cylinder(v)) return false;
        return true;
      }
      case Rep::subtree: {
        for (std::size_t i = 0; i < v.size(); ++i)
          if (v[i] >= width(i)) return true;
        return false;
      }
    }
    throw Error("ClosedSetSpec: corrupt representation");
  }

  std::string str() const {
    switch (rep_) {
      case Rep::complement_of_antichain:
        return "complement" + removed_.str();
      case Rep::finite_ray_set: {
        std::string s = "rays{";
        for (std::size_t i = 0; i < rays_.size(); ++i) {
          if (i) s += ",";
          s += rays_[i].str();
        }
        return s + "}";
      }
      case Rep::subtree: {
        std::string s = "subtree[";
        for (std::size_t i = 0; i < widths_.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(widths_[i]);
        }
        return s + "]";
      }
    }
    return "corrupt";
  }

 private:
  ClosedSetSpec() = default;

  int width(std::size_t level) const {
    return widths_[std::min(level, widths_.size() - 1)];
  }

  // The cylinder at v is inside the union of removed cylinders. Recursion
  // bottoms out at the antichain's depth.
  bool covered(const Word& v) const {
    if (removed_.contains_cylinder(v)) return true;
    if (v.size() >= removed_.max_depth()) return false;
    if (!removed_.meets_cylinder(v)) return false;
    int d = tree_.degree(v.size());
    for (int x = 0; x < d; ++x) {
      Word c = v;
      c.push_back(static_cast<Letter>(x));
      if (!covered(c)) return false;
    }
    return true;
  }

  Rep rep_ = Rep::finite_ray_set;
  TreeSpec tree_;
  Antichain removed_;
  std::vector<Ray> rays_;
  std::vector<int> widths_;
};

// A subset of one level of the tree.
class Fingerprint {
 public:
  Fingerprint() = default;

  Fingerprint(const TreeSpec& t, std::size_t level, std::vector<Word> members)
      : tree_(t), level_(level) {
    for (const Word& v : members) {
      if (v.size() != level)
        throw Error("Fingerprint: member " + word_str(v) + " is not at level " +
                    std::to_string(level));
      if (!t.valid_vertex(v))
        throw Error("Fingerprint: invalid vertex " + word_str(v));
    }
    std::sort(members.begin(), members.end(), shortlex_less);
    members.erase(std::unique(members.begin(), members.end()), members.end());
    members_ = std::move(members);
  }

  const TreeSpec& tree() const { return tree_; }
  std::size_t level() const { return level_; }
  const std::vector<Word>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

  bool contains(const Word& v) const {
    return std::binary_search(members_.begin(), members_.end(), v,
                              shortlex_less);
  }

  bool operator==(const Fingerprint& o) const {
    return level_ == o.level_ && members_ == o.members_;
  }
  bool operator!=(const Fingerprint& o) const { return !(*this == o); }

  // One character per level vertex in lexicographic order.
  std::string bitset_string() const {
    std::string s;
    for (const Word& v : level_vertices(tree_, level_))
      s += contains(v) ? '1' : '0';
    return s;
  }

  std::string str() const {
    std::string s = "L" + std::to_string(level_) + "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) s += ",";
      s += word_str(members_[i]);
    }
    return s + "}";
  }

 private:
  TreeSpec tree_;
  std::size_t level_ = 0;
  std::vector<Word> members_;
};

// Level-n vertices whose cylinder misses the closed set. Exact.
inline Fingerprint empty_cylinder_fingerprint(const ClosedSetSpec& c,
                                              std::size_t n) {
  if (n < 1) throw Error("empty_cylinder_fingerprint: level must be positive");
  std::vector<Word> out;
  for (const Word& v : level_vertices(c.tree(), n))
    if (c.cylinder_misses(v)) out.push_back(v);
  return Fingerprint(c.tree(), n, std::move(out));
}

// A fingerprint together with the side its finite evidence errs on.
struct FingerprintApprox {
  Fingerprint fp;
  std::string direction;  // "over": may contain vertices the limit drops
  int scale = 0;
};

// Level-n vertices all of whose sampled rigid elements land in H. The true
// set only shrinks as the sampling scale grows.
inline FingerprintApprox rist_containment_fingerprint(
    const GroupSpec& g, const SubgroupOracle& h, std::size_t n, int scale,
    std::size_t budget = kDefaultBallBudget) {
  std::vector<Word> out;
  for (const Word& v : level_vertices(g.tree(), n)) {
    RistBall rb = rist_ball(g, v, scale, budget);
    bool all_in = true;
    for (const TreeAutomorphism& x : rb.elems)
      if (!h.contains(x)) {
        all_in = false;
        break;
      }
    if (all_in) out.push_back(v);
  }
  return {Fingerprint(g.tree(), n, std::move(out)), "over", scale};
}

namespace detail {

// Finite sample of H: the oracle's own enumeration when it carries one,
// otherwise the membership-filtered group ball.
inline std::vector<TreeAutomorphism> oracle_sample(
    const GroupSpec& g, const SubgroupOracle& h, int radius,
    std::size_t budget) {
  std::vector<TreeAutomorphism> out;
  if (h.kind() == SubgroupOracle::Kind::word_list) {
    const Ball& b = h.sample_ball();
    for (std::size_t i = 0; i < b.elems.size(); ++i)
      if (b.length[i] <= radius) out.push_back(b.elems[i]);
    return out;
  }
  Ball b = enumerate_ball(g, radius, budget);
  for (const TreeAutomorphism& x : b.elems)
    if (h.contains(x)) out.push_back(x);
  return out;
}

}  // namespace detail

// Level-n vertices fixed by every sampled element of H.
inline FingerprintApprox fix_level(const GroupSpec& g, const SubgroupOracle& h,
                                   std::size_t n, int scale,
                                   std::size_t budget = kDefaultBallBudget) {
  if (n < 1 || scale < 1) throw Error("fix_level: level and scale positive");
  std::vector<TreeAutomorphism> sample =
      detail::oracle_sample(g, h, scale, budget);
  std::vector<Word> out;
  for (const Word& v : level_vertices(g.tree(), n)) {
    bool fixed = true;
    for (const TreeAutomorphism& x : sample)
      if (x.apply(v) != v) {
        fixed = false;
        break;
      }
    if (fixed) out.push_back(v);
  }
  return {Fingerprint(g.tree(), n, std::move(out)), "over", scale};
}

// Exact BFS over the G-action on level subsets.
inline bool subset_orbit_equal(const GroupSpec& g, const Fingerprint& s1,
                               const Fingerprint& s2,
                               std::size_t cap = 1000000) {
  if (s1.level() != s2.level())
    throw Error("subset_orbit_equal: fingerprints at different levels");
  if (s1.size() != s2.size()) return false;  // cardinality is orbit-invariant
  if (s1 == s2) return true;

  std::set<std::vector<Word>> seen;
  std::vector<std::vector<Word>> frontier{s1.members()};
  seen.insert(s1.members());
  const std::vector<Word>& target = s2.members();
  while (!frontier.empty()) {
    std::vector<std::vector<Word>> next;
    for (const std::vector<Word>& cur : frontier)
      for (const auto& gen : g.symmetric_generators()) {
        std::vector<Word> img;
        img.reserve(cur.size());
        for (const Word& v : cur) img.push_back(gen.g.apply(v));
        std::sort(img.begin(), img.end(), shortlex_less);
        if (img == target) return true;
        if (seen.insert(img).second) {
          if (seen.size() > cap)
            throw Error("subset_orbit_equal: orbit exceeds cap");
          next.push_back(std::move(img));
        }
      }
    frontier = std::move(next);
  }
  return false;
}

struct AntichainSubgroup {
  std::vector<TreeAutomorphism> generators;
  std::vector<std::string> words;
  std::vector<std::size_t> vertex_index;  // position in the antichain
  std::vector<TreeAutomorphism> derived;
  std::vector<std::string> derived_words;
};

// Generators for the subgroup spanned by the rigid stabilizers over the
// antichain, plus its sampled derived subgroup. Disjoint supports make
// cross-vertex commutators trivial; that is asserted, not assumed.
inline AntichainSubgroup antichain_subgroup(
    const GroupSpec& g, const Antichain& v, int scale,
    std::size_t budget = kDefaultBallBudget) {
  AntichainSubgroup out;
  for (std::size_t i = 0; i < v.vertices().size(); ++i) {
    RistBall rb = rist_ball(g, v.vertices()[i], scale, budget);
    for (std::size_t k = 0; k < rb.elems.size(); ++k) {
      out.generators.push_back(rb.elems[k]);
      out.words.push_back(rb.words[k]);
      out.vertex_index.push_back(i);
    }
  }
  for (std::size_t i = 0; i < out.generators.size(); ++i)
    for (std::size_t j = i + 1; j < out.generators.size(); ++j) {
      TreeAutomorphism c = commutator(out.generators[i], out.generators[j]);
      if (out.vertex_index[i] != out.vertex_index[j]) {
        if (!c.is_identity())
          throw Error("antichain_subgroup: cross-vertex commutator [" +
                      out.words[i] + ", " + out.words[j] + "] is nontrivial");
        continue;
      }
      if (c.is_identity()) continue;
      out.derived.push_back(std::move(c));
      out.derived_words.push_back("[" + out.words[i] + ", " + out.words[j] +
                                  "]");
    }
  return out;
}

struct SandwichReport {
  Fingerprint fixed;
  Antichain unfixed;
  std::vector<LedgerEntry> ledger;
  bool lower_pass = false;
  bool upper_pass = false;
  bool pass() const { return lower_pass && upper_pass; }
};

// Finite shadow of the double inclusion pinning H between the derived
// rigid stabilizer of its unfixed part and the fixator of its fixed part.
inline SandwichReport sandwich_check(const GroupSpec& g,
                                     const SubgroupOracle& h, std::size_t n,
                                     int scale,
                                     std::size_t budget = kDefaultBallBudget) {
  SandwichReport rep;
  FingerprintApprox fa = fix_level(g, h, n, scale, budget);
  rep.fixed = fa.fp;
  rep.ledger.push_back({"fix_level", true,
                        "size=" + std::to_string(rep.fixed.size()) +
                            " scale=" + std::to_string(scale)});

  std::vector<Word> unfixed;
  for (const Word& v : level_vertices(g.tree(), n))
    if (!rep.fixed.contains(v)) unfixed.push_back(v);
  rep.unfixed = Antichain(g.tree(), unfixed);

  detail::CheckTally lower;
  AntichainSubgroup sub = antichain_subgroup(g, rep.unfixed, scale, budget);
  for (std::size_t i = 0; i < sub.derived.size(); ++i)
    lower.record(h.contains(sub.derived[i]), sub.derived_words[i]);
  rep.ledger.push_back(lower.entry("lower_rist_derived"));
  rep.lower_pass = lower.failed == 0;

  detail::CheckTally upper;
  std::vector<TreeAutomorphism> sample =
      detail::oracle_sample(g, h, scale, budget);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    bool fixes_all = true;
    for (const Word& v : rep.fixed.members())
      if (sample[i].apply(v) != v) {
        fixes_all = false;
        break;
      }
    upper.record(fixes_all, "sample " + std::to_string(i));
  }
  rep.ledger.push_back(upper.entry("upper_fix"));
  rep.upper_pass = upper.failed == 0;
  return rep;
}

}  // namespace branchlab
