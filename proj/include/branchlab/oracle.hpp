#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "branchlab/automorphism.hpp"
#include "branchlab/group.hpp"
#include "branchlab/tree.hpp"

namespace branchlab {

// A generator-list oracle was asked about an element it cannot decide.
class OracleScopeExceeded : public Error {
 public:
  using Error::Error;
};

// Membership test for a subgroup of the ambient automorphism group. The
// first four kinds decide membership exactly for every finite-state
// automorphism; word_list answers from an enumerated ball and throws
// OracleScopeExceeded on queries outside what the ball can settle.
class SubgroupOracle {
 public:
  enum class Kind {
    point_stabilizer,
    germ_stabilizer,
    rigid_stabilizer,
    fixator,
    word_list,
  };

  static SubgroupOracle point_stabilizer(const TreeSpec& t, Ray x) {
    x.validate(t);
    SubgroupOracle o;
    o.kind_ = Kind::point_stabilizer;
    o.tree_ = t;
    o.ray_ = std::move(x);
    return o;
  }

  static SubgroupOracle germ_stabilizer(const TreeSpec& t, Ray x) {
    x.validate(t);
    SubgroupOracle o;
    o.kind_ = Kind::germ_stabilizer;
    o.tree_ = t;
    o.ray_ = std::move(x);
    return o;
  }

  static SubgroupOracle rigid_stabilizer(const TreeSpec& t, Word v,
                                         std::uint64_t level_cap = kDefaultLevelCap) {
    if (!t.valid_vertex(v))
      throw Error("SubgroupOracle: invalid vertex " + word_str(v));
    SubgroupOracle o;
    o.kind_ = Kind::rigid_stabilizer;
    o.tree_ = t;
    o.vertex_ = v;
    for (const Word& w : level_vertices(t, v.size(), level_cap))
      if (w != v) o.siblings_.push_back(w);
    return o;
  }

  // H fixes the given clopen set pointwise. Pass the antichain covering the
  // set; complement_antichain converts an open-support description.
  static SubgroupOracle fixator(Antichain fixed_part) {
    SubgroupOracle o;
    o.kind_ = Kind::fixator;
    o.tree_ = fixed_part.tree();
    o.fixed_ = std::move(fixed_part);
    return o;
  }

  static SubgroupOracle word_list(const GroupSpec& g,
                                  const std::vector<std::vector<std::string>>& words,
                                  int scope,
                                  std::size_t budget = kDefaultBallBudget) {
    if (scope < 1) throw Error("SubgroupOracle: word_list scope must be positive");
    SubgroupOracle o;
    o.kind_ = Kind::word_list;
    o.tree_ = g.tree();
    o.scope_ = scope;
    std::vector<std::pair<std::string, TreeAutomorphism>> gens;
    for (std::size_t i = 0; i < words.size(); ++i) {
      TreeAutomorphism el = g.word(words[i]);
      if (!el.is_identity())
        gens.emplace_back("h" + std::to_string(i), std::move(el));
    }
    o.sub_ = std::make_shared<GroupSpec>("oracle:" + g.name(), g.tree(),
                                         std::move(gens));
    o.ball_ = enumerate_ball(*o.sub_, scope, budget);
    int longest = 0;
    for (int len : o.ball_.length) longest = std::max(longest, len);
    o.exhausted_ = o.ball_.complete && longest < scope;
    return o;
  }

  Kind kind() const { return kind_; }
  const TreeSpec& tree() const { return tree_; }

  // True when a negative answer from this oracle is only ball-relative.
  bool scope_limited() const {
    return kind_ == Kind::word_list && !exhausted_;
  }

  // The enumerated subgroup sample backing a word_list oracle.
  const Ball& sample_ball() const {
    if (kind_ != Kind::word_list)
      throw Error("SubgroupOracle: only word_list oracles carry a sample");
    return ball_;
  }

  bool contains(const TreeAutomorphism& g) const {
    require_same_tree(tree_, g.tree(), "SubgroupOracle");
    switch (kind_) {
      case Kind::point_stabilizer:
        return ray_.truncated() ? g.fixes_vertex(ray_.preperiod())
                                : g.fixes_ray(ray_);
      case Kind::germ_stabilizer:
        return ray_.truncated() ? g.fixes_cylinder_pointwise(ray_.preperiod())
                                : g.fixes_ray_germ(ray_);
      case Kind::rigid_stabilizer: {
        for (const Word& w : siblings_)
          if (!g.fixes_cylinder_pointwise(w)) return false;
        return g.fixes_vertex(vertex_);
      }
      case Kind::fixator: {
        for (const Word& v : fixed_.vertices())
          if (!g.fixes_cylinder_pointwise(v)) return false;
        return true;
      }
      case Kind::word_list: {
        if (ball_.find(g) >= 0) return true;
        if (exhausted_) return false;
        throw OracleScopeExceeded(
            "SubgroupOracle: membership undecided at scope " +
            std::to_string(scope_));
      }
    }
    throw Error("SubgroupOracle: corrupt kind");
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::point_stabilizer:
        return "point_stabilizer(" + ray_.str() + ")";
      case Kind::germ_stabilizer:
        return "germ_stabilizer(" + ray_.str() + ")";
      case Kind::rigid_stabilizer:
        return "rigid_stabilizer(" +
               (vertex_.empty() ? std::string("@") : word_str(vertex_)) + ")";
      case Kind::fixator:
        return "fixator(" + fixed_.str() + ")";
      case Kind::word_list:
        return "word_list(" + std::to_string(ball_.elems.size()) +
               " elements, scope " + std::to_string(scope_) +
               (exhausted_ ? ", exhausted)" : ", truncated)");
    }
    return "corrupt";
  }

 private:
  SubgroupOracle() = default;

  Kind kind_ = Kind::point_stabilizer;
  TreeSpec tree_;
  Ray ray_;
  Word vertex_;
  std::vector<Word> siblings_;
  Antichain fixed_;
  std::shared_ptr<GroupSpec> sub_;  // keeps ball_.group alive across copies
  Ball ball_;
  int scope_ = 0;
  bool exhausted_ = false;
};

}  // namespace branchlab
