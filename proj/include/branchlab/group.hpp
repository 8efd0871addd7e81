#pragma once

#include "branchlab/automorphism.hpp"

namespace branchlab {

class BallBudgetExceeded : public Error {
 public:
  explicit BallBudgetExceeded(const std::string& what) : Error(what) {}
};

constexpr std::size_t kDefaultBallBudget = std::size_t{1} << 20;

// Finitely generated group of tree automorphisms. The symmetric generating
// set lists every generator and, for non-involutions, its inverse under the
// name "<g>^-1"; entries are kept in name-lexicographic order, which fixes
// the edge order of every BFS in the package.
class GroupSpec {
 public:
  GroupSpec() = default;

  GroupSpec(std::string name, TreeSpec tree,
            std::vector<std::pair<std::string, TreeAutomorphism>> generators)
      : name_(std::move(name)), tree_(std::move(tree)) {
    // An empty generating set is the trivial group.
    for (auto& [gname, g] : generators) {
      require_same_tree(tree_, g.tree(), "GroupSpec");
      if (gname.empty() || gname == "e" || gname.find("^-1") != std::string::npos)
        throw Error("GroupSpec: reserved generator name " + gname);
      if (g.is_identity())
        throw Error("GroupSpec: generator " + gname + " is the identity");
      gens_.emplace_back(gname, g);
    }
    std::sort(gens_.begin(), gens_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < gens_.size(); ++i)
      if (gens_[i].first == gens_[i - 1].first)
        throw Error("GroupSpec: duplicate generator name " + gens_[i].first);
    for (const auto& [gname, g] : gens_) {
      sym_.push_back({gname, g, static_cast<int>(sym_.size())});
      TreeAutomorphism gi = g.inverse();
      if (gi != g) {
        sym_.back().partner = static_cast<int>(sym_.size());
        sym_.push_back({gname + "^-1", gi,
                        static_cast<int>(sym_.size()) - 1});
      }
    }
    std::sort(sym_.begin(), sym_.end(),
              [](const SymGen& a, const SymGen& b) { return a.name < b.name; });
    // Re-derive partner indices after the sort.
    for (std::size_t i = 0; i < sym_.size(); ++i) {
      TreeAutomorphism inv = sym_[i].g.inverse();
      for (std::size_t j = 0; j < sym_.size(); ++j)
        if (sym_[j].g == inv) {
          sym_[i].partner = static_cast<int>(j);
          break;
        }
    }
  }

  struct SymGen {
    std::string name;
    TreeAutomorphism g;
    int partner;  // index of the inverse generator in the symmetric list
  };

  const std::string& name() const { return name_; }
  const TreeSpec& tree() const { return tree_; }
  const std::vector<std::pair<std::string, TreeAutomorphism>>& generators()
      const {
    return gens_;
  }
  const std::vector<SymGen>& symmetric_generators() const { return sym_; }

  std::vector<std::string> generator_names() const {
    std::vector<std::string> out;
    out.reserve(gens_.size());
    for (const auto& [n, g] : gens_) out.push_back(n);
    return out;
  }

  const TreeAutomorphism& generator(const std::string& gname) const {
    for (const auto& [n, g] : gens_)
      if (n == gname) return g;
    throw Error("GroupSpec: unknown generator " + gname);
  }

  // Resolves a word of generator names (left factor acts last), e.g.
  // {"a","b"} is the map v -> a(b(v)). "e" and "<g>^-1" are accepted.
  TreeAutomorphism word(const std::vector<std::string>& letters) const {
    TreeAutomorphism acc = TreeAutomorphism::identity(tree_);
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
      if (*it == "e") continue;
      acc = compose(resolve(*it), acc);
    }
    return acc;
  }

  TreeAutomorphism resolve(const std::string& gname) const {
    if (gname == "e") return TreeAutomorphism::identity(tree_);
    for (const auto& s : sym_)
      if (s.name == gname) return s.g;
    if (gname.size() > 3 && gname.substr(gname.size() - 3) == "^-1")
      return generator(gname.substr(0, gname.size() - 3)).inverse();
    throw Error("GroupSpec: unknown generator " + gname);
  }

  // Extra registry knowledge consumed by rist_ball; vertex word string to
  // list of generator-name words.
  using HintTable = std::map<std::string, std::vector<std::vector<std::string>>>;
  const HintTable& rist_hints() const { return rist_hints_; }
  void set_rist_hints(HintTable h) { rist_hints_ = std::move(h); }

  bool level_transitive_declared() const { return level_transitive_; }
  void set_level_transitive(bool v) { level_transitive_ = v; }

 private:
  std::string name_;
  TreeSpec tree_;
  std::vector<std::pair<std::string, TreeAutomorphism>> gens_;
  std::vector<SymGen> sym_;
  HintTable rist_hints_;
  bool level_transitive_ = false;
};

// Ball of the group in the word metric of the symmetric generating set.
// Elements are deduplicated canonical automorphisms in BFS order, so entry
// 0 is the identity and each element's stored word is its shortlex-least
// witness relative to the generator order.
struct Ball {
  const GroupSpec* group = nullptr;
  int radius = 0;
  bool complete = true;  // false when the node budget cut enumeration short
  std::vector<TreeAutomorphism> elems;
  std::vector<std::vector<int>> words;  // symmetric-generator index strings
  std::vector<int> length;

  int find(const TreeAutomorphism& g) const {
    auto it = index_.find(g.hash());
    if (it == index_.end()) return -1;
    for (int i : it->second)
      if (elems[i] == g) return i;
    return -1;
  }

  std::string word_name(int i) const {
    if (words[i].empty()) return "e";
    std::string s;
    for (std::size_t k = 0; k < words[i].size(); ++k) {
      if (k) s += ".";
      s += group->symmetric_generators()[words[i][k]].name;
    }
    return s;
  }

  std::unordered_map<std::size_t, std::vector<int>> index_;
};

inline Ball enumerate_ball(const GroupSpec& g, int radius,
                           std::size_t budget = kDefaultBallBudget) {
  Ball b;
  b.group = &g;
  b.radius = radius;
  auto push = [&](TreeAutomorphism el, std::vector<int> w, int len) {
    int id = static_cast<int>(b.elems.size());
    b.index_[el.hash()].push_back(id);
    b.elems.push_back(std::move(el));
    b.words.push_back(std::move(w));
    b.length.push_back(len);
  };
  push(TreeAutomorphism::identity(g.tree()), {}, 0);
  // Generator loop outside, parents in discovery order inside: candidate
  // words of each length come up in lexicographic order, so the first
  // witness of an element is its shortlex-least word and element ids run in
  // shortlex order.
  std::size_t lo = 0;
  for (int r = 1; r <= radius && b.complete; ++r) {
    std::size_t hi = b.elems.size();
    for (std::size_t s = 0;
         s < g.symmetric_generators().size() && b.complete; ++s) {
      for (std::size_t i = lo; i < hi; ++i) {
        TreeAutomorphism next =
            compose(g.symmetric_generators()[s].g, b.elems[i]);
        if (b.find(next) >= 0) continue;
        if (b.elems.size() >= budget) {
          b.complete = false;
          break;
        }
        std::vector<int> w{static_cast<int>(s)};
        w.insert(w.end(), b.words[i].begin(), b.words[i].end());
        push(std::move(next), std::move(w), r);
      }
    }
    lo = hi;
  }
  return b;
}

}  // namespace branchlab
