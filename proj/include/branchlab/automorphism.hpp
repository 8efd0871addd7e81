#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "branchlab/tree.hpp"

namespace branchlab {

class StateBudgetExceeded : public Error {
 public:
  explicit StateBudgetExceeded(const std::string& what) : Error(what) {}
};

constexpr std::size_t kDefaultStateBudget = 1u << 18;

// Input form of one automaton state: the permutation of the letters at the
// state's level and the state id of each section.
struct AutState {
  std::vector<Letter> perm;
  std::vector<int> next;
};

// Finite-state automorphism of the tree of words, represented by a Mealy
// automaton. After construction the automaton is reachable-restricted,
// bisimulation-minimal and BFS-numbered from the initial state 0, so two
// equal automorphisms have byte-identical state tables. States carry the
// level phase mod the schedule period; regular trees have a single phase.
class TreeAutomorphism {
 public:
  TreeAutomorphism() {  // identity on the regular binary tree
    states_.push_back({{0, 1}, {0, 0}});
    phases_.push_back(0);
  }

  static TreeAutomorphism identity(const TreeSpec& t) {
    std::vector<AutState> sts;
    for (std::size_t ph = 0; ph < t.period(); ++ph) {
      AutState s;
      int d = t.degree(ph);
      for (int x = 0; x < d; ++x) {
        s.perm.push_back(static_cast<Letter>(x));
        s.next.push_back(static_cast<int>((ph + 1) % t.period()));
      }
      sts.push_back(std::move(s));
    }
    return from_states(t, std::move(sts), 0);
  }

  static TreeAutomorphism from_states(const TreeSpec& t,
                                      std::vector<AutState> states,
                                      int initial) {
    if (!t.repeating())
      throw Error("TreeAutomorphism: finite-depth trees are not supported");
    TreeAutomorphism g;
    g.tree_ = t;
    if (states.empty() || initial < 0 ||
        initial >= static_cast<int>(states.size()))
      throw Error("TreeAutomorphism: bad initial state");
    for (auto& s : states) {
      if (s.perm.size() != s.next.size())
        throw Error("TreeAutomorphism: perm/next size mismatch");
      for (int n : s.next)
        if (n < 0 || n >= static_cast<int>(states.size()))
          throw Error("TreeAutomorphism: dangling section reference");
    }
    g.states_ = std::move(states);
    g.phases_.assign(g.states_.size(), -1);
    g.initial_ = initial;
    g.assign_phases_and_validate();
    g.canonicalize();
    return g;
  }

  const TreeSpec& tree() const { return tree_; }
  std::size_t num_states() const { return states_.size(); }
  int phase_of(int s) const { return phases_[s]; }
  const std::vector<Letter>& perm_at(int s) const { return states_[s].perm; }
  int next_at(int s, Letter x) const { return states_[s].next[x]; }

  bool is_identity() const {
    for (const auto& s : states_)
      for (std::size_t x = 0; x < s.perm.size(); ++x)
        if (s.perm[x] != static_cast<Letter>(x)) return false;
    return true;
  }

  Word apply(const Word& v) const {
    if (!tree_.valid_vertex(v)) throw Error("apply: invalid vertex");
    Word out;
    out.reserve(v.size());
    int s = initial_;
    for (Letter x : v) {
      out.push_back(states_[s].perm[x]);
      s = states_[s].next[x];
    }
    return out;
  }

  Ray apply(const Ray& r) const {
    if (r.truncated())
      return Ray::truncation(tree_, apply(r.preperiod()));
    // Read the preperiod, then whole period blocks; the visited block-start
    // states must repeat within num_states()+1 blocks.
    Word pre_img;
    int s = initial_;
    for (Letter x : r.preperiod()) {
      pre_img.push_back(states_[s].perm[x]);
      s = states_[s].next[x];
    }
    std::vector<int> seen_at(states_.size(), -1);
    std::vector<Word> blocks;
    int first = -1;
    for (;;) {
      if (seen_at[s] >= 0) {
        first = seen_at[s];
        break;
      }
      seen_at[s] = static_cast<int>(blocks.size());
      Word img;
      for (Letter x : r.period()) {
        img.push_back(states_[s].perm[x]);
        s = states_[s].next[x];
      }
      blocks.push_back(std::move(img));
    }
    for (int i = 0; i < first; ++i)
      pre_img.insert(pre_img.end(), blocks[i].begin(), blocks[i].end());
    Word per_img;
    for (std::size_t i = first; i < blocks.size(); ++i)
      per_img.insert(per_img.end(), blocks[i].begin(), blocks[i].end());
    return Ray::periodic(tree_, std::move(pre_img), std::move(per_img));
  }

  bool fixes_vertex(const Word& v) const { return apply(v) == v; }

  bool fixes_ray(const Ray& r) const {
    if (r.truncated()) throw Error("fixes_ray: truncated ray");
    // Walk the ray; states at a fixed position in the period cycle, so a
    // repeated (state, offset) pair decides.
    int s = initial_;
    std::size_t i = 0;
    std::set<std::pair<int, std::size_t>> seen;
    for (;;) {
      std::size_t off = i < r.preperiod().size()
                            ? SIZE_MAX
                            : (i - r.preperiod().size()) % r.period().size();
      if (off != SIZE_MAX && !seen.insert({s, off}).second) return true;
      Letter x = r.at(i);
      if (states_[s].perm[x] != x) return false;
      s = states_[s].next[x];
      ++i;
    }
  }

  // The germ at r is trivial iff some prefix of r is fixed with trivial
  // section below it. Decidable by state cycling along the ray.
  bool fixes_ray_germ(const Ray& r) const {
    if (r.truncated()) throw Error("fixes_ray_germ: truncated ray");
    int s = initial_;
    std::size_t i = 0;
    std::set<std::pair<int, std::size_t>> seen;
    for (;;) {
      if (state_trivial(s)) return true;
      std::size_t off = i < r.preperiod().size()
                            ? SIZE_MAX
                            : (i - r.preperiod().size()) % r.period().size();
      if (off != SIZE_MAX && !seen.insert({s, off}).second) return false;
      Letter x = r.at(i);
      if (states_[s].perm[x] != x) return false;
      s = states_[s].next[x];
      ++i;
    }
  }

  TreeAutomorphism section(const Word& v) const {
    if (!tree_.valid_vertex(v)) throw Error("section: invalid vertex");
    int s = initial_;
    for (Letter x : v) s = states_[s].next[x];
    TreeAutomorphism out;
    out.tree_ = tree_.shifted(v.size());
    out.states_ = states_;
    out.phases_.assign(states_.size(), -1);
    std::size_t p = tree_.period();
    for (std::size_t i = 0; i < states_.size(); ++i)
      out.phases_[i] =
          static_cast<int>((phases_[i] + p - v.size() % p) % p);
    out.initial_ = s;
    out.canonicalize();
    return out;
  }

  // Automorphism rooted at internal state s (regular trees only; elsewhere
  // the rooted map lives on a shifted tree and phases would be ambiguous).
  TreeAutomorphism rooted(int s) const {
    if (!tree_.regular()) throw Error("rooted: regular trees only");
    if (s < 0 || s >= static_cast<int>(states_.size()))
      throw Error("rooted: no such state");
    TreeAutomorphism out;
    out.tree_ = tree_;
    out.states_ = states_;
    out.phases_ = phases_;
    out.initial_ = s;
    out.canonicalize();
    return out;
  }

  TreeAutomorphism inverse() const {
    TreeAutomorphism out;
    out.tree_ = tree_;
    out.phases_ = phases_;
    out.initial_ = initial_;
    out.states_.resize(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
      const AutState& s = states_[i];
      AutState inv;
      inv.perm.resize(s.perm.size());
      inv.next.resize(s.next.size());
      for (std::size_t x = 0; x < s.perm.size(); ++x) {
        inv.perm[s.perm[x]] = static_cast<Letter>(x);
        inv.next[s.perm[x]] = s.next[x];
      }
      out.states_[i] = std::move(inv);
    }
    out.canonicalize();
    return out;
  }

  // g.after(h) acts as the composite v -> g(h(v)).
  TreeAutomorphism after(const TreeAutomorphism& h,
                         std::size_t budget = kDefaultStateBudget) const {
    require_same_tree(tree_, h.tree_, "compose");
    TreeAutomorphism out;
    out.tree_ = tree_;
    out.states_.clear();
    out.phases_.clear();
    std::map<std::pair<int, int>, int> id;
    std::deque<std::pair<int, int>> queue;
    auto intern = [&](int gs, int hs) {
      auto it = id.find({gs, hs});
      if (it != id.end()) return it->second;
      if (id.size() >= budget)
        throw StateBudgetExceeded("compose: state budget exceeded");
      int n = static_cast<int>(id.size());
      id.emplace(std::make_pair(gs, hs), n);
      queue.emplace_back(gs, hs);
      return n;
    };
    intern(initial_, h.initial_);
    out.initial_ = 0;
    while (!queue.empty()) {
      auto [gs, hs] = queue.front();
      queue.pop_front();
      assert(phases_[gs] == h.phases_[hs] && "compose: phase drift");
      const AutState& sg = states_[gs];
      const AutState& sh = h.states_[hs];
      AutState prod;
      std::size_t d = sh.perm.size();
      prod.perm.resize(d);
      prod.next.resize(d);
      for (std::size_t x = 0; x < d; ++x) {
        Letter mid = sh.perm[x];
        prod.perm[x] = sg.perm[mid];
        prod.next[x] = intern(sg.next[mid], sh.next[x]);
      }
      out.states_.push_back(std::move(prod));
      out.phases_.push_back(phases_[gs]);
    }
    out.canonicalize();
    return out;
  }

  bool operator==(const TreeAutomorphism& o) const {
    return tree_ == o.tree_ && phases_ == o.phases_ && same_table(o);
  }
  bool operator!=(const TreeAutomorphism& o) const { return !(*this == o); }

  // Canonical tables make this a total order on automorphisms of one tree.
  bool operator<(const TreeAutomorphism& o) const {
    return canonical_key() < o.canonical_key();
  }

  std::vector<int> canonical_key() const {
    std::vector<int> key;
    key.push_back(static_cast<int>(states_.size()));
    for (std::size_t i = 0; i < states_.size(); ++i) {
      key.push_back(phases_[i]);
      for (Letter x : states_[i].perm) key.push_back(x);
      for (int n : states_[i].next) key.push_back(n);
    }
    return key;
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&](std::size_t v) {
      h ^= v;
      h *= 1099511628211ull;
    };
    for (int v : canonical_key()) mix(static_cast<std::size_t>(v) + 0x9e37);
    return h;
  }

  // Number of level-n vertices with nontrivial section, for n = 0..horizon.
  std::vector<std::uint64_t> activity(std::size_t horizon) const {
    std::vector<bool> active = active_states();
    std::vector<unsigned __int128> cnt(states_.size(), 0);
    cnt[initial_] = 1;
    std::vector<std::uint64_t> out;
    auto tally = [&] {
      unsigned __int128 t = 0;
      for (std::size_t s = 0; s < states_.size(); ++s)
        if (active[s]) t += cnt[s];
      out.push_back(t > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(t));
    };
    tally();
    for (std::size_t n = 0; n < horizon; ++n) {
      std::vector<unsigned __int128> nxt(states_.size(), 0);
      for (std::size_t s = 0; s < states_.size(); ++s)
        if (cnt[s])
          for (int t : states_[s].next) nxt[t] += cnt[s];
      cnt = std::move(nxt);
      tally();
    }
    return out;
  }

  // True iff the subtree action at state s is trivial.
  bool state_trivial(int s) const { return !active_states()[s]; }

  bool fixes_cylinder_pointwise(const Word& v) const {
    if (!fixes_vertex(v)) return false;
    int s = initial_;
    for (Letter x : v) s = states_[s].next[x];
    return state_trivial(s);
  }

  // Maximal fixed cylinders down to the cutoff depth, complemented. The
  // flag is true when no deeper refinement can shrink the cover.
  std::pair<Antichain, bool> support_antichain(std::size_t depth) const {
    std::vector<Word> fixed;
    bool exact = true;
    struct Item { Word v; int s; };
    std::vector<Item> stack{{Word{}, initial_}};
    while (!stack.empty()) {
      Item it = std::move(stack.back());
      stack.pop_back();
      if (state_trivial(it.s)) {
        fixed.push_back(std::move(it.v));
        continue;
      }
      if (it.v.size() >= depth) {
        // Nontrivial section at cutoff: the cover keeps the whole cylinder
        // but a deeper scan might carve fixed parts out of it.
        exact = false;
        continue;
      }
      const AutState& st = states_[it.s];
      for (std::size_t x = 0; x < st.perm.size(); ++x) {
        if (st.perm[x] != static_cast<Letter>(x)) continue;  // moved cylinder
        Word c = it.v;
        c.push_back(static_cast<Letter>(x));
        stack.push_back({std::move(c), st.next[x]});
      }
    }
    return {complement_antichain(Antichain(tree_, std::move(fixed))), exact};
  }

  // Shortlex-least vertex moved by the automorphism, if any. The search is
  // over automaton states, so it terminates without a depth budget.
  std::optional<Word> moved_vertex() const {
    if (is_identity()) return std::nullopt;
    std::vector<int> seen(states_.size(), 0);
    std::deque<std::pair<int, Word>> queue{{initial_, Word{}}};
    seen[initial_] = 1;
    std::optional<Word> best;
    while (!queue.empty()) {
      auto [s, path] = queue.front();
      queue.pop_front();
      if (best && path.size() + 1 > best->size()) break;
      const AutState& st = states_[s];
      for (std::size_t x = 0; x < st.perm.size(); ++x) {
        if (st.perm[x] != static_cast<Letter>(x)) {
          Word v = path;
          v.push_back(static_cast<Letter>(x));
          if (!best || shortlex_less(v, *best)) best = v;
          break;  // letters scanned in order, first hit is least here
        }
      }
      for (std::size_t x = 0; x < st.perm.size(); ++x) {
        int t = st.next[x];
        if (!seen[t]) {
          seen[t] = 1;
          Word v = path;
          v.push_back(static_cast<Letter>(x));
          queue.emplace_back(t, std::move(v));
        }
      }
    }
    assert(best && "nontrivial automorphism moves some vertex");
    return best;
  }

  // Depth below which all sections are trivial, when the automorphism is
  // finitary; nullopt otherwise.
  std::optional<std::size_t> finitary_depth() const {
    std::vector<bool> active = active_states();
    if (!active[initial_]) return 0;
    // Longest chain of active states from the initial one; a cycle through
    // active states means the support reaches arbitrarily deep.
    std::vector<int> depth(states_.size(), -1);
    std::vector<int> onstack(states_.size(), 0);
    bool cyclic = false;
    auto dfs = [&](auto&& self, int s) -> int {
      if (!active[s]) return 0;
      if (onstack[s]) { cyclic = true; return 0; }
      if (depth[s] >= 0) return depth[s];
      onstack[s] = 1;
      int best = 0;
      for (int t : states_[s].next) {
        best = std::max(best, self(self, t));
        if (cyclic) break;
      }
      onstack[s] = 0;
      depth[s] = best + 1;
      return best + 1;
    };
    int d = dfs(dfs, initial_);
    if (cyclic) return std::nullopt;
    return static_cast<std::size_t>(d);
  }

  std::string table_str() const {
    std::string out;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      out += "s" + std::to_string(i) + "[" + std::to_string(phases_[i]) + "] ";
      for (Letter x : states_[i].perm) out += word_str({x});
      out += " ->";
      for (int n : states_[i].next) out += " s" + std::to_string(n);
      out += "\n";
    }
    return out;
  }

 private:
  void assign_phases_and_validate() {
    std::size_t p = tree_.period();
    std::deque<int> queue{initial_};
    phases_[initial_] = 0;
    std::vector<char> inqueue(states_.size(), 0);
    inqueue[initial_] = 1;
    while (!queue.empty()) {
      int s = queue.front();
      queue.pop_front();
      int ph = phases_[s];
      int d = tree_.degree(ph);
      const AutState& st = states_[s];
      if (static_cast<int>(st.perm.size()) != d)
        throw Error("TreeAutomorphism: state arity != level degree");
      std::vector<char> seen(d, 0);
      for (Letter y : st.perm) {
        if (static_cast<int>(y) >= d || seen[y])
          throw Error("TreeAutomorphism: not a permutation");
        seen[y] = 1;
      }
      for (int n : st.next) {
        int nph = static_cast<int>((ph + 1) % p);
        if (phases_[n] == -1) {
          phases_[n] = nph;
          if (!inqueue[n]) {
            queue.push_back(n);
            inqueue[n] = 1;
          }
        } else if (phases_[n] != nph) {
          throw Error("TreeAutomorphism: state reachable at two phases");
        }
      }
    }
    // Unreachable states are dropped by canonicalize(); give them a valid
    // phase so intermediate passes stay well formed.
    for (auto& ph : phases_)
      if (ph == -1) ph = 0;
  }

  void canonicalize() {
    // 1. Restrict to reachable states, BFS order.
    std::vector<int> order, remap(states_.size(), -1);
    order.reserve(states_.size());
    remap[initial_] = 0;
    order.push_back(initial_);
    for (std::size_t q = 0; q < order.size(); ++q)
      for (int n : states_[order[q]].next)
        if (remap[n] == -1) {
          remap[n] = static_cast<int>(order.size());
          order.push_back(n);
        }
    std::vector<AutState> rs(order.size());
    std::vector<int> rph(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      rs[i] = states_[order[i]];
      rph[i] = phases_[order[i]];
      for (int& n : rs[i].next) n = remap[n];
    }
    states_ = std::move(rs);
    phases_ = std::move(rph);
    initial_ = 0;

    // 2. Moore partition refinement on (phase, perm), then successor blocks.
    std::vector<int> block(states_.size());
    {
      std::map<std::pair<int, std::vector<Letter>>, int> first;
      for (std::size_t i = 0; i < states_.size(); ++i) {
        auto key = std::make_pair(phases_[i], states_[i].perm);
        auto it = first.find(key);
        if (it == first.end()) {
          int b = static_cast<int>(first.size());
          first.emplace(std::move(key), b);
          block[i] = b;
        } else {
          block[i] = it->second;
        }
      }
    }
    for (;;) {
      std::map<std::pair<int, std::vector<int>>, int> sig;
      std::vector<int> nb(states_.size());
      for (std::size_t i = 0; i < states_.size(); ++i) {
        std::vector<int> succ;
        succ.reserve(states_[i].next.size());
        for (int n : states_[i].next) succ.push_back(block[n]);
        auto key = std::make_pair(block[i], std::move(succ));
        auto it = sig.find(key);
        if (it == sig.end()) {
          int b = static_cast<int>(sig.size());
          sig.emplace(std::move(key), b);
          nb[i] = b;
        } else {
          nb[i] = it->second;
        }
      }
      if (sig.size() == static_cast<std::size_t>(*std::max_element(
                            block.begin(), block.end()) + 1)) {
        block = std::move(nb);
        break;
      }
      block = std::move(nb);
    }

    // 3. Quotient and BFS-renumber so equal maps share one table.
    int nblocks = *std::max_element(block.begin(), block.end()) + 1;
    std::vector<int> rep(nblocks, -1);
    for (std::size_t i = 0; i < states_.size(); ++i)
      if (rep[block[i]] == -1) rep[block[i]] = static_cast<int>(i);
    std::vector<int> bfs(nblocks, -1);
    std::vector<int> bo;
    bfs[block[initial_]] = 0;
    bo.push_back(block[initial_]);
    for (std::size_t q = 0; q < bo.size(); ++q) {
      int r = rep[bo[q]];
      for (int n : states_[r].next) {
        int b = block[n];
        if (bfs[b] == -1) {
          bfs[b] = static_cast<int>(bo.size());
          bo.push_back(b);
        }
      }
    }
    std::vector<AutState> out(bo.size());
    std::vector<int> oph(bo.size());
    for (std::size_t i = 0; i < bo.size(); ++i) {
      const AutState& src = states_[rep[bo[i]]];
      AutState s;
      s.perm = src.perm;
      s.next.reserve(src.next.size());
      for (int n : src.next) s.next.push_back(bfs[block[n]]);
      out[i] = std::move(s);
      oph[i] = phases_[rep[bo[i]]];
    }
    states_ = std::move(out);
    phases_ = std::move(oph);
    initial_ = 0;
    active_.reset();
  }

  bool same_table(const TreeAutomorphism& o) const {
    if (states_.size() != o.states_.size()) return false;
    for (std::size_t i = 0; i < states_.size(); ++i)
      if (states_[i].perm != o.states_[i].perm ||
          states_[i].next != o.states_[i].next)
        return false;
    return true;
  }

  // active_states()[s] is true iff the map rooted at s is nontrivial, i.e.
  // s reaches a state with a non-identity permutation.
  const std::vector<bool>& active_states() const {
    if (!active_) {
      std::vector<bool> act(states_.size(), false);
      // Reverse reachability from states with non-identity perms.
      std::vector<std::vector<int>> rev(states_.size());
      std::deque<int> queue;
      for (std::size_t s = 0; s < states_.size(); ++s) {
        for (int n : states_[s].next) rev[n].push_back(static_cast<int>(s));
        for (std::size_t x = 0; x < states_[s].perm.size(); ++x)
          if (states_[s].perm[x] != static_cast<Letter>(x)) {
            if (!act[s]) {
              act[s] = true;
              queue.push_back(static_cast<int>(s));
            }
            break;
          }
      }
      while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int p : rev[s])
          if (!act[p]) {
            act[p] = true;
            queue.push_back(p);
          }
      }
      active_ = std::move(act);
    }
    return *active_;
  }

  TreeSpec tree_;
  std::vector<AutState> states_;
  std::vector<int> phases_;
  int initial_ = 0;
  mutable std::optional<std::vector<bool>> active_;
};

inline TreeAutomorphism compose(const TreeAutomorphism& g,
                                const TreeAutomorphism& h,
                                std::size_t budget = kDefaultStateBudget) {
  return g.after(h, budget);
}

inline TreeAutomorphism conjugate(const TreeAutomorphism& h,
                                  const TreeAutomorphism& g) {
  // h g h^-1
  return compose(compose(h, g), h.inverse());
}

inline TreeAutomorphism commutator(const TreeAutomorphism& a,
                                   const TreeAutomorphism& b) {
  // [a, b] = a b a^-1 b^-1
  return compose(compose(a, b), compose(a.inverse(), b.inverse()));
}

inline TreeAutomorphism power(const TreeAutomorphism& g, long long n) {
  TreeAutomorphism base = n < 0 ? g.inverse() : g;
  unsigned long long k = n < 0 ? -static_cast<unsigned long long>(n) : n;
  TreeAutomorphism acc = TreeAutomorphism::identity(g.tree());
  while (k) {
    if (k & 1) acc = compose(acc, base);
    base = compose(base, base);
    k >>= 1;
  }
  return acc;
}

struct AutHash {
  std::size_t operator()(const TreeAutomorphism& g) const { return g.hash(); }
};

// Deduplicating set of automorphisms with stable insertion order.
class AutSet {
 public:
  // Returns the element's index; inserts when new.
  int insert(const TreeAutomorphism& g) {
    auto& bucket = by_hash_[g.hash()];
    for (int i : bucket)
      if (elems_[i] == g) return i;
    int id = static_cast<int>(elems_.size());
    bucket.push_back(id);
    elems_.push_back(g);
    return id;
  }

  int find(const TreeAutomorphism& g) const {
    auto it = by_hash_.find(g.hash());
    if (it == by_hash_.end()) return -1;
    for (int i : it->second)
      if (elems_[i] == g) return i;
    return -1;
  }

  bool contains(const TreeAutomorphism& g) const { return find(g) >= 0; }
  std::size_t size() const { return elems_.size(); }
  const TreeAutomorphism& operator[](std::size_t i) const { return elems_[i]; }
  const std::vector<TreeAutomorphism>& elements() const { return elems_; }

 private:
  std::vector<TreeAutomorphism> elems_;
  std::unordered_map<std::size_t, std::vector<int>> by_hash_;
};

// States of g's automaton reachable by arbitrarily long input words: the
// forward closure of the states lying on transition cycles.
inline std::vector<int> recurrent_states(const TreeAutomorphism& g) {
  std::size_t n = g.num_states();
  // Iteratively strip states with no successor still present; what survives
  // is the union of cycles and their ancestors, so instead mark cycle
  // membership via DFS colors and then close forwards.
  std::vector<int> color(n, 0);  // 0 unvisited, 1 on stack, 2 done
  std::vector<char> oncycle(n, 0);
  auto dfs = [&](auto&& self, int s) -> void {
    color[s] = 1;
    int d = static_cast<int>(g.perm_at(s).size());
    for (int x = 0; x < d; ++x) {
      int t = g.next_at(s, static_cast<Letter>(x));
      if (color[t] == 0)
        self(self, t);
      else if (color[t] == 1)
        oncycle[t] = 1;
    }
    color[s] = 2;
  };
  dfs(dfs, 0);
  // A state marked as a back-edge target heads a cycle; every state on that
  // cycle is recurrent, and recurrence propagates forward. Closing forward
  // from back-edge targets reaches all of them.
  std::deque<int> queue;
  std::vector<char> rec(n, 0);
  for (std::size_t s = 0; s < n; ++s)
    if (oncycle[s]) {
      rec[s] = 1;
      queue.push_back(static_cast<int>(s));
    }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    int d = static_cast<int>(g.perm_at(s).size());
    for (int x = 0; x < d; ++x) {
      int t = g.next_at(s, static_cast<Letter>(x));
      if (!rec[t]) {
        rec[t] = 1;
        queue.push_back(t);
      }
    }
  }
  std::vector<int> out;
  for (std::size_t s = 0; s < n; ++s)
    if (rec[s]) out.push_back(static_cast<int>(s));
  return out;
}

// Minimal section-closed set containing the generators, their inverses and
// the identity, and closed under eventual sections of pairwise products.
// Grows past max_states only to fail with StateBudgetExceeded.
inline std::vector<TreeAutomorphism> nucleus(
    const std::vector<TreeAutomorphism>& generators,
    std::size_t max_states = 512) {
  if (generators.empty()) throw Error("nucleus: no generators");
  const TreeSpec& t = generators.front().tree();
  if (!t.regular()) throw Error("nucleus: regular trees only");
  AutSet n;
  std::deque<TreeAutomorphism> closure;
  auto add = [&](const TreeAutomorphism& g) {
    std::size_t before = n.size();
    n.insert(g);
    if (n.size() > max_states)
      throw StateBudgetExceeded("nucleus: element budget exceeded");
    if (n.size() != before) closure.push_back(g);
  };
  add(TreeAutomorphism::identity(t));
  for (const auto& g : generators) {
    require_same_tree(t, g.tree(), "nucleus");
    add(g);
    add(g.inverse());
  }
  // Section closure: the rooted maps at all states of an element.
  auto close_sections = [&] {
    while (!closure.empty()) {
      TreeAutomorphism g = std::move(closure.front());
      closure.pop_front();
      for (std::size_t s = 0; s < g.num_states(); ++s)
        add(g.rooted(static_cast<int>(s)));
    }
  };
  close_sections();
  for (;;) {
    std::size_t before = n.size();
    // Pair products over the current snapshot; eventual sections must land
    // back in the set.
    std::size_t snapshot = n.size();
    for (std::size_t i = 0; i < snapshot; ++i)
      for (std::size_t j = 0; j < snapshot; ++j) {
        TreeAutomorphism p = compose(n[i], n[j]);
        for (int s : recurrent_states(p)) add(p.rooted(s));
      }
    close_sections();
    if (n.size() == before) break;
  }
  std::vector<TreeAutomorphism> out = n.elements();
  std::sort(out.begin(), out.end());
  return out;
}

enum class BoundedVerdict { bounded, unbounded_evidence, inconclusive };

struct BoundedReport {
  BoundedVerdict verdict = BoundedVerdict::inconclusive;
  std::uint64_t bound = 0;                 // sup of the observed activity
  std::vector<Ray> rays;                   // rays the deep activity follows
  std::vector<std::uint64_t> activity;     // per level, 0..horizon
  std::size_t evidence_level = 0;
  std::uint64_t evidence_count = 0;
  std::string note;
};

// Activity table plus cycle analysis of the active part of the automaton.
// On a minimized automaton the structural test is decisive: activity stays
// bounded iff active cycles are disjoint simple loops with no active path
// from one to another.
inline BoundedReport bounded_check(const TreeAutomorphism& g,
                                   std::size_t horizon = 24) {
  if (!g.tree().regular()) throw Error("bounded_check: regular trees only");
  BoundedReport rep;
  rep.activity = g.activity(horizon);
  rep.bound = *std::max_element(rep.activity.begin(), rep.activity.end());

  std::size_t ns = g.num_states();
  std::vector<char> active(ns, 0);
  for (std::size_t s = 0; s < ns; ++s)
    active[s] = !g.state_trivial(static_cast<int>(s));
  // Tarjan SCCs of the active subgraph.
  std::vector<int> idx(ns, -1), low(ns, 0), comp(ns, -1);
  std::vector<char> onstk(ns, 0);
  std::vector<int> stk;
  int counter = 0, ncomp = 0;
  auto strong = [&](auto&& self, int s) -> void {
    idx[s] = low[s] = counter++;
    stk.push_back(s);
    onstk[s] = 1;
    int d = static_cast<int>(g.perm_at(s).size());
    for (int x = 0; x < d; ++x) {
      int t = g.next_at(s, static_cast<Letter>(x));
      if (!active[t]) continue;
      if (idx[t] == -1) {
        self(self, t);
        low[s] = std::min(low[s], low[t]);
      } else if (onstk[t]) {
        low[s] = std::min(low[s], idx[t]);
      }
    }
    if (low[s] == idx[s]) {
      for (;;) {
        int v = stk.back();
        stk.pop_back();
        onstk[v] = 0;
        comp[v] = ncomp;
        if (v == s) break;
      }
      ++ncomp;
    }
  };
  for (std::size_t s = 0; s < ns; ++s)
    if (active[s] && idx[s] == -1) strong(strong, static_cast<int>(s));

  // Cyclic components, their internal out-degrees, and cross reachability.
  std::vector<int> size(ncomp, 0), inner_edges(ncomp, 0);
  std::vector<char> cyclic(ncomp, 0), bad_shape(ncomp, 0);
  for (std::size_t s = 0; s < ns; ++s) {
    if (!active[s]) continue;
    int inner = 0;
    int d = static_cast<int>(g.perm_at(s).size());
    for (int x = 0; x < d; ++x) {
      int t = g.next_at(s, static_cast<Letter>(x));
      if (active[t] && comp[t] == comp[s]) ++inner;
    }
    ++size[comp[s]];
    inner_edges[comp[s]] += inner;
    if (inner > 1) bad_shape[comp[s]] = 1;
  }
  for (int c = 0; c < ncomp; ++c)
    cyclic[c] = size[c] > 1 || inner_edges[c] > 0;

  bool simple = true;
  for (int c = 0; c < ncomp; ++c)
    if (cyclic[c] && (bad_shape[c] || inner_edges[c] != size[c])) simple = false;

  // Does some active path leave one cyclic component and reach another?
  bool chained = false;
  {
    // comp-level DAG reachability; components are few.
    std::vector<std::set<int>> succ(ncomp);
    for (std::size_t s = 0; s < ns; ++s) {
      if (!active[s]) continue;
      int d = static_cast<int>(g.perm_at(s).size());
      for (int x = 0; x < d; ++x) {
        int t = g.next_at(s, static_cast<Letter>(x));
        if (active[t] && comp[t] != comp[s]) succ[comp[s]].insert(comp[t]);
      }
    }
    for (int c = 0; c < ncomp && !chained; ++c) {
      if (!cyclic[c]) continue;
      std::deque<int> queue(succ[c].begin(), succ[c].end());
      std::vector<char> seen(ncomp, 0);
      while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (seen[u]) continue;
        seen[u] = 1;
        if (cyclic[u]) {
          chained = true;
          break;
        }
        for (int w : succ[u]) queue.push_back(w);
      }
    }
  }

  if (simple && !chained) {
    rep.verdict = BoundedVerdict::bounded;
    rep.note = "active cycles are disjoint simple loops";
    // One witness ray per cyclic component: entry path from the initial
    // state, then the unique loop.
    std::vector<char> done(ncomp, 0);
    // BFS over all states for entry paths (letters in ascending order).
    std::vector<int> par(ns, -1), parx(ns, -1);
    std::deque<int> queue{0};
    std::vector<char> seen(ns, 0);
    seen[0] = 1;
    std::vector<int> order;
    while (!queue.empty()) {
      int s = queue.front();
      queue.pop_front();
      order.push_back(s);
      int d = static_cast<int>(g.perm_at(s).size());
      for (int x = 0; x < d; ++x) {
        int t = g.next_at(s, static_cast<Letter>(x));
        if (!seen[t]) {
          seen[t] = 1;
          par[t] = s;
          parx[t] = x;
          queue.push_back(t);
        }
      }
    }
    for (int s : order) {
      if (!active[s]) continue;
      int c = comp[s];
      if (!cyclic[c] || done[c]) continue;
      done[c] = 1;
      Word pre;
      for (int v = s; par[v] != -1; v = par[v])
        pre.push_back(static_cast<Letter>(parx[v]));
      std::reverse(pre.begin(), pre.end());
      Word per;
      int v = s;
      do {
        int d = static_cast<int>(g.perm_at(v).size());
        for (int x = 0; x < d; ++x) {
          int t = g.next_at(v, static_cast<Letter>(x));
          if (active[t] && comp[t] == c) {
            per.push_back(static_cast<Letter>(x));
            v = t;
            break;
          }
        }
      } while (v != s);
      rep.rays.push_back(Ray::periodic(g.tree(), pre, per));
    }
    std::sort(rep.rays.begin(), rep.rays.end());
  } else {
    rep.evidence_level = horizon;
    rep.evidence_count = rep.activity.back();
    bool grew = horizon >= 2 &&
                rep.activity[horizon] > rep.activity[horizon / 2];
    rep.verdict = grew ? BoundedVerdict::unbounded_evidence
                       : BoundedVerdict::inconclusive;
    rep.note = simple ? "active cycles chained" : "non-simple active cycle";
  }
  return rep;
}

}  // namespace branchlab
