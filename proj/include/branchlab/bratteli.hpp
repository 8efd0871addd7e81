#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "branchlab/automorphism.hpp"
#include "branchlab/tree.hpp"
#include "json.hpp"

namespace branchlab {

// Leveled multigraph with surjective origin and target maps per edge level.
// An optional repeating tail cycles the written edge levels forever, so the
// written block is one period of an infinite diagram.
class BratteliDiagram {
 public:
  BratteliDiagram() = default;

  BratteliDiagram(std::vector<int> vertex_counts,
                  std::vector<std::vector<std::pair<int, int>>> edge_levels,
                  bool repeat_tail)
      : vcount_(std::move(vertex_counts)),
        edges_(std::move(edge_levels)),
        repeat_(repeat_tail) {
    if (vcount_.size() != edges_.size() + 1)
      throw Error("BratteliDiagram: need one more vertex level than edge "
                  "levels");
    for (std::size_t n = 0; n < vcount_.size(); ++n)
      if (vcount_[n] < 1)
        throw Error("BratteliDiagram: empty vertex level " +
                    std::to_string(n));
    for (std::size_t n = 0; n < edges_.size(); ++n) {
      std::vector<char> org_hit(vcount_[n], 0), tgt_hit(vcount_[n + 1], 0);
      for (const auto& [o, t] : edges_[n]) {
        if (o < 0 || o >= vcount_[n] || t < 0 || t >= vcount_[n + 1])
          throw Error("BratteliDiagram: dangling edge at level " +
                      std::to_string(n + 1));
        org_hit[o] = 1;
        tgt_hit[t] = 1;
      }
      for (int v = 0; v < vcount_[n]; ++v)
        if (!org_hit[v])
          throw Error("BratteliDiagram: vertex " + std::to_string(v) +
                      " at level " + std::to_string(n) +
                      " has no outgoing edge");
      for (int v = 0; v < vcount_[n + 1]; ++v)
        if (!tgt_hit[v])
          throw Error("BratteliDiagram: vertex " + std::to_string(v) +
                      " at level " + std::to_string(n + 1) +
                      " has no incoming edge");
    }
    if (repeat_) {
      if (edges_.empty())
        throw Error("BratteliDiagram: repeating tail needs an edge level");
      if (vcount_.back() != vcount_.front())
        throw Error("BratteliDiagram: repeating tail needs the last vertex "
                    "level to match the first");
    }
  }

  std::size_t horizon() const { return edges_.size(); }
  bool infinite() const { return repeat_; }

  int vertex_count(std::size_t level) const {
    if (level < vcount_.size()) return vcount_[level];
    if (repeat_) return vcount_[(level - 1) % edges_.size() + 1];
    throw Error("BratteliDiagram: level beyond horizon");
  }

  // Edge levels are 1-based; a repeating tail folds them modulo the period.
  const std::vector<std::pair<int, int>>& edge_level(std::size_t n) const {
    if (n < 1) throw Error("BratteliDiagram: edge levels start at 1");
    if (n <= edges_.size()) return edges_[n - 1];
    if (repeat_) return edges_[(n - 1) % edges_.size()];
    throw Error("BratteliDiagram: level beyond horizon");
  }

  int edge_count(std::size_t n) const {
    return static_cast<int>(edge_level(n).size());
  }
  int org(std::size_t n, int e) const { return edge_level(n)[e].first; }
  int tgt(std::size_t n, int e) const { return edge_level(n)[e].second; }

  bool single_vertex() const {
    return std::all_of(vcount_.begin(), vcount_.end(),
                       [](int k) { return k == 1; });
  }
  bool tree_of_words_equivalent() const { return repeat_ && single_vertex(); }

  bool operator==(const BratteliDiagram& o) const {
    return vcount_ == o.vcount_ && edges_ == o.edges_ && repeat_ == o.repeat_;
  }
  bool operator!=(const BratteliDiagram& o) const { return !(*this == o); }

 private:
  std::vector<int> vcount_{1};
  std::vector<std::vector<std::pair<int, int>>> edges_;
  bool repeat_ = false;
};

inline BratteliDiagram diagram_from_json(const nlohmann::json& j) {
  try {
    std::vector<int> vcount;
    std::vector<std::vector<std::pair<int, int>>> edges;
    const auto& levels = j.at("levels");
    for (std::size_t n = 0; n < levels.size(); ++n) {
      vcount.push_back(levels[n].at("vertices").get<int>());
      std::vector<std::pair<int, int>> es;
      if (levels[n].contains("edges"))
        for (const auto& e : levels[n]["edges"])
          es.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      if (n == 0) {
        if (!es.empty())
          throw Error("BratteliDiagram: the root level has no edges");
      } else {
        edges.push_back(std::move(es));
      }
    }
    bool repeat = j.value("tail", "") == std::string("repeat");
    return BratteliDiagram(std::move(vcount), std::move(edges), repeat);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("diagram spec: ") + e.what());
  }
}

inline BratteliDiagram load_diagram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_diagram: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return diagram_from_json(j);
}

namespace detail {
inline bool path_prefix(const std::vector<int>& pre,
                        const std::vector<int>& path) {
  return pre.size() <= path.size() &&
         std::equal(pre.begin(), pre.end(), path.begin());
}
}  // namespace detail

// Finite path from the root level, stored as edge indices per level.
class PathCylinder {
 public:
  PathCylinder() = default;

  PathCylinder(BratteliDiagram d, std::vector<int> edges)
      : diag_(std::move(d)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      std::size_t n = i + 1;
      if (edges_[i] < 0 || edges_[i] >= diag_.edge_count(n))
        throw Error("PathCylinder: edge index out of range at level " +
                    std::to_string(n));
      if (i + 1 < edges_.size() &&
          diag_.tgt(n, edges_[i]) != diag_.org(n + 1, edges_[i + 1]))
        throw Error("PathCylinder: edges " + std::to_string(i) + " and " +
                    std::to_string(i + 1) + " do not chain");
    }
  }

  const BratteliDiagram& diagram() const { return diag_; }
  const std::vector<int>& edges() const { return edges_; }
  std::size_t length() const { return edges_.size(); }

  int target() const {
    if (edges_.empty()) return 0;
    return diag_.tgt(edges_.size(), edges_.back());
  }

  bool is_prefix_of(const std::vector<int>& path) const {
    return detail::path_prefix(edges_, path);
  }

  bool operator==(const PathCylinder& o) const {
    return diag_ == o.diag_ && edges_ == o.edges_;
  }
  bool operator!=(const PathCylinder& o) const { return !(*this == o); }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (i) s += ".";
      s += std::to_string(edges_[i]);
    }
    return s.empty() ? "@" : s;
  }

 private:
  BratteliDiagram diag_;
  std::vector<int> edges_;
};

// All paths of the given length ending at the given vertex. The empty path
// stands for every root vertex at once.
inline std::vector<std::vector<int>> paths_to(const BratteliDiagram& d,
                                              std::size_t length, int vertex) {
  std::vector<std::vector<int>> acc;
  if (vertex < 0 || vertex >= d.vertex_count(length)) return acc;
  if (length == 0) {
    acc.push_back({});
    return acc;
  }
  std::vector<std::pair<std::vector<int>, int>> frontier;
  for (int v = 0; v < d.vertex_count(0); ++v)
    frontier.emplace_back(std::vector<int>{}, v);
  for (std::size_t n = 1; n <= length; ++n) {
    std::vector<std::pair<std::vector<int>, int>> next;
    for (const auto& [path, at] : frontier)
      for (int e = 0; e < d.edge_count(n); ++e) {
        if (d.org(n, e) != at) continue;
        std::vector<int> ext = path;
        ext.push_back(e);
        next.emplace_back(std::move(ext), d.tgt(n, e));
      }
    frontier = std::move(next);
  }
  for (auto& [path, at] : frontier)
    if (at == vertex) acc.push_back(std::move(path));
  return acc;
}

inline std::vector<std::vector<int>> all_paths(const BratteliDiagram& d,
                                               std::size_t length) {
  std::vector<std::vector<int>> acc;
  for (int v = 0; v < d.vertex_count(length); ++v)
    for (auto& p : paths_to(d, length, v)) acc.push_back(std::move(p));
  std::sort(acc.begin(), acc.end());
  acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
  return acc;
}

// The cylinder bijection replacing one prefix by another with the same
// target vertex.
class PrefixReplacement {
 public:
  PrefixReplacement(PathCylinder from, PathCylinder to)
      : from_(std::move(from)), to_(std::move(to)) {
    if (from_.diagram() != to_.diagram())
      throw Error("PrefixReplacement: paths over different diagrams");
    if (from_.length() != to_.length() || from_.target() != to_.target())
      throw Error("PrefixReplacement: target mismatch between " + from_.str() +
                  " and " + to_.str());
  }

  const PathCylinder& domain() const { return from_; }
  const PathCylinder& range() const { return to_; }
  bool is_identity_rule() const { return from_ == to_; }

  bool applicable(const std::vector<int>& path) const {
    return from_.is_prefix_of(path);
  }

  std::vector<int> apply(const std::vector<int>& path) const {
    if (!applicable(path))
      throw Error("PrefixReplacement: path outside the domain cylinder");
    std::vector<int> out = to_.edges();
    out.insert(out.end(), path.begin() + from_.length(), path.end());
    return out;
  }

  PrefixReplacement inverse() const { return {to_, from_}; }

  bool operator==(const PrefixReplacement& o) const {
    return from_ == o.from_ && to_ == o.to_;
  }

 private:
  PathCylinder from_, to_;
};

inline PrefixReplacement prefix_replacement(PathCylinder from,
                                            PathCylinder to) {
  return {std::move(from), std::move(to)};
}

// Composite of two replacements whose middle cylinders agree.
inline PrefixReplacement compose(const PrefixReplacement& outer,
                                 const PrefixReplacement& inner) {
  if (inner.range() != outer.domain())
    throw Error("PrefixReplacement: inner range differs from outer domain");
  return {inner.domain(), outer.range()};
}

// Eventually periodic infinite path, the diagram-side analogue of a ray.
class PathRay {
 public:
  PathRay(const BratteliDiagram& d, std::vector<int> pre, std::vector<int> per)
      : pre_(std::move(pre)), per_(std::move(per)) {
    if (!d.infinite())
      throw Error("PathRay: the diagram has no repeating tail");
    if (per_.empty()) throw Error("PathRay: empty period");
    // Probing one full joint period past the preperiod reaches every
    // (ray phase, diagram phase) pair.
    std::size_t joint = std::lcm(per_.size(), d.horizon());
    std::size_t probe = pre_.size() + per_.size() + joint;
    int prev = -1;
    for (std::size_t i = 0; i < probe; ++i) {
      std::size_t n = i + 1;
      int e = at(i);
      if (e < 0 || e >= d.edge_count(n))
        throw Error("PathRay: edge index out of range at level " +
                    std::to_string(n));
      if (prev >= 0 && d.org(n, e) != prev)
        throw Error("PathRay: edges do not chain at level " +
                    std::to_string(n));
      prev = d.tgt(n, e);
    }
  }

  int at(std::size_t i) const {
    if (i < pre_.size()) return pre_[i];
    return per_[(i - pre_.size()) % per_.size()];
  }

  std::vector<int> prefix(std::size_t n) const {
    std::vector<int> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(at(i));
    return out;
  }

  bool in_cylinder(const std::vector<int>& path) const {
    for (std::size_t i = 0; i < path.size(); ++i)
      if (at(i) != path[i]) return false;
    return true;
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < pre_.size(); ++i) {
      if (i) s += ".";
      s += std::to_string(pre_[i]);
    }
    s += "(";
    for (std::size_t i = 0; i < per_.size(); ++i) {
      if (i) s += ".";
      s += std::to_string(per_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<int> pre_, per_;
};

// Finite-resolution description of a bounded-type homeomorphism: prefix
// replacement rules whose domains and ranges each partition the path space,
// plus the rays where the germ is not a replacement. A rule whose domain
// holds a singular ray is exact away from that ray only.
class BoundedTypeHomeo {
 public:
  BoundedTypeHomeo(BratteliDiagram d, std::vector<PrefixReplacement> rules,
                   std::vector<PathRay> singular = {})
      : diag_(std::move(d)),
        rules_(std::move(rules)),
        singular_(std::move(singular)) {
    if (rules_.empty()) throw Error("BoundedTypeHomeo: no rules");
    depth_ = 0;
    for (const PrefixReplacement& r : rules_) {
      if (r.domain().diagram() != diag_)
        throw Error("BoundedTypeHomeo: rule over a different diagram");
      depth_ = std::max(depth_, r.domain().length());
    }
    std::vector<std::vector<int>> paths = all_paths(diag_, depth_);
    for (const std::vector<int>& p : paths) {
      int covering = 0;
      for (const PrefixReplacement& r : rules_)
        if (r.domain().is_prefix_of(p)) ++covering;
      if (covering != 1)
        throw Error("BoundedTypeHomeo: rule domains do not partition at " +
                    PathCylinder(diag_, p).str());
    }
    for (const std::vector<int>& p : paths) {
      int covering = 0;
      for (const PrefixReplacement& r : rules_)
        if (r.range().is_prefix_of(p)) ++covering;
      if (covering != 1)
        throw Error("BoundedTypeHomeo: rule ranges do not partition at " +
                    PathCylinder(diag_, p).str());
    }
  }

  const BratteliDiagram& diagram() const { return diag_; }
  const std::vector<PrefixReplacement>& rules() const { return rules_; }
  const std::vector<PathRay>& singular_rays() const { return singular_; }
  std::size_t rule_depth() const { return depth_; }

  std::vector<int> apply(const std::vector<int>& path) const {
    for (const PrefixReplacement& r : rules_)
      if (r.applicable(path)) return r.apply(path);
    throw Error("BoundedTypeHomeo: path shorter than the covering rule");
  }

  // The restriction to the cylinder at the path coincides with a prefix
  // replacement. Exact away from the declared singular rays.
  bool replacement_on(const std::vector<int>& path) const {
    for (const PathRay& r : singular_)
      if (r.in_cylinder(path)) return false;
    // A rule at or above the path restricts to a replacement outright.
    // Rules strictly below must shift their suffixes by one common prefix.
    std::vector<int> delta;
    bool have_delta = false;
    for (const PrefixReplacement& r : rules_) {
      if (r.domain().is_prefix_of(path)) return true;
      if (!detail::path_prefix(path, r.domain().edges())) continue;
      std::vector<int> suffix(r.domain().edges().begin() + path.size(),
                              r.domain().edges().end());
      const std::vector<int>& image = r.range().edges();
      if (image.size() < suffix.size()) return false;
      if (!std::equal(suffix.rbegin(), suffix.rend(), image.rbegin()))
        return false;
      std::vector<int> head(image.begin(), image.end() - suffix.size());
      if (!have_delta) {
        delta = std::move(head);
        have_delta = true;
      } else if (head != delta) {
        return false;
      }
    }
    return have_delta;
  }

 private:
  BratteliDiagram diag_;
  std::vector<PrefixReplacement> rules_;
  std::vector<PathRay> singular_;
  std::size_t depth_ = 0;
};

struct SingularityProfile {
  // counts[n][v]: paths into vertex v at level n whose cylinder restriction
  // is not a prefix replacement.
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::uint64_t> activity;  // tree automorphisms only
  std::string verdict;  // bounded | unbounded_evidence | inconclusive
  std::uint64_t sup = 0;
  bool exact = false;
  std::string note;

  std::uint64_t level_total(std::size_t n) const {
    std::uint64_t s = 0;
    for (std::uint64_t c : counts[n]) s += c;
    return s;
  }
};

inline SingularityProfile singularity_profile(const BoundedTypeHomeo& g,
                                              std::size_t horizon) {
  const BratteliDiagram& d = g.diagram();
  if (!d.infinite() && horizon > d.horizon())
    throw Error("singularity_profile: horizon beyond the diagram");
  SingularityProfile out;
  out.exact = g.singular_rays().empty();
  for (std::size_t n = 0; n <= horizon; ++n) {
    std::vector<std::uint64_t> level(d.vertex_count(n), 0);
    for (int v = 0; v < d.vertex_count(n); ++v)
      for (const std::vector<int>& p : paths_to(d, n, v))
        if (!g.replacement_on(p)) ++level[v];
    out.counts.push_back(std::move(level));
  }
  for (std::size_t n = 0; n <= horizon; ++n)
    out.sup = std::max(out.sup, *std::max_element(out.counts[n].begin(),
                                                  out.counts[n].end()));

  // Bounded once the counts match the singular-prefix counts past the rules.
  bool stable = horizon >= g.rule_depth();
  for (std::size_t n = g.rule_depth(); stable && n <= horizon; ++n) {
    std::set<std::vector<int>> prefixes;
    for (const PathRay& r : g.singular_rays()) prefixes.insert(r.prefix(n));
    stable = out.level_total(n) == prefixes.size();
  }
  if (stable) {
    out.verdict = "bounded";
    out.note = g.singular_rays().empty()
                   ? "finitary: no singularities past the rule depth"
                   : "counts follow the declared singular rays";
  } else {
    out.verdict = "inconclusive";
    out.note = "counts do not stabilize within the horizon";
  }
  return out;
}

struct TreeCorrespondence {
  BratteliDiagram diagram;
  TreeSpec tree;
};

// Single-vertex repeating diagrams are trees of words; edge indices become
// letters and the edge-level sizes become the degree schedule.
inline TreeCorrespondence tree_correspondence(const BratteliDiagram& d) {
  if (!d.single_vertex())
    throw Error("tree_correspondence: diagram has a level with several "
                "vertices");
  if (!d.infinite())
    throw Error("tree_correspondence: diagram is not stationary");
  std::vector<int> degrees;
  for (std::size_t n = 1; n <= d.horizon(); ++n)
    degrees.push_back(d.edge_count(n));
  return {d, TreeSpec(std::move(degrees), true)};
}

namespace detail {
// States are BFS-numbered from the initial state 0.
inline bool section_trivial_at(const TreeAutomorphism& g,
                               const std::vector<int>& path) {
  int s = 0;
  for (int x : path) s = g.next_at(s, static_cast<Letter>(x));
  return g.state_trivial(s);
}
}  // namespace detail

// Per-level counts of non-replacement germs for an automaton element, seen
// through the tree-of-words correspondence. The restriction to a cylinder
// is a prefix replacement exactly when the section there is trivial, so the
// counts are exact; the independently computed activity sequence is
// reported alongside rather than assumed equal.
inline SingularityProfile singularity_profile(const BratteliDiagram& d,
                                              const TreeAutomorphism& g,
                                              std::size_t horizon) {
  TreeCorrespondence corr = tree_correspondence(d);
  if (!(corr.tree == g.tree()))
    throw Error("singularity_profile: element lives on a different tree");

  SingularityProfile out;
  out.exact = true;
  for (std::size_t n = 0; n <= horizon; ++n) {
    std::uint64_t count = 0;
    for (const std::vector<int>& p : all_paths(d, n))
      if (!detail::section_trivial_at(g, p)) ++count;
    out.counts.push_back({count});
    out.sup = std::max(out.sup, count);
  }
  out.activity = g.activity(horizon);
  BoundedReport br = bounded_check(g, std::max<std::size_t>(horizon, 24));
  switch (br.verdict) {
    case BoundedVerdict::bounded:
      out.verdict = "bounded";
      out.sup = std::max(out.sup, br.bound);
      break;
    case BoundedVerdict::unbounded_evidence:
      out.verdict = "unbounded_evidence";
      break;
    case BoundedVerdict::inconclusive:
      out.verdict = "inconclusive";
      break;
  }
  out.note = br.note;
  return out;
}

// Rules of a finitary element: one replacement per vertex at the depth
// where all sections have died out.
inline BoundedTypeHomeo to_homeo(const BratteliDiagram& d,
                                 const TreeAutomorphism& g,
                                 std::size_t depth) {
  TreeCorrespondence corr = tree_correspondence(d);
  if (!(corr.tree == g.tree()))
    throw Error("to_homeo: element lives on a different tree");
  std::vector<PrefixReplacement> rules;
  for (const std::vector<int>& p : all_paths(d, depth)) {
    if (!detail::section_trivial_at(g, p))
      throw Error("to_homeo: element is not finitary at depth " +
                  std::to_string(depth));
    Word img = g.apply(Word(p.begin(), p.end()));
    rules.emplace_back(PathCylinder(d, p),
                       PathCylinder(d, std::vector<int>(img.begin(),
                                                        img.end())));
  }
  return BoundedTypeHomeo(d, std::move(rules));
}

// Assemble a finitary rule list back into an automaton element. The rule
// map must be levelwise consistent to define a tree map at all.
inline TreeAutomorphism to_automorphism(const BoundedTypeHomeo& f) {
  const BratteliDiagram& d = f.diagram();
  TreeCorrespondence corr = tree_correspondence(d);
  if (!f.singular_rays().empty())
    throw Error("to_automorphism: singular rays have no finitary automaton");
  std::size_t depth = f.rule_depth();
  if (depth == 0) return TreeAutomorphism::identity(corr.tree);

  std::map<std::vector<int>, std::vector<int>> vmap;
  for (const std::vector<int>& p : all_paths(d, depth)) {
    std::vector<int> img = f.apply(p);
    for (std::size_t k = 1; k <= depth; ++k) {
      std::vector<int> src(p.begin(), p.begin() + k);
      std::vector<int> dst(img.begin(), img.begin() + k);
      auto [it, fresh] = vmap.emplace(std::move(src), dst);
      if (!fresh && it->second != dst)
        throw Error("to_automorphism: rules do not assemble into a tree "
                    "automorphism near " + PathCylinder(d, p).str());
    }
  }

  // One state per vertex above the rule depth, then the identity tail.
  std::vector<std::vector<int>> order;
  for (std::size_t k = 0; k < depth; ++k)
    for (const std::vector<int>& p : all_paths(d, k)) order.push_back(p);
  std::map<std::vector<int>, int> state_id;
  for (std::size_t i = 0; i < order.size(); ++i)
    state_id[order[i]] = static_cast<int>(i);

  std::size_t period = corr.tree.period();
  int identity_base = static_cast<int>(order.size());
  std::vector<AutState> states;
  for (const std::vector<int>& p : order) {
    AutState s;
    int deg = d.edge_count(p.size() + 1);
    for (int x = 0; x < deg; ++x) {
      std::vector<int> child = p;
      child.push_back(x);
      const std::vector<int>& img = vmap.at(child);
      s.perm.push_back(static_cast<Letter>(img.back()));
      s.next.push_back(child.size() < depth
                           ? state_id.at(child)
                           : identity_base +
                                 static_cast<int>(child.size() % period));
    }
    states.push_back(std::move(s));
  }
  for (std::size_t ph = 0; ph < period; ++ph) {
    AutState s;
    int deg = corr.tree.degree(ph);
    for (int x = 0; x < deg; ++x) {
      s.perm.push_back(static_cast<Letter>(x));
      s.next.push_back(identity_base +
                       static_cast<int>((ph + 1) % period));
    }
    states.push_back(std::move(s));
  }
  return TreeAutomorphism::from_states(corr.tree, std::move(states), 0);
}

}  // namespace branchlab
