#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "branchlab/group.hpp"

namespace branchlab {

// Sentinel completeness for graphs known exactly (no truncation anywhere).
inline constexpr int kExactGraph = 1 << 29;

// Generator-labeled graph. Label-deterministic: at most one outgoing edge
// per label at each vertex, and edge (x,s,y) is stored together with its
// reverse (y, partner(s), x).
struct LabeledGraph {
  std::vector<std::string> vertex_labels;
  std::vector<std::string> edge_labels;
  std::vector<int> label_partner;  // index of the inverse label
  std::vector<std::vector<std::pair<int, int>>> adj;  // (label, target)
  int base = 0;
  // Balls B(base, r) are exact for r <= completeness_radius; a vertex star
  // is complete whenever dist < completeness_radius.
  int completeness_radius = kExactGraph;
  std::vector<int> dist;  // BFS distance from base, -1 if unreachable

  std::size_t num_vertices() const { return vertex_labels.size(); }

  std::size_t num_edges() const {
    std::size_t n = 0;
    for (const auto& a : adj) n += a.size();
    return n;
  }

  int neighbor(int v, int label) const {
    for (const auto& [l, t] : adj[v])
      if (l == label) return t;
    return -1;
  }

  bool has_edge(int v, int label, int t) const {
    return std::binary_search(adj[v].begin(), adj[v].end(),
                              std::make_pair(label, t));
  }

  // Radius up to which the ball around v is known exactly.
  int known_radius(int v) const {
    if (completeness_radius >= kExactGraph) return kExactGraph;
    if (dist[v] < 0) return -1;
    return completeness_radius - dist[v];
  }

  void add_edge(int v, int label, int t) {
    auto e = std::make_pair(label, t);
    auto it = std::lower_bound(adj[v].begin(), adj[v].end(), e);
    if (it != adj[v].end() && *it == e) return;
    if (it != adj[v].end() && it->first == label && it->second != t)
      throw Error("LabeledGraph: label determinism violated at " +
                  vertex_labels[v]);
    adj[v].insert(it, e);
  }

  void compute_dist() {
    dist.assign(num_vertices(), -1);
    if (num_vertices() == 0) return;
    dist[base] = 0;
    std::deque<int> q{base};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (const auto& [l, t] : adj[v])
        if (dist[t] < 0) {
          dist[t] = dist[v] + 1;
          q.push_back(t);
        }
    }
  }
};

// Vertices within distance r of center, by truncated BFS.
inline std::vector<int> ball_vertices(const LabeledGraph& g, int center,
                                      int r) {
  std::vector<int> d(g.num_vertices(), -1);
  d[center] = 0;
  std::deque<int> q{center};
  std::vector<int> out{center};
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    if (d[v] == r) continue;
    for (const auto& [l, t] : g.adj[v])
      if (d[t] < 0) {
        d[t] = d[v] + 1;
        q.push_back(t);
        out.push_back(t);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline void copy_labels(const GroupSpec& g, LabeledGraph& out) {
  for (const auto& sg : g.symmetric_generators()) {
    out.edge_labels.push_back(sg.name);
    out.label_partner.push_back(sg.partner);
  }
}

}  // namespace detail

// Cayley ball of radius R: vertices are canonical group elements, the edge
// for s at g targets s g. Stars are complete below radius R.
inline LabeledGraph cayley_ball(const GroupSpec& g, int radius,
                                std::size_t budget = kDefaultBallBudget) {
  Ball b = enumerate_ball(g, radius, budget);
  if (!b.complete)
    throw BallBudgetExceeded("cayley_ball: enumeration budget exhausted");
  LabeledGraph out;
  detail::copy_labels(g, out);
  out.adj.resize(b.elems.size());
  for (std::size_t i = 0; i < b.elems.size(); ++i)
    out.vertex_labels.push_back(b.word_name(static_cast<int>(i)));
  const auto& sym = g.symmetric_generators();
  for (std::size_t i = 0; i < b.elems.size(); ++i) {
    if (b.length[i] >= radius) break;  // boundary stars stay partial
    for (std::size_t s = 0; s < sym.size(); ++s) {
      int j = b.find(compose(sym[s].g, b.elems[i]));
      if (j < 0) throw Error("cayley_ball: missing product in ball");
      out.add_edge(static_cast<int>(i), static_cast<int>(s), j);
      out.add_edge(j, sym[s].partner, static_cast<int>(i));
    }
  }
  out.base = 0;
  out.completeness_radius = radius;
  out.compute_dist();
  return out;
}

// Action on a full level: exact graph, one vertex per level-n word.
inline LabeledGraph level_schreier(const GroupSpec& g, std::size_t level,
                                   std::size_t cap = kDefaultLevelCap) {
  const TreeSpec& t = g.tree();
  t.level_size(level, cap);  // raises LevelCapExceeded before enumeration
  auto verts = level_vertices(t, level);
  auto index_of = [&](const Word& w) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      idx = idx * t.degree(i) + w[i];
    return static_cast<int>(idx);
  };
  LabeledGraph out;
  detail::copy_labels(g, out);
  out.adj.resize(verts.size());
  for (const Word& w : verts) out.vertex_labels.push_back(word_str(w));
  const auto& sym = g.symmetric_generators();
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t s = 0; s < sym.size(); ++s)
      out.add_edge(static_cast<int>(i), static_cast<int>(s),
                   index_of(sym[s].g.apply(verts[i])));
  out.base = 0;
  out.completeness_radius = kExactGraph;
  out.compute_dist();
  return out;
}

// Orbit ball of a ray: BFS to radius R with exact ray arithmetic. Boundary
// vertices keep the backward half of their star only.
inline LabeledGraph orbital_ball(const GroupSpec& g, const Ray& x,
                                 int radius) {
  x.validate(g.tree());
  LabeledGraph out;
  detail::copy_labels(g, out);
  std::map<Ray, int> id;
  std::vector<Ray> rays;
  auto intern = [&](const Ray& r) {
    auto it = id.find(r);
    if (it != id.end()) return it->second;
    int n = static_cast<int>(rays.size());
    id.emplace(r, n);
    rays.push_back(r);
    out.vertex_labels.push_back(r.str());
    out.adj.emplace_back();
    return n;
  };
  intern(x);
  const auto& sym = g.symmetric_generators();
  std::vector<int> depth{0};
  for (std::size_t q = 0; q < rays.size(); ++q) {
    if (depth[q] == radius) continue;
    for (std::size_t s = 0; s < sym.size(); ++s) {
      Ray img = sym[s].g.apply(rays[q]);
      std::size_t before = rays.size();
      int t = intern(img);
      if (rays.size() > before) depth.push_back(depth[q] + 1);
      out.add_edge(static_cast<int>(q), static_cast<int>(s), t);
      out.add_edge(t, sym[s].partner, static_cast<int>(q));
    }
  }
  out.base = 0;
  out.completeness_radius = radius;
  out.compute_dist();
  return out;
}

// Germ ball plus its projection onto the orbital ball of the same radius.
struct GermBallResult {
  LabeledGraph germ;
  LabeledGraph orbital;
  std::vector<int> projection;  // germ vertex -> orbital vertex
};

inline GermBallResult germ_ball(const GroupSpec& g, const Ray& x, int radius,
                                std::size_t budget = kDefaultStateBudget) {
  x.validate(g.tree());
  GermBallResult res;
  res.orbital = orbital_ball(g, x, radius);
  LabeledGraph& out = res.germ;
  detail::copy_labels(g, out);

  struct Coset {
    TreeAutomorphism rep;
    Ray image;
    int depth;
  };
  std::vector<Coset> cosets;
  std::map<Ray, std::vector<int>> bucket;
  std::map<Ray, int> orb_id;
  for (std::size_t i = 0; i < res.orbital.num_vertices(); ++i)
    orb_id.emplace(Ray::parse(g.tree(), res.orbital.vertex_labels[i]),
                   static_cast<int>(i));

  // Truncated base rays are treated at finite depth: the germ stabilizer
  // becomes the pointwise fixator of the prefix cylinder.
  auto germ_trivial = [&](const TreeAutomorphism& q) {
    return x.truncated() ? q.fixes_cylinder_pointwise(x.preperiod())
                         : q.fixes_ray_germ(x);
  };
  auto intern = [&](TreeAutomorphism rep, const Ray& image, int depth) {
    auto& ids = bucket[image];
    for (int i : ids) {
      TreeAutomorphism q = cosets[i].rep.inverse().after(rep, budget);
      if (germ_trivial(q)) return i;
    }
    int n = static_cast<int>(cosets.size());
    ids.push_back(n);
    std::string label = image.str();
    if (ids.size() > 1) label += "#" + std::to_string(ids.size() - 1);
    out.vertex_labels.push_back(std::move(label));
    out.adj.emplace_back();
    res.projection.push_back(orb_id.at(image));
    cosets.push_back({std::move(rep), image, depth});
    return n;
  };
  intern(TreeAutomorphism::identity(g.tree()), x, 0);
  const auto& sym = g.symmetric_generators();
  for (std::size_t q = 0; q < cosets.size(); ++q) {
    if (cosets[q].depth == radius) continue;
    for (std::size_t s = 0; s < sym.size(); ++s) {
      TreeAutomorphism rep = sym[s].g.after(cosets[q].rep, budget);
      Ray img = sym[s].g.apply(cosets[q].image);
      int t = intern(std::move(rep), img, cosets[q].depth + 1);
      out.add_edge(static_cast<int>(q), static_cast<int>(s), t);
      out.add_edge(t, sym[s].partner, static_cast<int>(q));
    }
  }
  out.base = 0;
  out.completeness_radius = radius;
  out.compute_dist();
  return res;
}

// Checks that the germ projection is a label-preserving morphism, covers
// the orbital ball, and is locally bijective on complete stars.
struct CoveringCheck {
  bool ok = true;
  std::string detail;
};

inline CoveringCheck covering_check(const GermBallResult& r) {
  auto fail = [](std::string why) { return CoveringCheck{false, std::move(why)}; };
  const LabeledGraph &g = r.germ, &o = r.orbital;
  if (r.projection.size() != g.num_vertices())
    return fail("projection size mismatch");
  std::vector<char> hit(o.num_vertices(), 0);
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    int pv = r.projection[v];
    hit[pv] = 1;
    for (const auto& [l, t] : g.adj[v])
      if (!o.has_edge(pv, l, r.projection[t]))
        return fail("edge not preserved at " + g.vertex_labels[v]);
    if (g.known_radius(static_cast<int>(v)) >= 1 && o.known_radius(pv) >= 1) {
      if (g.adj[v].size() != o.adj[pv].size())
        return fail("star size differs at " + g.vertex_labels[v]);
    }
  }
  for (std::size_t v = 0; v < o.num_vertices(); ++v)
    if (!hit[v]) return fail("orbital vertex not covered: " + o.vertex_labels[v]);
  return {};
}

// Exact growth statistics over centers whose r-ball is fully known.
struct GrowthRow {
  int radius = 0;
  std::size_t max_ball = 0;
  std::size_t min_ball = 0;
  std::size_t base_ball = 0;
};

struct GrowthTable {
  std::vector<GrowthRow> rows;
};

inline GrowthTable graph_growth(const LabeledGraph& g, int up_to_r) {
  GrowthTable t;
  for (int r = 0; r <= up_to_r; ++r) {
    GrowthRow row;
    row.radius = r;
    row.min_ball = SIZE_MAX;
    bool any = false;
    for (std::size_t v = 0; v < g.num_vertices(); ++v) {
      if (g.known_radius(static_cast<int>(v)) < r) continue;
      std::size_t sz = ball_vertices(g, static_cast<int>(v), r).size();
      any = true;
      row.max_ball = std::max(row.max_ball, sz);
      row.min_ball = std::min(row.min_ball, sz);
      if (static_cast<int>(v) == g.base) row.base_ball = sz;
    }
    if (!any)
      throw Error("graph_growth: no admissible center at radius " +
                  std::to_string(r));
    if (g.known_radius(g.base) < r)
      throw Error("graph_growth: base ball clipped at radius " +
                  std::to_string(r));
    t.rows.push_back(row);
  }
  return t;
}

// Label-following embedding test: the R-ball of the Cayley graph embeds at
// x iff words of length <= R acting equally on x are equal in the group.
struct EmbedResult {
  bool embeds = false;
  int center = -1;
  std::string detail;
};

inline EmbedResult ball_embedding_test(const GroupSpec& g,
                                       const LabeledGraph& h, int radius,
                                       std::size_t budget = kDefaultBallBudget) {
  Ball b = enumerate_ball(g, radius, budget);
  if (!b.complete)
    throw BallBudgetExceeded("ball_embedding_test: budget exhausted");
  const auto& sym = g.symmetric_generators();
  // Cayley adjacency inside the ball, -1 past the boundary.
  std::vector<std::vector<int>> edge_to(b.elems.size(),
                                        std::vector<int>(sym.size(), -1));
  for (std::size_t i = 0; i < b.elems.size(); ++i) {
    if (b.length[i] >= radius) break;
    for (std::size_t s = 0; s < sym.size(); ++s)
      edge_to[i][s] = b.find(compose(sym[s].g, b.elems[i]));
  }
  for (std::size_t x = 0; x < h.num_vertices(); ++x) {
    if (h.known_radius(static_cast<int>(x)) < radius) continue;
    std::vector<int> img(b.elems.size(), -1);
    std::vector<int> owner(h.num_vertices(), -1);
    img[0] = static_cast<int>(x);
    owner[x] = 0;
    bool good = true;
    for (std::size_t i = 0; i < b.elems.size() && good; ++i) {
      if (b.length[i] >= radius) break;
      for (std::size_t s = 0; s < sym.size() && good; ++s) {
        int j = edge_to[i][s];
        if (j < 0) continue;
        int y = h.neighbor(img[i], static_cast<int>(s));
        if (y < 0) {
          good = false;  // star unexpectedly missing a generator edge
        } else if (img[j] == -1) {
          if (owner[y] != -1 && owner[y] != j) good = false;  // not injective
          img[j] = y;
          owner[y] = static_cast<int>(j);
        } else if (img[j] != y) {
          good = false;  // one element, two images
        }
      }
    }
    if (good)
      return {true, static_cast<int>(x),
              "embeds_at " + h.vertex_labels[x]};
  }
  return {false, -1, "no_embedding"};
}

// Nested chain of vertex sets with uniformly small outer boundaries. The
// greedy repair only absorbs boundary vertices that strictly shrink the
// boundary, so failure is honest but inconclusive.
struct CutChain {
  bool found = false;
  std::vector<std::vector<int>> sets;
  std::vector<std::vector<int>> boundaries;
  std::string note;
};

inline CutChain cut_set_sequence(const LabeledGraph& g, std::size_t bound,
                                 std::size_t min_chain_length) {
  CutChain out;
  std::size_t n = g.num_vertices();
  if (n == 0) {
    out.note = "empty graph";
    return out;
  }
  // The region a certificate must exhaust: reachable vertices with full
  // stars. Boundaries may use clipped vertices.
  std::vector<char> interior(n, 0);
  std::size_t interior_count = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (g.dist[v] >= 0 && g.known_radius(static_cast<int>(v)) >= 1) {
      interior[v] = 1;
      ++interior_count;
    }
  std::vector<char> in_v(n, 0), in_b(n, 0);
  std::vector<int> boundary;
  std::size_t covered = 0;
  auto absorb = [&](int w) {
    in_v[w] = 1;
    if (interior[w]) ++covered;
    boundary.erase(std::find(boundary.begin(), boundary.end(), w));
    in_b[w] = 0;
    for (const auto& [l, t] : g.adj[w])
      if (!in_v[t] && !in_b[t]) {
        in_b[t] = 1;
        boundary.push_back(t);
      }
  };
  in_v[g.base] = 1;
  if (interior[g.base]) ++covered;
  for (const auto& [l, t] : g.adj[g.base])
    if (!in_v[t] && !in_b[t]) {
      in_b[t] = 1;
      boundary.push_back(t);
    }
  while (true) {
    // Strict-improvement repair: absorbing w helps iff all its neighbours
    // already sit in the set or on the boundary.
    bool improved = true;
    while (boundary.size() > bound && improved) {
      improved = false;
      for (int w : boundary) {
        bool free_nbr = false;
        for (const auto& [l, t] : g.adj[w])
          if (!in_v[t] && !in_b[t]) {
            free_nbr = true;
            break;
          }
        if (!free_nbr) {
          absorb(w);
          improved = true;
          break;
        }
      }
    }
    if (boundary.size() > bound) {
      out.note = "boundary stuck above bound at chain length " +
                 std::to_string(out.sets.size());
      return out;
    }
    std::vector<int> vs, bs = boundary;
    for (std::size_t v = 0; v < n; ++v)
      if (in_v[v]) vs.push_back(static_cast<int>(v));
    std::sort(bs.begin(), bs.end());
    out.sets.push_back(std::move(vs));
    out.boundaries.push_back(std::move(bs));
    std::size_t on_boundary = 0;
    for (int w : boundary)
      if (interior[w]) ++on_boundary;
    if (covered + on_boundary >= interior_count) break;
    if (boundary.empty()) {
      out.note = "ran out of frontier before exhausting the interior";
      return out;
    }
    for (std::vector<int> layer(boundary.begin(), boundary.end());
         int w : layer)
      if (!in_v[w]) absorb(w);
  }
  if (out.sets.size() < min_chain_length) {
    out.note = "chain shorter than requested minimum";
    return out;
  }
  out.found = true;
  out.note = "chain of " + std::to_string(out.sets.size()) +
             " sets, boundaries <= " + std::to_string(bound);
  return out;
}

// Dimension upper bound from either certificate kind.
struct LeudBound {
  int bound = 0;
  std::string justification;
};

inline constexpr double kLeudSlopeTolerance = 0.25;
inline constexpr double kLeudResidualTolerance = 0.08;

inline LeudBound leud_upper(const CutChain& c) {
  if (!c.found)
    throw Error("leud_upper: cut-set evidence is not a certificate");
  std::size_t b = 0;
  for (const auto& s : c.boundaries) b = std::max(b, s.size());
  return {1, "bounded cut-set chain (" + std::to_string(c.sets.size()) +
                 " sets, boundary size <= " + std::to_string(b) + ")"};
}

inline LeudBound leud_upper(const GrowthTable& t) {
  // Least squares of log max_ball against log radius over the dyadic
  // window [R/2, R].
  int rmax = t.rows.empty() ? 0 : t.rows.back().radius;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : t.rows)
    if (row.radius >= std::max(2, rmax / 2))
      pts.emplace_back(std::log(static_cast<double>(row.radius)),
                       std::log(static_cast<double>(row.max_ball)));
  if (pts.size() < 3)
    throw Error("leud_upper: growth window too small for a fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(pts.size());
  double denom = n * sxx - sx * sx;
  if (denom <= 0) throw Error("leud_upper: degenerate fit window");
  double slope = (n * sxy - sx * sy) / denom;
  double icept = (sy - slope * sx) / n;
  double rss = 0;
  for (auto [x, y] : pts) {
    double e = y - (slope * x + icept);
    rss += e * e;
  }
  double rms = std::sqrt(rss / n);
  int d = static_cast<int>(std::lround(slope));
  if (d < 0 || std::abs(slope - d) > kLeudSlopeTolerance ||
      rms > kLeudResidualTolerance)
    throw Error("leud_upper: fit residual above threshold (slope " +
                std::to_string(slope) + ", rms " + std::to_string(rms) + ")");
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "log-log fit over [%d,%d]: slope %.3f, rms %.3f, degree %d",
                std::max(2, rmax / 2), rmax, slope, rms, d);
  return {d, buf};
}

}  // namespace branchlab
