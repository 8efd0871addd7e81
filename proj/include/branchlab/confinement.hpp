#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "branchlab/automorphism.hpp"
#include "branchlab/group.hpp"
#include "branchlab/oracle.hpp"
#include "branchlab/tree.hpp"

namespace branchlab {

// An element of the input set squares to the identity, so no cylinder can
// be displaced twice by it.
class OrderTwoObstruction : public Error {
 public:
  OrderTwoObstruction(int index, const std::string& msg)
      : Error(msg), index(index) {}
  int index;
};

class DepthBudgetExceeded : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Rigid stabilizer sampling

struct RistBall {
  std::vector<TreeAutomorphism> elems;  // nontrivial, deduplicated
  std::vector<std::string> words;       // witness words over the group's generators
  bool ball_complete = true;
};

// Nontrivial elements of rist(v) among all elements of word length <= radius,
// merged with any registry hints for v or vertices below it. Hints are
// validated: a hint word that is trivial or not rigid at its vertex is a
// curation bug and throws.
inline RistBall rist_ball(const GroupSpec& g, const Word& v, int radius,
                          std::size_t budget = kDefaultBallBudget) {
  SubgroupOracle rist = SubgroupOracle::rigid_stabilizer(g.tree(), v);
  Ball ball = enumerate_ball(g, radius, budget);
  RistBall out;
  out.ball_complete = ball.complete;
  AutSet seen;
  for (std::size_t i = 1; i < ball.elems.size(); ++i) {
    if (!rist.contains(ball.elems[i])) continue;
    if (seen.insert(ball.elems[i]) == static_cast<int>(out.elems.size())) {
      out.elems.push_back(ball.elems[i]);
      out.words.push_back(ball.word_name(static_cast<int>(i)));
    }
  }
  for (const auto& [vs, lists] : g.rist_hints()) {
    Word hv = parse_word(vs);
    if (!is_prefix(v, hv)) continue;
    SubgroupOracle local = hv == v ? rist
                                   : SubgroupOracle::rigid_stabilizer(g.tree(), hv);
    for (const auto& letters : lists) {
      TreeAutomorphism el = g.word(letters);
      if (el.is_identity())
        throw Error("rist_ball: hint for " + vs + " is trivial");
      if (!local.contains(el))
        throw Error("rist_ball: hint for " + vs + " is not rigid there");
      if (seen.insert(el) == static_cast<int>(out.elems.size())) {
        std::string name;
        for (std::size_t k = 0; k < letters.size(); ++k) {
          if (k) name += ".";
          name += letters[k];
        }
        out.elems.push_back(std::move(el));
        out.words.push_back(std::move(name));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Confining sets

struct ConfiningReport {
  bool confirmed = false;
  int scale = 0;
  std::size_t ball_size = 0;
  bool ball_complete = true;
  // Set on refutation; the witness conjugates no candidate into any oracle.
  std::optional<std::string> refuting_word;
  std::optional<TreeAutomorphism> refuting_element;
};

namespace detail {

inline void check_confining_inputs(const std::vector<TreeAutomorphism>& p,
                                   const std::vector<SubgroupOracle>& oracles,
                                   const GroupSpec& g) {
  if (p.empty()) throw Error("check_confining: empty candidate set");
  if (oracles.empty()) throw Error("check_confining: no oracles");
  for (const TreeAutomorphism& s : p) {
    require_same_tree(g.tree(), s.tree(), "check_confining");
    if (s.is_identity())
      throw Error("check_confining: candidate set contains the identity");
  }
  for (const SubgroupOracle& h : oracles)
    require_same_tree(g.tree(), h.tree(), "check_confining");
}

// Scans a precomputed ball; shared by check_confining and refine_confining.
inline ConfiningReport confining_scan(const std::vector<TreeAutomorphism>& p,
                                      const std::vector<SubgroupOracle>& oracles,
                                      const Ball& ball, int scale) {
  ConfiningReport r;
  r.scale = scale;
  r.ball_size = ball.elems.size();
  r.ball_complete = ball.complete;
  for (std::size_t i = 0; i < ball.elems.size(); ++i) {
    TreeAutomorphism inv = ball.elems[i].inverse();
    bool hit = false;
    for (const TreeAutomorphism& s : p) {
      TreeAutomorphism c = conjugate(inv, s);  // g^-1 s g
      for (const SubgroupOracle& h : oracles)
        if (h.contains(c)) {
          hit = true;
          break;
        }
      if (hit) break;
    }
    if (!hit) {
      r.refuting_word = ball.word_name(static_cast<int>(i));
      r.refuting_element = ball.elems[i];
      return r;
    }
  }
  r.confirmed = true;
  return r;
}

}  // namespace detail

// Does every |g| <= scale conjugate some candidate into some oracle? A
// refutation is definitive; confirmation is relative to the scale.
inline ConfiningReport check_confining(const std::vector<TreeAutomorphism>& p,
                                       const std::vector<SubgroupOracle>& oracles,
                                       const GroupSpec& g, int scale,
                                       std::size_t budget = kDefaultBallBudget) {
  detail::check_confining_inputs(p, oracles, g);
  Ball ball = enumerate_ball(g, scale, budget);
  return detail::confining_scan(p, oracles, ball, scale);
}

inline ConfiningReport check_confining(const std::vector<TreeAutomorphism>& p,
                                       const SubgroupOracle& h,
                                       const GroupSpec& g, int scale,
                                       std::size_t budget = kDefaultBallBudget) {
  return check_confining(p, std::vector<SubgroupOracle>{h}, g, scale, budget);
}

// ---------------------------------------------------------------------------
// Displacement configurations

struct DisplacementConfig {
  std::vector<TreeAutomorphism> p;
  std::vector<Antichain> omega;  // parallel to p
  bool verified = false;
};

struct DisplacementCheck {
  bool ok = false;
  std::vector<std::string> failures;
  // Partition of indices per element: moved[i] holds rho with
  // p[i](omega[rho]) off the whole union, fixed[i] those fixed pointwise.
  std::vector<std::vector<int>> moved;
  std::vector<std::vector<int>> fixed;
};

inline Antichain image_antichain(const TreeAutomorphism& g, const Antichain& a) {
  std::vector<Word> out;
  out.reserve(a.size());
  for (const Word& v : a.vertices()) out.push_back(g.apply(v));
  return Antichain(a.tree(), std::move(out));
}

inline bool fixes_antichain_pointwise(const TreeAutomorphism& g,
                                      const Antichain& a) {
  for (const Word& v : a.vertices())
    if (!g.fixes_cylinder_pointwise(v)) return false;
  return true;
}

// Exact check of the three displacement conditions. Every test reduces to
// cylinder arithmetic: images of cylinders under automorphisms are single
// cylinders, so equality and disjointness are decidable on vertex words.
inline DisplacementCheck verify_displacement(DisplacementConfig& cfg) {
  DisplacementCheck out;
  cfg.verified = false;
  const std::size_t r = cfg.p.size();
  if (r == 0) throw Error("verify_displacement: empty configuration");
  if (cfg.omega.size() != r)
    throw Error("verify_displacement: omega count differs from element count");
  const TreeSpec& t = cfg.p.front().tree();
  for (std::size_t i = 0; i < r; ++i) {
    require_same_tree(t, cfg.p[i].tree(), "verify_displacement");
    require_same_tree(t, cfg.omega[i].tree(), "verify_displacement");
    if (cfg.p[i].is_identity())
      throw Error("verify_displacement: element " + std::to_string(i) +
                  " is the identity");
    if (cfg.omega[i].empty())
      throw Error("verify_displacement: omega " + std::to_string(i) +
                  " is empty");
  }
  out.moved.assign(r, {});
  out.fixed.assign(r, {});

  auto off_union = [&](const Antichain& x) {
    for (const Antichain& o : cfg.omega)
      if (!cylinders_disjoint(x, o)) return false;
    return true;
  };

  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j)
      if (cfg.omega[i] != cfg.omega[j] &&
          !cylinders_disjoint(cfg.omega[i], cfg.omega[j]))
        out.failures.push_back("C1: omega " + std::to_string(i) + " and " +
                               std::to_string(j) +
                               " neither equal nor disjoint");

  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      if (fixes_antichain_pointwise(cfg.p[i], cfg.omega[j])) {
        out.fixed[i].push_back(static_cast<int>(j));
      } else if (off_union(image_antichain(cfg.p[i], cfg.omega[j]))) {
        out.moved[i].push_back(static_cast<int>(j));
      } else {
        out.failures.push_back(
            "C3: element " + std::to_string(i) + " neither fixes omega " +
            std::to_string(j) + " pointwise nor moves it off the union");
      }
    }
  }

  for (std::size_t i = 0; i < r; ++i) {
    Antichain img = image_antichain(cfg.p[i], cfg.omega[i]);
    if (!off_union(img))
      out.failures.push_back("C4: image of omega " + std::to_string(i) +
                             " meets the union");
    TreeAutomorphism inv = cfg.p[i].inverse();
    for (std::size_t a = 0; a < r; ++a)
      if (!cylinders_disjoint(img, image_antichain(inv, cfg.omega[a])))
        out.failures.push_back("C4: image of omega " + std::to_string(i) +
                               " meets preimage of omega " + std::to_string(a));
  }

  out.ok = out.failures.empty();
  cfg.verified = out.ok;
  return out;
}

// Searches one level at a time for cylinders displaced twice over. At a
// fixed level same-size cylinders are disjoint iff their roots differ, so
// the conditions become vertex constraints and backtracking over vertex
// choices replaces the shrink-and-retry of open sets.
inline DisplacementConfig build_displacement(
    const std::vector<TreeAutomorphism>& p, int depth_budget,
    std::size_t pool_cap = 96, std::size_t node_budget = 200000) {
  if (p.empty()) throw Error("build_displacement: empty set");
  const TreeSpec& t = p.front().tree();
  std::vector<TreeAutomorphism> sq;
  for (std::size_t i = 0; i < p.size(); ++i) {
    require_same_tree(t, p[i].tree(), "build_displacement");
    if (p[i].is_identity())
      throw Error("build_displacement: element " + std::to_string(i) +
                  " is the identity");
    sq.push_back(compose(p[i], p[i]));
    if (sq.back().is_identity())
      throw OrderTwoObstruction(
          static_cast<int>(i), "build_displacement: element " +
                                   std::to_string(i) + " has order two");
  }
  const std::size_t r = p.size();

  for (int n = 1; n <= depth_budget; ++n) {
    std::vector<Word> level = level_vertices(t, static_cast<std::size_t>(n));
    std::vector<std::vector<Word>> pool(r);
    bool usable = true;
    for (std::size_t i = 0; i < r; ++i) {
      for (const Word& v : level) {
        if (sq[i].apply(v) != v) pool[i].push_back(v);
        if (pool[i].size() >= pool_cap) break;
      }
      if (pool[i].empty()) usable = false;
    }
    if (!usable) continue;  // squares act trivially this shallow

    std::vector<Word> chosen;
    std::size_t nodes = 0;
    std::map<std::pair<std::size_t, Word>, bool> fix_cache;
    auto fixes = [&](std::size_t i, const Word& v) {
      auto key = std::make_pair(i, v);
      auto it = fix_cache.find(key);
      if (it != fix_cache.end()) return it->second;
      bool f = p[i].fixes_cylinder_pointwise(v);
      fix_cache.emplace(key, f);
      return f;
    };
    auto admissible = [&](const Word& cand) {
      std::size_t k = chosen.size();  // index the candidate would take
      auto in_set = [&](const Word& w) {
        if (w == cand) return true;
        return std::find(chosen.begin(), chosen.end(), w) != chosen.end();
      };
      for (const Word& w : chosen)
        if (w == cand) return false;
      for (std::size_t i = 0; i <= k; ++i) {
        const Word& vi = i == k ? cand : chosen[i];
        // C4 against the extended set: neither the image nor the double
        // image of the element's own cylinder may land on a chosen one.
        if (in_set(p[i].apply(vi)) || in_set(sq[i].apply(vi))) return false;
        // C3: each element either fixes a chosen cylinder pointwise or
        // displaces it clear of every chosen cylinder.
        for (std::size_t j = 0; j <= k; ++j) {
          const Word& vj = j == k ? cand : chosen[j];
          if (!fixes(i, vj) && in_set(p[i].apply(vj))) return false;
        }
      }
      return true;
    };

    std::function<bool()> dfs = [&]() -> bool {
      if (chosen.size() == r) return true;
      std::size_t i = chosen.size();
      for (const Word& cand : pool[i]) {
        if (++nodes > node_budget) return false;
        if (!admissible(cand)) continue;
        chosen.push_back(cand);
        if (dfs()) return true;
        chosen.pop_back();
      }
      return false;
    };

    if (dfs()) {
      DisplacementConfig cfg;
      cfg.p = p;
      for (const Word& v : chosen) cfg.omega.emplace_back(t, std::vector<Word>{v});
      DisplacementCheck check = verify_displacement(cfg);
      if (!check.ok)
        throw Error("build_displacement: search produced an invalid "
                    "configuration: " + check.failures.front());
      return cfg;
    }
  }
  throw DepthBudgetExceeded("build_displacement: no configuration within depth " +
                            std::to_string(depth_budget));
}

// ---------------------------------------------------------------------------
// Refining a confining set past order-two obstructions

struct RefineReport {
  bool ok = false;
  bool changed = false;
  std::vector<TreeAutomorphism> refined;
  std::vector<std::string> words;  // provenance per refined element
  std::string note;
  ConfiningReport recheck;
};

// Replaces order-two candidates by products of two conjugates with
// disjointly supported conjugators, keeping only candidates of order > 2,
// then re-checks the confining property at the same scale and prunes.
inline RefineReport refine_confining(const std::vector<TreeAutomorphism>& p,
                                     const std::vector<SubgroupOracle>& oracles,
                                     const GroupSpec& g, int scale,
                                     int conj_radius = 3,
                                     std::size_t pool_cap = 48,
                                     std::size_t budget = kDefaultBallBudget) {
  detail::check_confining_inputs(p, oracles, g);
  RefineReport rep;
  Ball ball = enumerate_ball(g, scale, budget);
  ConfiningReport pre = detail::confining_scan(p, oracles, ball, scale);
  rep.recheck = pre;
  if (!pre.confirmed) {
    rep.note = "precondition failed: set is not confining at scale " +
               std::to_string(scale);
    return rep;
  }

  std::vector<TreeAutomorphism> keep;
  std::vector<std::string> keep_words;
  bool has_involution = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (compose(p[i], p[i]).is_identity()) {
      has_involution = true;
    } else {
      keep.push_back(p[i]);
      keep_words.push_back("p" + std::to_string(i));
    }
  }
  if (!has_involution) {
    rep.ok = true;
    rep.refined = p;
    for (std::size_t i = 0; i < p.size(); ++i)
      rep.words.push_back("p" + std::to_string(i));
    rep.note = "no order-two elements; set unchanged";
    return rep;
  }

  Ball conj = enumerate_ball(g, conj_radius, budget);
  const std::size_t support_depth = 6;
  std::vector<Antichain> supports;
  supports.reserve(conj.elems.size());
  for (const TreeAutomorphism& c : conj.elems)
    supports.push_back(c.support_antichain(support_depth).first);

  AutSet seen;
  for (const TreeAutomorphism& s : keep) seen.insert(s);
  std::vector<TreeAutomorphism> pool;
  std::vector<std::string> pool_words;
  for (std::size_t si = 0; si < p.size() && pool.size() < pool_cap; ++si) {
    for (std::size_t j = 0; j < conj.elems.size() && pool.size() < pool_cap; ++j) {
      for (std::size_t k = 0; k < conj.elems.size() && pool.size() < pool_cap; ++k) {
        if (j == k) continue;
        if (!cylinders_disjoint(supports[j], supports[k])) continue;
        TreeAutomorphism cj = conjugate(conj.elems[j], p[si]);
        TreeAutomorphism ck = conjugate(conj.elems[k], p[si]);
        TreeAutomorphism h = compose(cj.inverse(), ck);
        if (h.is_identity() || compose(h, h).is_identity()) continue;
        if (seen.insert(h) != static_cast<int>(seen.size()) - 1) continue;
        pool.push_back(h);
        pool_words.push_back("(" + conj.word_name(static_cast<int>(j)) + " ~ p" +
                             std::to_string(si) + ")^-1.(" +
                             conj.word_name(static_cast<int>(k)) + " ~ p" +
                             std::to_string(si) + ")");
      }
    }
  }

  std::vector<TreeAutomorphism> cand = keep;
  std::vector<std::string> cand_words = keep_words;
  cand.insert(cand.end(), pool.begin(), pool.end());
  cand_words.insert(cand_words.end(), pool_words.begin(), pool_words.end());
  if (cand.empty()) {
    rep.note = "no replacement candidates of order > 2 found";
    return rep;
  }

  ConfiningReport after = detail::confining_scan(cand, oracles, ball, scale);
  if (!after.confirmed) {
    rep.recheck = after;
    rep.note = "refined candidates are not confining at scale " +
               std::to_string(scale);
    return rep;
  }

  // Greedy prune, later candidates first so early short products survive.
  for (std::size_t drop = cand.size(); drop-- > keep.size();) {
    if (cand.size() == 1) break;
    std::vector<TreeAutomorphism> trial = cand;
    std::vector<std::string> trial_words = cand_words;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(drop));
    trial_words.erase(trial_words.begin() + static_cast<std::ptrdiff_t>(drop));
    ConfiningReport scan = detail::confining_scan(trial, oracles, ball, scale);
    if (scan.confirmed) {
      cand = std::move(trial);
      cand_words = std::move(trial_words);
      after = scan;
    }
  }

  rep.ok = true;
  rep.changed = true;
  rep.refined = std::move(cand);
  rep.words = std::move(cand_words);
  rep.recheck = after;
  rep.note = "order-two candidates replaced and re-confirmed";
  return rep;
}

inline RefineReport refine_confining(const std::vector<TreeAutomorphism>& p,
                                     const SubgroupOracle& h, const GroupSpec& g,
                                     int scale, int conj_radius = 3,
                                     std::size_t pool_cap = 48,
                                     std::size_t budget = kDefaultBallBudget) {
  return refine_confining(p, std::vector<SubgroupOracle>{h}, g, scale,
                          conj_radius, pool_cap, budget);
}

// ---------------------------------------------------------------------------
// The commutator engine

struct EngineOptions {
  int r_ball_radius = 4;  // radius in the rist-generated subgroup
  std::size_t r_ball_budget = 4096;
  std::size_t y_cap = 24;
  std::size_t pair_cap = 64;
  std::size_t lambda_cap = 4;
  std::size_t b_cap = 24;
  std::size_t n_cap = 16;
  std::size_t ball_budget = kDefaultBallBudget;
};

struct LedgerEntry {
  std::string check;
  bool pass = false;
  std::string detail;
};

struct EngineReport {
  int scale = 0;
  int sigma = -1;   // index into the configuration's element list
  int oracle = -1;  // index into the oracle list
  Antichain omega_sigma;
  std::vector<int> moved;  // rho indices displaced off the union by sigma
  std::vector<int> fixed;  // rho indices fixed pointwise by sigma
  std::vector<std::pair<std::string, std::string>> r_generators;  // name, word
  std::vector<std::string> y_words;
  std::vector<TreeAutomorphism> y;
  std::vector<std::pair<int, int>> pairs;  // (delta, gamma) indices into y
  std::vector<TreeAutomorphism> a;         // a(delta,gamma) per pair
  std::vector<TreeAutomorphism> d;         // delta gamma^-1 per pair
  std::vector<int> lambdas;                // indices into y
  std::vector<TreeAutomorphism> b;         // conjugated a-samples
  std::vector<int> b_lambda;               // lambda index per b entry
  std::optional<TreeAutomorphism> h0;
  std::string h0_source;  // "rist_ball" or "commutator"
  int rho = -1;           // omega index supporting h0
  std::vector<TreeAutomorphism> n_generators;
  std::vector<LedgerEntry> ledger;
  bool conclusive = false;
  std::string note;

  bool all_checks_pass() const {
    for (const LedgerEntry& e : ledger)
      if (!e.pass) return false;
    return true;
  }
};

namespace detail {

struct CheckTally {
  std::size_t total = 0;
  std::size_t failed = 0;
  std::string first_fail;

  void record(bool pass, const std::string& what) {
    ++total;
    if (!pass && failed++ == 0) first_fail = what;
  }

  LedgerEntry entry(const std::string& name) const {
    LedgerEntry e;
    e.check = name;
    e.pass = failed == 0;
    e.detail = "checked=" + std::to_string(total);
    if (failed) e.detail += " failed=" + std::to_string(failed) +
                            " first=" + first_fail;
    return e;
  }
};

inline bool preserves_vertex_set(const TreeAutomorphism& g,
                                 const std::vector<Word>& verts) {
  std::vector<Word> img;
  img.reserve(verts.size());
  for (const Word& v : verts) img.push_back(g.apply(v));
  std::sort(img.begin(), img.end(), shortlex_less);
  return img == verts;
}

}  // namespace detail

// Runs the conjugate-difference construction over a verified displacement
// configuration and records every invariant it relies on. Failure of an
// individual sample marks the ledger instead of throwing; an empty harvest
// is reported as inconclusive.
inline EngineReport commutator_engine(const DisplacementConfig& cfg,
                                      const std::vector<SubgroupOracle>& oracles,
                                      const GroupSpec& g, int scale,
                                      EngineOptions opt = {}) {
  if (!cfg.verified)
    throw Error("commutator_engine: displacement configuration not verified");
  if (oracles.empty()) throw Error("commutator_engine: no oracles");
  DisplacementConfig copy = cfg;
  DisplacementCheck check = verify_displacement(copy);
  if (!check.ok)
    throw Error("commutator_engine: configuration fails verification: " +
                check.failures.front());

  EngineReport rep;
  rep.scale = scale;
  rep.ledger.push_back({"input_verified", true, ""});

  // Rigid stabilizer generators over the distinct omega cylinders.
  std::map<Word, RistBall> per_vertex;
  AutSet rgens;
  std::vector<std::string> rgen_words;
  for (const Antichain& o : cfg.omega)
    for (const Word& v : o.vertices()) {
      if (per_vertex.count(v)) continue;
      per_vertex.emplace(v, rist_ball(g, v, scale, opt.ball_budget));
      for (std::size_t i = 0; i < per_vertex[v].elems.size(); ++i)
        if (rgens.insert(per_vertex[v].elems[i]) ==
            static_cast<int>(rgens.size()) - 1)
          rgen_words.push_back(per_vertex[v].words[i]);
    }
  if (rgens.size() == 0)
    throw Error("commutator_engine: no rigid stabilizer elements at scale " +
                std::to_string(scale));

  std::vector<std::pair<std::string, TreeAutomorphism>> named;
  for (std::size_t i = 0; i < rgens.size(); ++i) {
    std::string nm = "r" + std::to_string(i);
    named.emplace_back(nm, rgens[i]);
    rep.r_generators.emplace_back(nm, rgen_words[i]);
  }
  rep.ledger.push_back({"rist_generators", true,
                        "count=" + std::to_string(named.size())});
  GroupSpec rgroup("rist:" + g.name(), g.tree(), std::move(named));
  Ball rball = enumerate_ball(rgroup, opt.r_ball_radius, opt.r_ball_budget);

  // Choose sigma and the oracle by the largest conjugating sample.
  std::size_t best_size = 0;
  int best_s = -1, best_k = -1;
  std::vector<int> best_y;
  for (std::size_t s = 0; s < cfg.p.size(); ++s)
    for (std::size_t k = 0; k < oracles.size(); ++k) {
      std::vector<int> ys;
      for (std::size_t i = 0; i < rball.elems.size() && ys.size() < opt.y_cap;
           ++i)
        if (oracles[k].contains(conjugate(rball.elems[i], cfg.p[s])))
          ys.push_back(static_cast<int>(i));
      if (ys.size() > best_size) {
        best_size = ys.size();
        best_s = static_cast<int>(s);
        best_k = static_cast<int>(k);
        best_y = std::move(ys);
      }
    }
  if (best_s < 0) {
    rep.ledger.push_back({"Y_nonempty", false, "all samples empty"});
    rep.note = "no conjugator moves any candidate into an oracle; inconclusive";
    return rep;
  }
  rep.sigma = best_s;
  rep.oracle = best_k;
  rep.omega_sigma = cfg.omega[static_cast<std::size_t>(best_s)];
  rep.moved = check.moved[static_cast<std::size_t>(best_s)];
  rep.fixed = check.fixed[static_cast<std::size_t>(best_s)];
  rep.ledger.push_back({"Y_nonempty", true,
                        "sigma=" + std::to_string(best_s) +
                            " oracle=" + std::to_string(best_k) +
                            " size=" + std::to_string(best_y.size())});
  const TreeAutomorphism& sigma = cfg.p[static_cast<std::size_t>(best_s)];
  const SubgroupOracle& horacle = oracles[static_cast<std::size_t>(best_k)];
  for (int i : best_y) {
    rep.y.push_back(rball.elems[static_cast<std::size_t>(i)]);
    rep.y_words.push_back(rball.word_name(i));
  }

  // Support targets from the displaced part of the configuration.
  TreeAutomorphism sigma_inv = sigma.inverse();
  std::vector<Word> u_before, u_after;
  for (int rho : rep.moved)
    for (const Word& v : cfg.omega[static_cast<std::size_t>(rho)].vertices()) {
      u_before.push_back(v);
      u_before.push_back(sigma_inv.apply(v));
      u_after.push_back(v);
      u_after.push_back(sigma.apply(v));
    }
  Antichain a_target(g.tree(), u_before);   // omega_rho and their preimages
  Antichain b_target(g.tree(), u_after);    // omega_rho and their images
  Antichain a_rest = complement_antichain(a_target);
  Antichain b_rest = complement_antichain(b_target);

  detail::CheckTally a_in_h, a_supp, a_restrict;
  for (std::size_t i = 0; i < rep.y.size() && rep.pairs.size() < opt.pair_cap;
       ++i)
    for (std::size_t j = 0; j < rep.y.size() && rep.pairs.size() < opt.pair_cap;
         ++j) {
      const TreeAutomorphism& del = rep.y[i];
      const TreeAutomorphism& gam = rep.y[j];
      TreeAutomorphism a_el =
          compose(conjugate(del, sigma_inv), conjugate(gam, sigma));
      TreeAutomorphism d_el = compose(del, gam.inverse());
      std::string tag = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      a_in_h.record(horacle.contains(a_el), tag);
      a_supp.record(fixes_antichain_pointwise(a_el, a_rest), tag);
      TreeAutomorphism q = compose(d_el.inverse(), a_el);
      bool restrict_ok = true;
      for (int rho : rep.moved)
        restrict_ok = restrict_ok &&
                      fixes_antichain_pointwise(
                          q, cfg.omega[static_cast<std::size_t>(rho)]);
      a_restrict.record(restrict_ok, tag);
      rep.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
      rep.a.push_back(std::move(a_el));
      rep.d.push_back(std::move(d_el));
    }
  rep.ledger.push_back(a_in_h.entry("A_in_H"));
  rep.ledger.push_back(a_supp.entry("A_support"));
  rep.ledger.push_back(a_restrict.entry("A_restriction"));

  detail::CheckTally a_diag;
  for (std::size_t i = 0; i < rep.y.size(); ++i) {
    TreeAutomorphism same = compose(conjugate(rep.y[i], sigma_inv),
                                    conjugate(rep.y[i], sigma));
    a_diag.record(same.is_identity(), std::to_string(i));
  }
  rep.ledger.push_back(a_diag.entry("A_diagonal"));

  detail::CheckTally b_in_h, b_supp, b_pres;
  std::size_t lambda_count = std::min(opt.lambda_cap, rep.y.size());
  std::size_t per_lambda =
      std::max<std::size_t>(1, opt.b_cap / std::max<std::size_t>(1, lambda_count));
  for (std::size_t li = 0; li < lambda_count; ++li) {
    rep.lambdas.push_back(static_cast<int>(li));
    TreeAutomorphism mover = conjugate(rep.y[li], sigma);  // lambda sigma lambda^-1
    for (std::size_t ai = 0; ai < rep.a.size() && ai < per_lambda &&
                             rep.b.size() < opt.b_cap;
         ++ai) {
      TreeAutomorphism b_el = conjugate(mover, rep.a[ai]);
      std::string tag = "(lambda=" + std::to_string(li) +
                        ",a=" + std::to_string(ai) + ")";
      b_in_h.record(horacle.contains(b_el), tag);
      b_supp.record(fixes_antichain_pointwise(b_el, b_rest), tag);
      bool pres = true;
      for (int rho : rep.moved) {
        const Antichain& om = cfg.omega[static_cast<std::size_t>(rho)];
        pres = pres && detail::preserves_vertex_set(b_el, om.vertices());
        pres = pres && detail::preserves_vertex_set(
                           b_el, image_antichain(sigma, om).vertices());
      }
      b_pres.record(pres, tag);
      rep.b.push_back(std::move(b_el));
      rep.b_lambda.push_back(static_cast<int>(li));
    }
  }
  rep.ledger.push_back(b_in_h.entry("B_in_H"));
  rep.ledger.push_back(b_supp.entry("B_support"));
  rep.ledger.push_back(b_pres.entry("B_preserves"));

  // h0: a nontrivial oracle element rigidly supported in one displaced
  // cylinder. The rist samples are scanned first, sigma's own cylinder
  // leading; commutators of a- and b-samples follow.
  std::vector<int> rho_order;
  rho_order.push_back(best_s);
  for (int rho : rep.moved)
    if (rho != best_s) rho_order.push_back(rho);
  for (int rho : rho_order) {
    const Antichain& om = cfg.omega[static_cast<std::size_t>(rho)];
    for (const Word& v : om.vertices()) {
      const RistBall& rb = per_vertex.at(v);
      for (const TreeAutomorphism& el : rb.elems)
        if (horacle.contains(el)) {
          rep.h0 = el;
          rep.h0_source = "rist_ball";
          rep.rho = rho;
          break;
        }
      if (rep.h0) break;
    }
    if (rep.h0) break;
  }
  if (!rep.h0) {
    std::map<int, Antichain> rests;
    for (int rho : rho_order)
      rests.emplace(rho, complement_antichain(
                             cfg.omega[static_cast<std::size_t>(rho)]));
    for (std::size_t ai = 0; ai < rep.a.size() && !rep.h0; ++ai)
      for (std::size_t bi = 0; bi < rep.b.size() && !rep.h0; ++bi) {
        TreeAutomorphism h = commutator(rep.a[ai], rep.b[bi]);
        if (h.is_identity() || !horacle.contains(h)) continue;
        for (int rho : rho_order) {
          if (fixes_antichain_pointwise(h, rests.at(rho))) {
            rep.h0 = h;
            rep.h0_source = "commutator";
            rep.rho = rho;
            break;
          }
        }
      }
  }
  if (!rep.h0) {
    rep.ledger.push_back({"h0_found", false, "no candidate in oracle"});
    rep.note = "no oracle element rigidly supported in a displaced cylinder; "
               "inconclusive";
    return rep;
  }
  rep.ledger.push_back({"h0_found", true, "source=" + rep.h0_source +
                                              " rho=" + std::to_string(rep.rho)});

  const Antichain& h0_home = cfg.omega[static_cast<std::size_t>(rep.rho)];
  Antichain h0_rest = complement_antichain(h0_home);
  detail::CheckTally n_in_h, n_supp;
  AutSet nset;
  std::vector<TreeAutomorphism> conjby{TreeAutomorphism::identity(g.tree())};
  conjby.insert(conjby.end(), rep.a.begin(), rep.a.end());
  for (const TreeAutomorphism& a_el : conjby) {
    if (rep.n_generators.size() >= opt.n_cap) break;
    TreeAutomorphism ng = conjugate(a_el, *rep.h0);
    if (nset.insert(ng) != static_cast<int>(nset.size()) - 1) continue;
    std::string tag = "n" + std::to_string(rep.n_generators.size());
    n_in_h.record(horacle.contains(ng), tag);
    n_supp.record(fixes_antichain_pointwise(ng, h0_rest), tag);
    rep.n_generators.push_back(std::move(ng));
  }
  rep.ledger.push_back(n_in_h.entry("N_in_H"));
  rep.ledger.push_back(n_supp.entry("N_support"));
  rep.ledger.push_back({"N_nonempty", !rep.n_generators.empty(),
                        "count=" + std::to_string(rep.n_generators.size())});

  rep.conclusive = !rep.n_generators.empty() && rep.all_checks_pass();
  rep.note = rep.conclusive ? "all recorded invariants hold on the sample"
                            : "ledger failures; see entries";
  return rep;
}

inline EngineReport commutator_engine(const DisplacementConfig& cfg,
                                      const SubgroupOracle& h,
                                      const GroupSpec& g, int scale,
                                      EngineOptions opt = {}) {
  return commutator_engine(cfg, std::vector<SubgroupOracle>{h}, g, scale, opt);
}

// ---------------------------------------------------------------------------
// Derived-subgroup probe and sampling helpers

struct RistDerivedReport {
  bool holds = true;
  std::size_t pairs_checked = 0;
  std::optional<TreeAutomorphism> counterexample;
  std::string witness;
  int scale = 0;
};

// Tests whether commutators of sampled rist(v) elements land in the oracle.
// A counterexample is definitive; "holds" is sample-relative.
inline RistDerivedReport check_rist_derived_in_H(
    const GroupSpec& g, const Word& v, const SubgroupOracle& h, int scale,
    std::size_t budget = kDefaultBallBudget) {
  require_same_tree(g.tree(), h.tree(), "check_rist_derived_in_H");
  RistBall rb = rist_ball(g, v, scale, budget);
  RistDerivedReport out;
  out.scale = scale;
  for (std::size_t i = 0; i < rb.elems.size(); ++i)
    for (std::size_t j = i + 1; j < rb.elems.size(); ++j) {
      TreeAutomorphism c = commutator(rb.elems[i], rb.elems[j]);
      ++out.pairs_checked;
      if (c.is_identity()) continue;
      if (!h.contains(c)) {
        out.holds = false;
        out.counterexample = std::move(c);
        out.witness = "[" + rb.words[i] + ", " + rb.words[j] + "]";
        return out;
      }
    }
  return out;
}

// Size of the conjugacy class sample {h x h^-1 : |h| <= l} for each l in
// [lo, hi]. Strict growth across the window is evidence against x being an
// FC element.
inline std::vector<std::size_t> conjugate_class_counts(
    const GroupSpec& g, const TreeAutomorphism& x, int lo, int hi,
    std::size_t budget = kDefaultBallBudget) {
  require_same_tree(g.tree(), x.tree(), "conjugate_class_counts");
  if (lo < 0 || hi < lo) throw Error("conjugate_class_counts: bad window");
  Ball ball = enumerate_ball(g, hi, budget);
  AutSet seen;
  std::vector<std::size_t> out;
  std::size_t i = 0;
  for (int r = 0; r <= hi; ++r) {
    while (i < ball.elems.size() && ball.length[i] <= r) {
      seen.insert(conjugate(ball.elems[i], x));
      ++i;
    }
    if (r >= lo) out.push_back(seen.size());
  }
  return out;
}

// With sigma displacing the common support of g1 and g2 off itself, the
// inner commutator collapses: [[g1, sigma], g2] = [g1, g2].
inline bool normal_commutator_identity(const TreeAutomorphism& g1,
                                       const TreeAutomorphism& sigma,
                                       const TreeAutomorphism& g2) {
  return commutator(commutator(g1, sigma), g2) == commutator(g1, g2);
}

}  // namespace branchlab
