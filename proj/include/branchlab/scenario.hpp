#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "branchlab/export.hpp"
#include "branchlab/registry.hpp"
#include "json.hpp"

namespace branchlab {

// 0: task completed (inconclusive verdicts included). 2: a definitive
// refutation where the scenario expected confirmation. Errors throw; the
// caller maps them to exit code 1.
struct ScenarioResult {
  int exit_code = 0;
  nlohmann::json report;
  std::vector<std::string> artifacts;

  std::string report_text() const { return report.dump(2) + "\n"; }
};

namespace detail {

inline std::vector<std::vector<std::string>> parse_word_lists(
    const nlohmann::json& j, const char* field) {
  std::vector<std::vector<std::string>> out;
  for (const auto& e : j.at(field)) {
    if (e.is_string())
      out.push_back(split_dotted(e.get<std::string>()));
    else
      out.push_back(e.get<std::vector<std::string>>());
  }
  if (out.empty()) throw Error(std::string("scenario: empty ") + field);
  return out;
}

inline std::vector<TreeAutomorphism> build_elements(
    const GroupSpec& g, const std::vector<std::vector<std::string>>& words) {
  std::vector<TreeAutomorphism> out;
  for (const auto& w : words) out.push_back(g.word(w));
  return out;
}

inline Antichain antichain_from_list(const TreeSpec& t,
                                     const nlohmann::json& j) {
  std::vector<Word> verts;
  for (const auto& s : j) verts.push_back(parse_word(s.get<std::string>()));
  return Antichain(t, std::move(verts));
}

inline SubgroupOracle oracle_from_json(const GroupSpec& g,
                                       const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  const TreeSpec& t = g.tree();
  if (kind == "point_stabilizer")
    return SubgroupOracle::point_stabilizer(
        t, Ray::parse(t, j.at("ray").get<std::string>()));
  if (kind == "germ_stabilizer")
    return SubgroupOracle::germ_stabilizer(
        t, Ray::parse(t, j.at("ray").get<std::string>()));
  if (kind == "rigid_stabilizer")
    return SubgroupOracle::rigid_stabilizer(
        t, parse_word(j.at("vertex").get<std::string>()));
  if (kind == "fixator")
    return SubgroupOracle::fixator(antichain_from_list(t, j.at("antichain")));
  if (kind == "word_list")
    return SubgroupOracle::word_list(g, parse_word_lists(j, "words"),
                                     j.at("scope").get<int>());
  throw Error("scenario: unknown oracle kind " + kind);
}

inline std::vector<SubgroupOracle> oracles_from_json(const GroupSpec& g,
                                                     const nlohmann::json& sc) {
  std::vector<SubgroupOracle> out;
  if (sc.contains("oracle")) out.push_back(oracle_from_json(g, sc["oracle"]));
  if (sc.contains("oracles"))
    for (const auto& jo : sc["oracles"])
      out.push_back(oracle_from_json(g, jo));
  if (out.empty()) throw Error("scenario: no oracle given");
  return out;
}

inline int require_positive(const nlohmann::json& sc, const char* field) {
  int v = sc.at(field).get<int>();
  if (v <= 0) throw Error(std::string("scenario: ") + field +
                          " must be positive");
  return v;
}

inline std::string scaled(const std::string& claim, const std::string& scope) {
  return claim + " (" + scope + ")";
}

// Graph artifact in the requested format; json reports embed the graph.
inline void emit_graph(const LabeledGraph& graph, const std::string& name,
                       const nlohmann::json& sc, ScenarioResult& res) {
  std::string format = sc.value("format", "json");
  if (format == "dot")
    res.report["artifact"] = to_dot(graph, name);
  else if (format == "json")
    res.report["artifact"] = to_json(graph);
  else
    throw Error("scenario: unsupported graph format " + format);
}

}  // namespace detail

inline ScenarioResult run_scenario(const nlohmann::json& sc) {
  std::string task = sc.at("task").get<std::string>();
  GroupSpec g = resolve_group(sc.at("group").get<std::string>());
  const TreeSpec& t = g.tree();

  ScenarioResult res;
  res.report["task"] = task;
  res.report["group"] = g.name();
  res.report["seed"] = sc.value("seed", 0);  // reserved; no search here is
                                             // randomized
  std::vector<std::string> verdicts;
  bool expect_confirmed = sc.value("expect", "") == std::string("confirmed");
  bool refuted = false;

  if (task == "schreier") {
    int level = detail::require_positive(sc, "level");
    LabeledGraph graph = level_schreier(g, level);
    res.report["vertices"] = graph.num_vertices();
    res.report["edges"] = graph.num_edges();
    detail::emit_graph(graph, g.name() + "_schreier" + std::to_string(level),
                       sc, res);
    verdicts.push_back(detail::scaled(
        "level graph exact", "level " + std::to_string(level)));
  } else if (task == "cayley") {
    int radius = detail::require_positive(sc, "radius");
    LabeledGraph graph = cayley_ball(g, radius);
    res.report["vertices"] = graph.num_vertices();
    res.report["edges"] = graph.num_edges();
    detail::emit_graph(graph, g.name() + "_cayley", sc, res);
    verdicts.push_back(detail::scaled("ball exact",
                                      "radius " + std::to_string(radius)));
  } else if (task == "germ") {
    int radius = detail::require_positive(sc, "radius");
    Ray x = Ray::parse(t, sc.at("ray").get<std::string>());
    GermBallResult gb = germ_ball(g, x, radius);
    CoveringCheck cc = covering_check(gb);
    res.report["germ_vertices"] = gb.germ.num_vertices();
    res.report["orbital_vertices"] = gb.orbital.num_vertices();
    res.report["covering_ok"] = cc.ok;
    res.report["covering_detail"] = cc.detail;
    res.report["projection"] = gb.projection;
    detail::emit_graph(gb.germ, g.name() + "_germ", sc, res);
    if (!cc.ok) refuted = true;
    verdicts.push_back(detail::scaled(
        cc.ok ? "germ projection is a covering morphism"
              : "germ projection fails: " + cc.detail,
        "radius " + std::to_string(radius) + " at " + x.str()));
  } else if (task == "orbital") {
    int radius = detail::require_positive(sc, "radius");
    Ray x = Ray::parse(t, sc.at("ray").get<std::string>());
    LabeledGraph graph = orbital_ball(g, x, radius);
    res.report["vertices"] = graph.num_vertices();
    res.report["edges"] = graph.num_edges();
    detail::emit_graph(graph, g.name() + "_orbital", sc, res);
    verdicts.push_back(detail::scaled(
        "orbit ball exact",
        "radius " + std::to_string(radius) + " at " + x.str()));
  } else if (task == "growth") {
    int radius = detail::require_positive(sc, "radius");
    Ray x = Ray::parse(t, sc.at("ray").get<std::string>());
    // Centers away from the base need slack to have full balls; default to
    // twice the fit window.
    int ball_radius = sc.contains("ball_radius")
                          ? detail::require_positive(sc, "ball_radius")
                          : 2 * radius;
    if (ball_radius < radius)
      throw Error("scenario: ball_radius below the fit radius");
    LabeledGraph graph = orbital_ball(g, x, ball_radius);
    GrowthTable table = graph_growth(graph, radius);
    res.report["growth"] = to_json(table);
    res.report["artifact"] = growth_csv(table);
    if (sc.value("fit", true)) {
      LeudBound fit = leud_upper(table);
      res.report["fitted_degree"] = fit.bound;
      res.report["fit_note"] = fit.justification;
      verdicts.push_back(detail::scaled(
          "growth degree " + std::to_string(fit.bound), fit.justification));
    }
  } else if (task == "cutset") {
    int radius = detail::require_positive(sc, "radius");
    Ray x = Ray::parse(t, sc.at("ray").get<std::string>());
    std::size_t bound = detail::require_positive(sc, "bound");
    std::size_t chain =
        sc.contains("chain") ? detail::require_positive(sc, "chain") : 3;
    LabeledGraph graph = orbital_ball(g, x, radius);
    CutChain c = cut_set_sequence(graph, bound, chain);
    res.report["found"] = c.found;
    res.report["sets"] = c.sets;
    res.report["boundaries"] = c.boundaries;
    res.report["note"] = c.note;
    if (c.found) {
      LeudBound lb = leud_upper(c);
      res.report["leud_bound"] = lb.bound;
      verdicts.push_back(detail::scaled(
          "linear evidence: " + lb.justification,
          "bound " + std::to_string(bound) + ", radius " +
              std::to_string(radius)));
    } else {
      verdicts.push_back(detail::scaled(
          "no bounded cut-set chain: " + c.note,
          "bound " + std::to_string(bound) + ", radius " +
              std::to_string(radius)));
    }
  } else if (task == "confine") {
    std::string mode = sc.value("mode", "check");
    int scale = detail::require_positive(sc, "scale");
    auto p = detail::build_elements(g, detail::parse_word_lists(sc, "p"));
    auto oracles = detail::oracles_from_json(g, sc);
    if (mode == "check") {
      ConfiningReport r = check_confining(p, oracles, g, scale);
      res.report["confining"] = to_json(r);
      if (!r.confirmed) refuted = true;
      verdicts.push_back(detail::scaled(
          r.confirmed ? "confining confirmed" : "confining refuted",
          "scale " + std::to_string(scale) + ", ball " +
              std::to_string(r.ball_size)));
    } else if (mode == "refine") {
      RefineReport r = refine_confining(p, oracles, g, scale);
      res.report["ok"] = r.ok;
      res.report["changed"] = r.changed;
      res.report["words"] = r.words;
      res.report["note"] = r.note;
      res.report["recheck"] = to_json(r.recheck);
      res.report["refined"] = elements_json(r.refined);
      if (!r.ok) refuted = true;
      verdicts.push_back(detail::scaled(
          r.ok ? "refined set confining" : "refinement failed: " + r.note,
          "scale " + std::to_string(scale)));
    } else {
      throw Error("scenario: unknown confine mode " + mode);
    }
  } else if (task == "displace") {
    std::string mode = sc.value("mode", "verify");
    auto p = detail::build_elements(g, detail::parse_word_lists(sc, "p"));
    if (mode == "build") {
      int depth = sc.contains("depth") ? detail::require_positive(sc, "depth")
                                       : 6;
      DisplacementConfig cfg = build_displacement(p, depth);
      nlohmann::json omegas = nlohmann::json::array();
      for (const Antichain& a : cfg.omega) omegas.push_back(to_json(a));
      res.report["omega"] = omegas;
      res.report["verified"] = cfg.verified;
      verdicts.push_back(detail::scaled("displacement configuration built",
                                        "depth budget " +
                                            std::to_string(depth)));
    } else if (mode == "verify") {
      DisplacementConfig cfg;
      cfg.p = p;
      for (const auto& ja : sc.at("omega"))
        cfg.omega.push_back(detail::antichain_from_list(t, ja));
      DisplacementCheck chk = verify_displacement(cfg);
      res.report["check"] = to_json(chk);
      if (!chk.ok) refuted = true;
      verdicts.push_back(detail::scaled(
          chk.ok ? "displacement conditions hold"
                 : "displacement conditions fail",
          std::to_string(p.size()) + " elements"));
    } else {
      throw Error("scenario: unknown displace mode " + mode);
    }
  } else if (task == "engine") {
    int scale = detail::require_positive(sc, "scale");
    int depth = sc.contains("depth") ? detail::require_positive(sc, "depth")
                                     : 6;
    auto p = detail::build_elements(g, detail::parse_word_lists(sc, "p"));
    auto oracles = detail::oracles_from_json(g, sc);
    if (sc.value("refine", true)) {
      RefineReport rr = refine_confining(p, oracles, g, scale);
      if (!rr.ok) {
        res.report["refine_note"] = rr.note;
        res.report["conclusive"] = false;
        refuted = true;
        verdicts.push_back(detail::scaled("refinement failed: " + rr.note,
                                          "scale " + std::to_string(scale)));
      } else {
        p = rr.refined;
        res.report["refine_note"] = rr.note.empty() ? "refined" : rr.note;
      }
    }
    if (!refuted) {
      DisplacementConfig cfg = build_displacement(p, depth);
      verify_displacement(cfg);
      EngineReport rep = commutator_engine(cfg, oracles, g, scale);
      res.report["engine"] = to_json(rep);
      res.report["conclusive"] = rep.conclusive;
      verdicts.push_back(detail::scaled(
          rep.conclusive ? "engine ledger all-pass" : "engine " + rep.note,
          "scale " + std::to_string(scale) + ", |N| " +
              std::to_string(rep.n_generators.size())));
    }
  } else if (task == "urs") {
    std::string mode = sc.at("mode").get<std::string>();
    if (mode == "fingerprint") {
      int level = detail::require_positive(sc, "level");
      if (sc.contains("set")) {
        const nlohmann::json& js = sc["set"];
        std::string kind = js.at("kind").get<std::string>();
        ClosedSetSpec set = [&] {
          if (kind == "complement_of")
            return ClosedSetSpec::complement_of(
                detail::antichain_from_list(t, js.at("antichain")));
          if (kind == "rays") {
            std::vector<Ray> rays;
            for (const auto& s : js.at("rays"))
              rays.push_back(Ray::parse(t, s.get<std::string>()));
            return ClosedSetSpec::rays(t, rays);
          }
          if (kind == "subtree")
            return ClosedSetSpec::subtree(
                t, js.at("widths").get<std::vector<int>>());
          throw Error("scenario: unknown set kind " + kind);
        }();
        Fingerprint fp = empty_cylinder_fingerprint(set, level);
        res.report["fingerprint"] = to_json(fp);
        verdicts.push_back(detail::scaled(
            "fingerprint exact", "level " + std::to_string(level)));
      } else {
        int scale = detail::require_positive(sc, "scale");
        auto oracles = detail::oracles_from_json(g, sc);
        std::string kind = sc.value("kind", "fix_level");
        FingerprintApprox fa =
            kind == "rist_containment"
                ? rist_containment_fingerprint(g, oracles.at(0), level, scale)
                : fix_level(g, oracles.at(0), level, scale);
        res.report["fingerprint"] = to_json(fa);
        verdicts.push_back(detail::scaled(
            kind + " " + fa.direction + "-approximation",
            "level " + std::to_string(level) + ", scale " +
                std::to_string(scale)));
      }
    } else if (mode == "orbit") {
      const nlohmann::json& sets = sc.at("level_sets");
      if (sets.size() != 2) throw Error("scenario: orbit needs two sets");
      int level = detail::require_positive(sc, "level");
      auto mk = [&](const nlohmann::json& ja) {
        std::vector<Word> vs;
        for (const auto& s : ja) vs.push_back(parse_word(s.get<std::string>()));
        return Fingerprint(t, level, std::move(vs));
      };
      bool equal = subset_orbit_equal(g, mk(sets[0]), mk(sets[1]));
      res.report["equal"] = equal;
      if (!equal) refuted = true;
      verdicts.push_back(detail::scaled(
          equal ? "orbit equal" : "orbit distinct",
          "level " + std::to_string(level) + ", exact search"));
    } else if (mode == "sandwich") {
      int level = detail::require_positive(sc, "level");
      int scale = detail::require_positive(sc, "scale");
      auto oracles = detail::oracles_from_json(g, sc);
      SandwichReport r = sandwich_check(g, oracles.at(0), level, scale);
      res.report["sandwich"] = to_json(r);
      if (!r.pass()) refuted = true;
      verdicts.push_back(detail::scaled(
          r.pass() ? "sandwich holds" : "sandwich fails",
          "level " + std::to_string(level) + ", scale " +
              std::to_string(scale)));
    } else {
      throw Error("scenario: unknown urs mode " + mode);
    }
  } else if (task == "bratteli") {
    BratteliDiagram d = sc.at("diagram").is_string()
                            ? load_diagram(sc["diagram"].get<std::string>())
                            : diagram_from_json(sc.at("diagram"));
    std::size_t horizon = detail::require_positive(sc, "horizon");
    const TreeAutomorphism& el = g.generator(
        sc.at("element").get<std::string>());
    SingularityProfile p = singularity_profile(d, el, horizon);
    res.report["profile"] = to_json(p);
    res.report["artifact"] = profile_csv(p);
    verdicts.push_back(detail::scaled(
        "singularity counts " + p.verdict,
        "horizon " + std::to_string(horizon) + ", sup " +
            std::to_string(p.sup)));
  } else {
    throw Error("scenario: unknown task " + task);
  }

  res.report["verdicts"] = verdicts;
  if (expect_confirmed && refuted) res.exit_code = 2;

  if (sc.contains("out")) {
    std::string path = sc["out"].get<std::string>();
    if (res.report.contains("artifact") && res.report["artifact"].is_string())
      write_text_file(path, res.report["artifact"].get<std::string>());
    else
      write_text_file(path, res.report.dump(2) + "\n");
    res.artifacts.push_back(path);
    res.report["artifacts"] = res.artifacts;
  }
  return res;
}

inline ScenarioResult run_scenario_text(const std::string& text) {
  nlohmann::json sc;
  try {
    sc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scenario parse: ") + e.what());
  }
  try {
    return run_scenario(sc);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scenario schema: ") + e.what());
  }
}

inline ScenarioResult run_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return run_scenario_text(text);
}

}  // namespace branchlab
