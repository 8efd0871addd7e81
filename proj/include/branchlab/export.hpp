#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "branchlab/bratteli.hpp"
#include "branchlab/confinement.hpp"
#include "branchlab/graph.hpp"
#include "branchlab/urs.hpp"
#include "json.hpp"

namespace branchlab {

// Six significant digits; every float leaving the library goes through here
// so identical inputs export byte-identical artifacts.
inline std::string fmt_float(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline const char* dot_color(int label) {
  static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                  "#66a61e", "#e6ab02", "#a6761d", "#666666"};
  return palette[label % 8];
}

}  // namespace detail

// One node per vertex, one arrow per stored directed edge, generators
// color-coded. Vertex and edge order follow the graph's canonical BFS
// numbering, so equal graphs print byte-identically.
inline std::string to_dot(const LabeledGraph& g,
                          const std::string& name = "G") {
  std::string out = "digraph \"" + detail::dot_escape(name) + "\" {\n";
  for (std::size_t v = 0; v < g.num_vertices(); ++v) {
    out += "  n" + std::to_string(v) + " [label=\"" +
           detail::dot_escape(g.vertex_labels[v]) + "\"";
    if (static_cast<int>(v) == g.base) out += ", peripheries=2";
    out += "];\n";
  }
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    for (const auto& [l, t] : g.adj[v])
      out += "  n" + std::to_string(v) + " -> n" + std::to_string(t) +
             " [label=\"" + detail::dot_escape(g.edge_labels[l]) +
             "\", color=\"" + detail::dot_color(l) + "\"];\n";
  out += "}\n";
  return out;
}

inline std::string growth_csv(const GrowthTable& t) {
  std::string out = "radius,max_ball,min_ball,base_ball\n";
  for (const GrowthRow& r : t.rows)
    out += std::to_string(r.radius) + "," + std::to_string(r.max_ball) + "," +
           std::to_string(r.min_ball) + "," + std::to_string(r.base_ball) +
           "\n";
  return out;
}

inline std::string profile_csv(const SingularityProfile& p) {
  std::string out = "level,vertex,A_v\n";
  for (std::size_t n = 0; n < p.counts.size(); ++n)
    for (std::size_t v = 0; v < p.counts[n].size(); ++v)
      out += std::to_string(n) + "," + std::to_string(v) + "," +
             std::to_string(p.counts[n][v]) + "\n";
  return out;
}

// nlohmann objects keep keys sorted, so dump() of anything assembled below
// is deterministic.

inline nlohmann::json to_json(const TreeSpec& t) {
  std::vector<int> degrees;
  for (std::size_t i = 0; i < t.period(); ++i)
    degrees.push_back(t.degree(i));
  return {{"degrees", degrees}, {"repeat", t.repeating()}};
}

inline TreeSpec tree_from_json(const nlohmann::json& j) {
  return TreeSpec(j.at("degrees").get<std::vector<int>>(),
                  j.value("repeat", true));
}

inline nlohmann::json to_json(const TreeAutomorphism& g) {
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t s = 0; s < g.num_states(); ++s) {
    const std::vector<Letter>& perm = g.perm_at(static_cast<int>(s));
    std::vector<int> ps, ns;
    for (std::size_t x = 0; x < perm.size(); ++x) {
      ps.push_back(perm[x]);
      ns.push_back(g.next_at(static_cast<int>(s), static_cast<Letter>(x)));
    }
    states.push_back({{"perm", ps}, {"next", ns}});
  }
  return {{"states", states}};
}

inline TreeAutomorphism automorphism_from_json(const TreeSpec& t,
                                               const nlohmann::json& j) {
  std::vector<AutState> sts;
  for (const auto& js : j.at("states")) {
    AutState s;
    for (int x : js.at("perm")) s.perm.push_back(static_cast<Letter>(x));
    for (int n : js.at("next")) s.next.push_back(n);
    sts.push_back(std::move(s));
  }
  return TreeAutomorphism::from_states(t, std::move(sts), 0);
}

inline nlohmann::json to_json(const Antichain& a) {
  std::vector<std::string> verts;
  for (const Word& v : a.vertices()) verts.push_back(word_str(v));
  return {{"vertices", verts}};
}

inline Antichain antichain_from_json(const TreeSpec& t,
                                     const nlohmann::json& j) {
  std::vector<Word> verts;
  for (const auto& s : j.at("vertices"))
    verts.push_back(parse_word(s.get<std::string>()));
  return Antichain(t, std::move(verts));
}

inline nlohmann::json to_json(const Fingerprint& f) {
  std::vector<std::string> members;
  for (const Word& v : f.members()) members.push_back(word_str(v));
  return {{"level", f.level()},
          {"size", f.members().size()},
          {"members", members},
          {"bitset", f.bitset_string()}};
}

inline nlohmann::json to_json(const FingerprintApprox& f) {
  nlohmann::json j = to_json(f.fp);
  j["direction"] = f.direction;
  j["scale"] = f.scale;
  return j;
}

inline nlohmann::json to_json(const LedgerEntry& e) {
  return {{"check", e.check}, {"pass", e.pass}, {"detail", e.detail}};
}

inline nlohmann::json ledger_json(const std::vector<LedgerEntry>& ledger) {
  nlohmann::json out = nlohmann::json::array();
  for (const LedgerEntry& e : ledger) out.push_back(to_json(e));
  return out;
}

inline nlohmann::json to_json(const ConfiningReport& r) {
  nlohmann::json j = {{"confirmed", r.confirmed},
                      {"scale", r.scale},
                      {"ball_size", r.ball_size},
                      {"ball_complete", r.ball_complete}};
  if (r.refuting_word) j["refuting_word"] = *r.refuting_word;
  return j;
}

inline nlohmann::json to_json(const DisplacementCheck& c) {
  return {{"ok", c.ok},
          {"failures", c.failures},
          {"moved", c.moved},
          {"fixed", c.fixed}};
}

inline nlohmann::json to_json(const GrowthTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const GrowthRow& r : t.rows)
    rows.push_back({{"radius", r.radius},
                    {"max_ball", r.max_ball},
                    {"min_ball", r.min_ball},
                    {"base_ball", r.base_ball}});
  return {{"rows", rows}};
}

inline nlohmann::json to_json(const SandwichReport& r) {
  return {{"fixed", to_json(r.fixed)},
          {"unfixed", to_json(r.unfixed)},
          {"ledger", ledger_json(r.ledger)},
          {"lower_pass", r.lower_pass},
          {"upper_pass", r.upper_pass},
          {"pass", r.pass()}};
}

inline nlohmann::json to_json(const SingularityProfile& p) {
  nlohmann::json j = {{"counts", p.counts},
                      {"verdict", p.verdict},
                      {"sup", p.sup},
                      {"exact", p.exact},
                      {"note", p.note}};
  if (!p.activity.empty()) j["activity"] = p.activity;
  return j;
}

inline nlohmann::json elements_json(const std::vector<TreeAutomorphism>& es) {
  nlohmann::json out = nlohmann::json::array();
  for (const TreeAutomorphism& e : es) out.push_back(to_json(e));
  return out;
}

inline std::vector<TreeAutomorphism> elements_from_json(
    const TreeSpec& t, const nlohmann::json& j) {
  std::vector<TreeAutomorphism> out;
  for (const auto& je : j) out.push_back(automorphism_from_json(t, je));
  return out;
}

inline nlohmann::json to_json(const EngineReport& r) {
  nlohmann::json j;
  j["tree"] = to_json(r.omega_sigma.tree());
  j["scale"] = r.scale;
  j["sigma"] = r.sigma;
  j["oracle"] = r.oracle;
  j["omega_sigma"] = to_json(r.omega_sigma);
  j["moved"] = r.moved;
  j["fixed"] = r.fixed;
  nlohmann::json rgens = nlohmann::json::array();
  for (const auto& [name, word] : r.r_generators)
    rgens.push_back({{"name", name}, {"word", word}});
  j["r_generators"] = rgens;
  j["y_words"] = r.y_words;
  j["y"] = elements_json(r.y);
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [d, g] : r.pairs) pairs.push_back({d, g});
  j["pairs"] = pairs;
  j["a"] = elements_json(r.a);
  j["d"] = elements_json(r.d);
  j["lambdas"] = r.lambdas;
  j["b"] = elements_json(r.b);
  j["b_lambda"] = r.b_lambda;
  if (r.h0) j["h0"] = to_json(*r.h0);
  j["h0_source"] = r.h0_source;
  j["rho"] = r.rho;
  j["n_generators"] = elements_json(r.n_generators);
  j["ledger"] = ledger_json(r.ledger);
  j["conclusive"] = r.conclusive;
  j["note"] = r.note;
  return j;
}

inline EngineReport engine_report_from_json(const nlohmann::json& j) {
  EngineReport r;
  TreeSpec t = tree_from_json(j.at("tree"));
  r.scale = j.at("scale").get<int>();
  r.sigma = j.at("sigma").get<int>();
  r.oracle = j.at("oracle").get<int>();
  r.omega_sigma = antichain_from_json(t, j.at("omega_sigma"));
  r.moved = j.at("moved").get<std::vector<int>>();
  r.fixed = j.at("fixed").get<std::vector<int>>();
  for (const auto& je : j.at("r_generators"))
    r.r_generators.emplace_back(je.at("name").get<std::string>(),
                                je.at("word").get<std::string>());
  r.y_words = j.at("y_words").get<std::vector<std::string>>();
  r.y = elements_from_json(t, j.at("y"));
  for (const auto& je : j.at("pairs"))
    r.pairs.emplace_back(je.at(0).get<int>(), je.at(1).get<int>());
  r.a = elements_from_json(t, j.at("a"));
  r.d = elements_from_json(t, j.at("d"));
  r.lambdas = j.at("lambdas").get<std::vector<int>>();
  r.b = elements_from_json(t, j.at("b"));
  r.b_lambda = j.at("b_lambda").get<std::vector<int>>();
  if (j.contains("h0")) r.h0 = automorphism_from_json(t, j.at("h0"));
  r.h0_source = j.at("h0_source").get<std::string>();
  r.rho = j.at("rho").get<int>();
  r.n_generators = elements_from_json(t, j.at("n_generators"));
  for (const auto& je : j.at("ledger"))
    r.ledger.push_back({je.at("check").get<std::string>(),
                        je.at("pass").get<bool>(),
                        je.at("detail").get<std::string>()});
  r.conclusive = j.at("conclusive").get<bool>();
  r.note = j.at("note").get<std::string>();
  return r;
}

inline nlohmann::json to_json(const LabeledGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t v = 0; v < g.num_vertices(); ++v)
    for (const auto& [l, t] : g.adj[v])
      edges.push_back({static_cast<int>(v), l, t});
  return {{"vertices", g.vertex_labels},
          {"edge_labels", g.edge_labels},
          {"base", g.base},
          {"completeness_radius", g.completeness_radius},
          {"edges", edges}};
}

}  // namespace branchlab
