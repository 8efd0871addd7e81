#pragma once

#include <fstream>

#include "branchlab/group.hpp"
#include "json.hpp"

namespace branchlab {

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(what) {}
};

inline std::vector<std::string> split_dotted(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '.') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Builds a group from its JSON description. Generators are mutually
// recursive states of one automaton; section names may be "e", a generator
// name, or "<name>^-1". Declared involutions and smoke relations are
// verified here, so a loaded group is known to satisfy them.
inline GroupSpec group_from_json(const nlohmann::json& j) {
  try {
    if (!j.contains("name") || !j.contains("tree") || !j.contains("generators"))
      throw SchemaError("group spec needs name, tree, generators");
    const auto& jt = j.at("tree");
    TreeSpec tree(jt.at("degrees").get<std::vector<int>>(),
                  jt.value("repeat", true));
    if (!tree.regular())
      throw SchemaError("group specs are limited to regular trees");
    int deg = tree.degree(0);

    std::vector<std::string> order;
    if (j.contains("generator_order")) {
      order = j.at("generator_order").get<std::vector<std::string>>();
      if (order.size() != j.at("generators").size())
        throw SchemaError("generator_order does not match generators");
    } else {
      for (auto it = j.at("generators").begin(); it != j.at("generators").end();
           ++it)
        order.push_back(it.key());
      std::sort(order.begin(), order.end());
    }

    std::map<std::string, int> base_id;
    int k = static_cast<int>(order.size());
    for (int i = 0; i < k; ++i) {
      if (base_id.count(order[i]))
        throw SchemaError("duplicate generator " + order[i]);
      base_id[order[i]] = 1 + i;
    }
    // Combined table: state 0 is the identity, 1..k the generators,
    // 1+k..2k their formal inverses.
    auto resolve = [&](const std::string& s) -> int {
      if (s == "e") return 0;
      auto it = base_id.find(s);
      if (it != base_id.end()) return it->second;
      if (s.size() > 3 && s.substr(s.size() - 3) == "^-1") {
        auto bt = base_id.find(s.substr(0, s.size() - 3));
        if (bt != base_id.end()) return bt->second + k;
      }
      throw SchemaError("unknown section name " + s);
    };
    auto inv_of = [&](int s) -> int {
      if (s == 0) return 0;
      return s <= k ? s + k : s - k;
    };

    std::vector<AutState> table(1 + 2 * k);
    for (int x = 0; x < deg; ++x) {
      table[0].perm.push_back(static_cast<Letter>(x));
      table[0].next.push_back(0);
    }
    for (const std::string& gname : order) {
      const auto& jg = j.at("generators").at(gname);
      auto perm = jg.at("perm").get<std::vector<int>>();
      auto secs = jg.at("sections").get<std::vector<std::string>>();
      if (static_cast<int>(perm.size()) != deg ||
          static_cast<int>(secs.size()) != deg)
        throw SchemaError("generator " + gname + ": arity != tree degree");
      AutState st;
      std::vector<bool> seen(deg, false);
      for (int p : perm) {
        if (p < 0 || p >= deg || seen[p])
          throw SchemaError("generator " + gname + ": not a permutation");
        seen[p] = true;
        st.perm.push_back(static_cast<Letter>(p));
      }
      for (const std::string& s : secs) st.next.push_back(resolve(s));
      table[base_id[gname]] = std::move(st);
    }
    for (int i = 1; i <= k; ++i) {
      const AutState& s = table[i];
      AutState inv;
      inv.perm.resize(deg);
      inv.next.resize(deg);
      for (int x = 0; x < deg; ++x) {
        inv.perm[s.perm[x]] = static_cast<Letter>(x);
        inv.next[s.perm[x]] = inv_of(s.next[x]);
      }
      table[i + k] = std::move(inv);
    }

    std::vector<std::pair<std::string, TreeAutomorphism>> gens;
    for (const std::string& gname : order)
      gens.emplace_back(gname,
                        TreeAutomorphism::from_states(tree, table, base_id[gname]));
    GroupSpec g(j.at("name").get<std::string>(), tree, std::move(gens));

    if (j.contains("involutions"))
      for (const auto& nm : j.at("involutions")) {
        const TreeAutomorphism& x = g.generator(nm.get<std::string>());
        if (!compose(x, x).is_identity())
          throw SchemaError("declared involution " + nm.get<std::string>() +
                            " does not square to identity");
      }
    if (j.contains("relations_smoke"))
      for (const auto& rel : j.at("relations_smoke")) {
        auto w = rel.get<std::vector<std::string>>();
        if (!g.word(w).is_identity())
          throw SchemaError("smoke relation fails");
      }
    if (j.contains("rist_hints")) {
      GroupSpec::HintTable hints;
      for (auto it = j.at("rist_hints").begin(); it != j.at("rist_hints").end();
           ++it) {
        std::vector<std::vector<std::string>> words;
        for (const auto& entry : it.value()) {
          if (entry.is_string())
            words.push_back(split_dotted(entry.get<std::string>()));
          else
            words.push_back(entry.get<std::vector<std::string>>());
        }
        hints[it.key()] = std::move(words);
      }
      g.set_rist_hints(std::move(hints));
    }
    g.set_level_transitive(j.value("level_transitive", false));
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("group spec: ") + e.what());
  }
}

inline const std::map<std::string, const char*>& builtin_group_sources() {
  static const std::map<std::string, const char*> sources = {
      {"grigorchuk", R"({
        "name": "grigorchuk",
        "tree": {"degrees": [2], "repeat": true},
        "generator_order": ["a", "b", "c", "d"],
        "generators": {
          "a": {"perm": [1, 0], "sections": ["e", "e"]},
          "b": {"perm": [0, 1], "sections": ["a", "c"]},
          "c": {"perm": [0, 1], "sections": ["a", "d"]},
          "d": {"perm": [0, 1], "sections": ["e", "b"]}
        },
        "involutions": ["a", "b", "c", "d"],
        "relations_smoke": [["b", "c", "d"], ["a", "a"], ["b", "b"]],
        "level_transitive": true,
        "rist_hints": {
          "0": ["a.d.a", "b.a.d.a.b.a.d.a"],
          "1": ["d", "a.b.a.d.a.b.a.d"],
          "00": ["b.c.a.d.a.c.a.c.a.c.a.d.a.c.a.c.a.b", "b.a.c.a.c.a.d.a.c.a.c.a.c.a.d.a.c.b"],
          "01": ["c.a.d.a.c.a.c.a.c.a.d.a.c.a.c.a", "a.c.a.c.a.d.a.c.a.c.a.c.a.d.a.c"],
          "10": ["a.b.c.a.d.a.c.a.c.a.c.a.d.a.c.a.c.a.b.a", "a.b.a.c.a.c.a.d.a.c.a.c.a.c.a.d.a.c.b.a"],
          "11": ["a.c.a.d.a.c.a.c.a.c.a.d.a.c.a.c", "c.a.c.a.d.a.c.a.c.a.c.a.d.a.c.a"],
          "000": ["a.b.a.b.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.b.a.b.a", "a.b.a.b.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.b.a.b.a"],
          "001": ["b.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.b", "b.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.b"],
          "010": ["b.a.b.a.b.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.b.a.b.a.b", "b.a.b.a.b.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.b.a.b.a.b"],
          "011": ["c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a", "a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c"],
          "100": ["b.a.b.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.b.a.b", "b.a.b.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.b.a.b"],
          "101": ["a.b.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.b.a", "a.b.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.b.a"],
          "110": ["a.b.a.b.a.b.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.b.a.b.a.b.a", "a.b.a.b.a.b.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.b.a.b.a.b.a"],
          "111": ["a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b", "b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.c.a.c.a.b.a.c.a"],
          "0000": ["b.a.c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c.a.b", "b.a.c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c.a.b"],
          "0001": ["a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a", "a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a"],
          "0010": ["a.b.a.b.a.c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c.a.b.a.b.a", "a.b.a.b.a.c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c.a.b.a.b.a"],
          "0011": ["b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b", "b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b"],
          "0100": ["a.c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c.a", "a.c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c.a"],
          "0101": ["b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b", "b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b"],
          "0110": ["b.a.b.a.b.a.c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c.a.b.a.b.a.b", "b.a.b.a.b.a.c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c.a.b.a.b.a.b"],
          "0111": ["c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a", "a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c"],
          "1000": ["a.b.a.c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c.a.b.a", "a.b.a.c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c.a.b.a"],
          "1001": ["b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b", "b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b"],
          "1010": ["b.a.b.a.c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c.a.b.a.b", "b.a.b.a.c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c.a.b.a.b"],
          "1011": ["a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a", "a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a"],
          "1100": ["c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c", "c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c"],
          "1101": ["a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a", "a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a"],
          "1110": ["a.b.a.b.a.b.a.c.a.b.a.b.a.b.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.b.a.b.a.b.a.c.a.b.a.b.a.b.a", "a.b.a.b.a.b.a.c.a.b.a.b.a.b.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.b.a.b.a.b.a.c.a.b.a.b.a.b.a"],
          "1111": ["a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d", "d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a.b.a.c.a.b.a.c.a.d.a.c.a.b.a.c.a"]
        }
      })"},
      {"adding_machine", R"({
        "name": "adding_machine",
        "tree": {"degrees": [2], "repeat": true},
        "generator_order": ["a"],
        "generators": {
          "a": {"perm": [1, 0], "sections": ["e", "a"]}
        },
        "relations_smoke": [],
        "level_transitive": true
      })"},
      {"gupta_sidki_3", R"({
        "name": "gupta_sidki_3",
        "tree": {"degrees": [3], "repeat": true},
        "generator_order": ["a", "t"],
        "generators": {
          "a": {"perm": [1, 2, 0], "sections": ["e", "e", "e"]},
          "t": {"perm": [0, 1, 2], "sections": ["a", "a^-1", "t"]}
        },
        "relations_smoke": [["a", "a", "a"], ["t", "t", "t"]],
        "level_transitive": true
      })"},
      {"basilica", R"({
        "name": "basilica",
        "tree": {"degrees": [2], "repeat": true},
        "generator_order": ["a", "b"],
        "generators": {
          "a": {"perm": [1, 0], "sections": ["e", "b"]},
          "b": {"perm": [0, 1], "sections": ["e", "a"]}
        },
        "relations_smoke": [],
        "level_transitive": true
      })"},
      {"mirror", R"({
        "name": "mirror",
        "tree": {"degrees": [2], "repeat": true},
        "generator_order": ["m"],
        "generators": {
          "m": {"perm": [1, 0], "sections": ["m", "m"]}
        },
        "involutions": ["m"],
        "relations_smoke": [["m", "m"]],
        "level_transitive": false
      })"}};
  return sources;
}

inline std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [n, src] : builtin_group_sources()) out.push_back(n);
  return out;
}

inline const char* builtin_source(const std::string& name) {
  const auto& sources = builtin_group_sources();
  auto it = sources.find(name);
  if (it == sources.end()) throw Error("no builtin group named " + name);
  return it->second;
}

inline GroupSpec load_builtin(const std::string& name) {
  const auto& sources = builtin_group_sources();
  auto it = sources.find(name);
  if (it == sources.end()) throw Error("no builtin group named " + name);
  return group_from_json(nlohmann::json::parse(it->second));
}

inline GroupSpec load_group_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open group file " + path);
  nlohmann::json j;
  in >> j;
  return group_from_json(j);
}

// CLI convention: a builtin name, else a path to a JSON group spec.
inline GroupSpec resolve_group(const std::string& name_or_path) {
  const auto& sources = builtin_group_sources();
  if (sources.count(name_or_path)) return load_builtin(name_or_path);
  return load_group_file(name_or_path);
}

}  // namespace branchlab
