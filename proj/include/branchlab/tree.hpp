#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace branchlab {

// Letters at level i range over 0 .. degree(i)-1. A vertex is the word of
// letters on the path from the root; the root is the empty word.
using Letter = std::uint8_t;
using Word = std::vector<Letter>;

constexpr std::uint64_t kDefaultLevelCap = std::uint64_t{1} << 18;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class TreeMismatch : public Error {
 public:
  explicit TreeMismatch(const std::string& what) : Error(what) {}
};

class LevelCapExceeded : public Error {
 public:
  explicit LevelCapExceeded(const std::string& what) : Error(what) {}
};

// Degree schedule of a spherically homogeneous rooted tree. A repeating
// schedule cycles through the whole list forever (constant list = regular
// tree); a non-repeating one describes a tree of finite depth.
class TreeSpec {
 public:
  TreeSpec() : degrees_{2}, repeat_(true) {}

  TreeSpec(std::vector<int> degrees, bool repeat, bool allow_degree_one = false)
      : degrees_(std::move(degrees)), repeat_(repeat) {
    if (degrees_.empty()) throw Error("TreeSpec: empty degree schedule");
    for (int d : degrees_) {
      if (d < 1 || d > 256) throw Error("TreeSpec: degree out of range 1..256");
      if (d < 2 && !allow_degree_one)
        throw Error("TreeSpec: degree 1 requires the degenerate flag");
    }
  }

  bool repeating() const { return repeat_; }

  bool regular() const {
    return repeat_ && std::all_of(degrees_.begin(), degrees_.end(),
                                  [&](int d) { return d == degrees_[0]; });
  }

  std::size_t period() const { return degrees_.size(); }

  // Depth of a non-repeating tree; vertices live at levels 0 .. finite_depth().
  std::size_t finite_depth() const {
    assert(!repeat_ && "finite_depth on repeating schedule");
    return degrees_.size();
  }

  bool level_in_range(std::size_t level) const {
    return repeat_ || level < degrees_.size();
  }

  int degree(std::size_t level) const {
    if (repeat_) return degrees_[level % degrees_.size()];
    if (level >= degrees_.size())
      throw Error("TreeSpec: level beyond finite depth");
    return degrees_[level];
  }

  // The tree as seen from a level-n vertex.
  TreeSpec shifted(std::size_t n) const {
    if (repeat_) {
      std::size_t k = n % degrees_.size();
      std::vector<int> rot(degrees_.begin() + k, degrees_.end());
      rot.insert(rot.end(), degrees_.begin(), degrees_.begin() + k);
      return TreeSpec(std::move(rot), true, true);
    }
    if (n > degrees_.size()) throw Error("TreeSpec: shift beyond finite depth");
    std::vector<int> rest(degrees_.begin() + n, degrees_.end());
    if (rest.empty()) rest.push_back(1);  // leaf subtree, degenerate
    return TreeSpec(std::move(rest), false, true);
  }

  std::uint64_t level_size(std::size_t n,
                           std::uint64_t cap = kDefaultLevelCap) const {
    std::uint64_t s = 1;
    for (std::size_t i = 0; i < n; ++i) {
      s *= static_cast<std::uint64_t>(degree(i));
      if (s > cap) throw LevelCapExceeded("level size exceeds cap");
    }
    return s;
  }

  bool valid_vertex(const Word& v) const {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!level_in_range(i)) return false;
      if (static_cast<int>(v[i]) >= degree(i)) return false;
    }
    return true;
  }

  const std::vector<int>& degrees() const { return degrees_; }

  bool operator==(const TreeSpec& o) const {
    return repeat_ == o.repeat_ && degrees_ == o.degrees_;
  }
  bool operator!=(const TreeSpec& o) const { return !(*this == o); }

 private:
  std::vector<int> degrees_;
  bool repeat_;
};

inline void require_same_tree(const TreeSpec& a, const TreeSpec& b,
                              const char* where) {
  if (a != b) throw TreeMismatch(std::string(where) + ": tree spec mismatch");
}

inline bool is_prefix(const Word& p, const Word& v) {
  return p.size() <= v.size() && std::equal(p.begin(), p.end(), v.begin());
}

inline bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

inline std::string word_str(const Word& v) {
  std::string s;
  s.reserve(v.size());
  for (Letter x : v) {
    if (x < 10)
      s.push_back(static_cast<char>('0' + x));
    else
      s += "[" + std::to_string(static_cast<int>(x)) + "]";
  }
  return s;
}

inline Word parse_word(const std::string& s) {
  Word v;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '[') {
      std::size_t j = s.find(']', i);
      if (j == std::string::npos) throw Error("parse_word: unclosed bracket");
      v.push_back(static_cast<Letter>(std::stoi(s.substr(i + 1, j - i - 1))));
      i = j + 1;
    } else if (s[i] >= '0' && s[i] <= '9') {
      v.push_back(static_cast<Letter>(s[i] - '0'));
      ++i;
    } else {
      throw Error("parse_word: bad character");
    }
  }
  return v;
}

// Cylinders of two vertices meet iff one vertex is a prefix of the other.
enum class CylinderRel { equal, first_inside_second, second_inside_first, disjoint };

inline CylinderRel cylinder_relation(const Word& a, const Word& b) {
  if (a.size() == b.size()) return a == b ? CylinderRel::equal : CylinderRel::disjoint;
  if (a.size() > b.size())
    return is_prefix(b, a) ? CylinderRel::first_inside_second : CylinderRel::disjoint;
  return is_prefix(a, b) ? CylinderRel::second_inside_first : CylinderRel::disjoint;
}

inline bool cylinders_disjoint(const Word& a, const Word& b) {
  return cylinder_relation(a, b) == CylinderRel::disjoint;
}

// Boundary point of an infinite tree, stored as an eventually periodic word
// u v^inf (canonical: period primitive, preperiod minimal), or as a finite
// truncation (empty period) when only a prefix is known.
class Ray {
 public:
  Ray() = default;

  static Ray periodic(const TreeSpec& t, Word preperiod, Word period) {
    if (!t.repeating())
      throw Error("Ray: periodic rays need a repeating schedule");
    if (period.empty()) throw Error("Ray: empty period");
    Ray r;
    r.pre_ = std::move(preperiod);
    r.per_ = std::move(period);
    r.canonicalize();
    r.validate(t);
    return r;
  }

  static Ray truncation(const TreeSpec& t, Word prefix) {
    if (!t.valid_vertex(prefix)) throw Error("Ray: invalid truncation prefix");
    Ray r;
    r.pre_ = std::move(prefix);
    return r;
  }

  bool truncated() const { return per_.empty(); }

  Letter at(std::size_t i) const {
    if (i < pre_.size()) return pre_[i];
    if (truncated()) throw Error("Ray: index beyond truncation depth");
    return per_[(i - pre_.size()) % per_.size()];
  }

  Word prefix(std::size_t n) const {
    Word w;
    w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) w.push_back(at(i));
    return w;
  }

  std::size_t known_depth() const {
    return truncated() ? pre_.size() : SIZE_MAX;
  }

  const Word& preperiod() const { return pre_; }
  const Word& period() const { return per_; }

  bool in_cylinder(const Word& v) const {
    if (truncated() && v.size() > pre_.size())
      throw Error("Ray: cylinder test beyond truncation depth");
    for (std::size_t i = 0; i < v.size(); ++i)
      if (at(i) != v[i]) return false;
    return true;
  }

  std::string str() const {
    if (truncated()) return word_str(pre_) + "...";
    return word_str(pre_) + "(" + word_str(per_) + ")";
  }

  // Formats accepted: "01(10)" and "01" (truncation written "01...").
  static Ray parse(const TreeSpec& t, const std::string& s) {
    auto open = s.find('(');
    if (open == std::string::npos) {
      std::string body = s;
      if (body.size() >= 3 && body.substr(body.size() - 3) == "...")
        body = body.substr(0, body.size() - 3);
      return truncation(t, parse_word(body));
    }
    if (s.back() != ')') throw Error("Ray::parse: expected trailing ')'");
    Word pre = parse_word(s.substr(0, open));
    Word per = parse_word(s.substr(open + 1, s.size() - open - 2));
    return periodic(t, std::move(pre), std::move(per));
  }

  bool operator==(const Ray& o) const { return pre_ == o.pre_ && per_ == o.per_; }
  bool operator!=(const Ray& o) const { return !(*this == o); }
  bool operator<(const Ray& o) const {
    return std::tie(pre_, per_) < std::tie(o.pre_, o.per_);
  }

  void validate(const TreeSpec& t) const {
    for (std::size_t i = 0; i < pre_.size(); ++i)
      if (static_cast<int>(pre_[i]) >= t.degree(i))
        throw Error("Ray: letter out of degree range");
    // The tail letter at period slot j occurs at levels pre+j+k*|per|; degrees
    // repeat with the schedule period, so one lcm block covers all cases.
    if (per_.empty()) return;
    std::size_t block = std::lcm(per_.size(), t.period());
    for (std::size_t off = 0; off < block; ++off) {
      std::size_t level = pre_.size() + off;
      if (static_cast<int>(per_[off % per_.size()]) >= t.degree(level))
        throw Error("Ray: tail letter out of degree range");
    }
  }

 private:
  void canonicalize() {
    // Primitive period: shortest w with per_ = w^k.
    for (std::size_t len = 1; len <= per_.size() / 2; ++len) {
      if (per_.size() % len) continue;
      bool rooted = true;
      for (std::size_t i = len; i < per_.size() && rooted; ++i)
        rooted = per_[i] == per_[i - len];
      if (rooted) {
        per_.resize(len);
        break;
      }
    }
    // Minimal preperiod: u a (v a)^inf = u (a v)^inf.
    while (!pre_.empty() && pre_.back() == per_.back()) {
      pre_.pop_back();
      std::rotate(per_.begin(), per_.end() - 1, per_.end());
    }
  }

  Word pre_, per_;
};

// Finite set of pairwise independent vertices, kept in shortlex order. The
// union of their cylinders is the open set the antichain denotes.
class Antichain {
 public:
  Antichain() = default;

  Antichain(const TreeSpec& t, std::vector<Word> verts) : tree_(t) {
    for (const Word& v : verts)
      if (!t.valid_vertex(v)) throw Error("Antichain: invalid vertex " + word_str(v));
    std::sort(verts.begin(), verts.end(), shortlex_less);
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    for (std::size_t i = 0; i < verts.size(); ++i)
      for (std::size_t j = i + 1; j < verts.size(); ++j)
        if (!cylinders_disjoint(verts[i], verts[j]))
          throw Error("Antichain: vertices " + word_str(verts[i]) + " and " +
                      word_str(verts[j]) + " are comparable");
    verts_ = std::move(verts);
  }

  const TreeSpec& tree() const { return tree_; }
  const std::vector<Word>& vertices() const { return verts_; }
  bool empty() const { return verts_.empty(); }
  std::size_t size() const { return verts_.size(); }

  std::size_t max_depth() const {
    std::size_t d = 0;
    for (const Word& v : verts_) d = std::max(d, v.size());
    return d;
  }

  // Some cylinder of the antichain contains the cylinder at v.
  bool contains_cylinder(const Word& v) const {
    return std::any_of(verts_.begin(), verts_.end(),
                       [&](const Word& u) { return is_prefix(u, v); });
  }

  // The cylinder at v meets the union of the antichain's cylinders.
  bool meets_cylinder(const Word& v) const {
    return std::any_of(verts_.begin(), verts_.end(), [&](const Word& u) {
      return !cylinders_disjoint(u, v);
    });
  }

  bool operator==(const Antichain& o) const { return verts_ == o.verts_; }
  bool operator!=(const Antichain& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < verts_.size(); ++i) {
      if (i) s += ",";
      s += verts_[i].empty() ? "@" : word_str(verts_[i]);
    }
    return s + "}";
  }

 private:
  TreeSpec tree_;
  std::vector<Word> verts_;
};

inline bool cylinders_disjoint(const Antichain& a, const Antichain& b) {
  for (const Word& u : a.vertices())
    for (const Word& v : b.vertices())
      if (!cylinders_disjoint(u, v)) return false;
  return true;
}

// Coarsest antichain whose cylinders partition the complement of the union
// of a's cylinders. The root antichain has empty complement; the empty
// antichain has complement {root}.
inline Antichain complement_antichain(const Antichain& a) {
  const TreeSpec& t = a.tree();
  if (a.empty()) return Antichain(t, {Word{}});
  std::vector<Word> out;
  // Walk the prefix tree of a's vertices; children that leave it head
  // cylinders disjoint from every a-cylinder.
  std::vector<Word> stack{Word{}};
  while (!stack.empty()) {
    Word v = std::move(stack.back());
    stack.pop_back();
    if (a.contains_cylinder(v)) continue;  // inside the union already
    if (!t.level_in_range(v.size())) continue;
    int d = t.degree(v.size());
    for (int x = 0; x < d; ++x) {
      Word c = v;
      c.push_back(static_cast<Letter>(x));
      if (a.meets_cylinder(c))
        stack.push_back(std::move(c));
      else
        out.push_back(std::move(c));
    }
  }
  return Antichain(t, std::move(out));
}

// All level-n vertices, in lexicographic (= shortlex within a level) order.
inline std::vector<Word> level_vertices(const TreeSpec& t, std::size_t n,
                                        std::uint64_t cap = kDefaultLevelCap) {
  t.level_size(n, cap);
  std::vector<Word> out{Word{}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Word> next;
    next.reserve(out.size() * t.degree(i));
    for (const Word& v : out)
      for (int x = 0; x < t.degree(i); ++x) {
        Word c = v;
        c.push_back(static_cast<Letter>(x));
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

// Replace each vertex by all its descendants at the given depth (vertices
// already at or below that depth are kept as they are).
inline Antichain refine_to_depth(const Antichain& a, std::size_t depth) {
  const TreeSpec& t = a.tree();
  std::vector<Word> out;
  for (const Word& v : a.vertices()) {
    if (v.size() >= depth) {
      out.push_back(v);
      continue;
    }
    std::vector<Word> frontier{v};
    while (!frontier.empty() && frontier.front().size() < depth) {
      std::vector<Word> next;
      for (const Word& u : frontier) {
        if (!t.level_in_range(u.size())) { next.push_back(u); continue; }
        for (int x = 0; x < t.degree(u.size()); ++x) {
          Word c = u;
          c.push_back(static_cast<Letter>(x));
          next.push_back(std::move(c));
        }
      }
      frontier = std::move(next);
    }
    out.insert(out.end(), frontier.begin(), frontier.end());
  }
  return Antichain(t, std::move(out));
}

// True iff the cylinder at v is covered by the union of a's cylinders.
inline bool cylinder_covered(const TreeSpec& t, const Word& v,
                             const Antichain& a) {
  if (a.contains_cylinder(v)) return true;
  if (v.size() >= a.max_depth()) return false;
  if (!t.level_in_range(v.size())) return false;
  for (int x = 0; x < t.degree(v.size()); ++x) {
    Word c = v;
    c.push_back(static_cast<Letter>(x));
    if (!cylinder_covered(t, c, a)) return false;
  }
  return true;
}

}  // namespace branchlab
