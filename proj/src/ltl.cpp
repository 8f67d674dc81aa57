#include "cpwa/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <json.hpp>
#include <map>
#include <set>

namespace cpwa {

namespace {

FormulaPtr mk(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

FormulaPtr mk_const(bool v) {
  Formula f;
  f.kind = v ? Formula::Kind::True : Formula::Kind::False;
  return mk(std::move(f));
}

FormulaPtr mk_atom(std::string name) {
  Formula f;
  f.kind = Formula::Kind::Atom;
  f.atom = std::move(name);
  return mk(std::move(f));
}

FormulaPtr mk_unary(Formula::Kind k, FormulaPtr c, int k1 = 0, int k2 = 0) {
  Formula f;
  f.kind = k;
  f.k1 = k1;
  f.k2 = k2;
  f.children = {std::move(c)};
  return mk(std::move(f));
}

FormulaPtr mk_binary(Formula::Kind k, FormulaPtr a, FormulaPtr b, int k1 = 0,
                     int k2 = 0) {
  Formula f;
  f.kind = k;
  f.k1 = k1;
  f.k2 = k2;
  f.children = {std::move(a), std::move(b)};
  return mk(std::move(f));
}

}  // namespace

bool Formula::equals(const Formula& other) const {
  if (kind != other.kind || atom != other.atom || k1 != other.k1 ||
      k2 != other.k2 || children.size() != other.children.size())
    return false;
  for (std::size_t i = 0; i < children.size(); ++i)
    if (!children[i]->equals(*other.children[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parser. Precedence: ! (and prefix F/G) > U > & > |.
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("formula parse error at position " + std::to_string(pos) +
                      ": " + msg);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected identifier");
    return text.substr(start, pos - start);
  }

  int number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos == start) fail("expected nonnegative integer bound");
    return std::stoi(text.substr(start, pos - start));
  }

  std::pair<int, int> window() {
    if (!eat('[')) fail("expected '[' after temporal operator");
    const int a = number();
    if (!eat(',')) fail("expected ',' in window");
    const int b = number();
    if (!eat(']')) fail("expected ']' closing window");
    if (a > b)
      fail("reversed window [" + std::to_string(a) + "," + std::to_string(b) + "]");
    return {a, b};
  }

  // Lookahead: does an identifier start here and is it exactly `kw`
  // followed by '['?
  bool temporal_kw(char kw) {
    skip_ws();
    return pos + 1 < text.size() && text[pos] == kw && text[pos + 1] == '[';
  }

  FormulaPtr parse_unary() {
    if (eat('!')) return mk_unary(Formula::Kind::Not, parse_unary());
    if (temporal_kw('F')) {
      ++pos;
      auto [a, b] = window();
      return mk_unary(Formula::Kind::Eventually, parse_unary(), a, b);
    }
    if (temporal_kw('G')) {
      ++pos;
      auto [a, b] = window();
      return mk_unary(Formula::Kind::Always, parse_unary(), a, b);
    }
    if (eat('(')) {
      FormulaPtr f = parse_or();
      if (!eat(')')) fail("expected ')'");
      return f;
    }
    const std::string name = ident();
    if (name == "true") return mk_const(true);
    if (name == "false") return mk_const(false);
    return mk_atom(name);
  }

  FormulaPtr parse_until() {
    FormulaPtr left = parse_unary();
    while (temporal_kw('U')) {
      ++pos;
      auto [a, b] = window();
      left = mk_binary(Formula::Kind::Until, std::move(left), parse_unary(), a, b);
    }
    return left;
  }

  FormulaPtr parse_and() {
    FormulaPtr left = parse_until();
    while (eat('&'))
      left = mk_binary(Formula::Kind::And, std::move(left), parse_until());
    return left;
  }

  FormulaPtr parse_or() {
    FormulaPtr left = parse_and();
    while (eat('|'))
      left = mk_binary(Formula::Kind::Or, std::move(left), parse_and());
    return left;
  }
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) {
  Parser p(text);
  FormulaPtr f = p.parse_or();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return f;
}

std::string to_string(const FormulaPtr& f) {
  using K = Formula::Kind;
  auto win = [&] {
    return "[" + std::to_string(f->k1) + "," + std::to_string(f->k2) + "]";
  };
  switch (f->kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Atom: return f->atom;
    case K::Not: return "!" + to_string(f->children[0]);
    case K::And:
      return "(" + to_string(f->children[0]) + " & " + to_string(f->children[1]) + ")";
    case K::Or:
      return "(" + to_string(f->children[0]) + " | " + to_string(f->children[1]) + ")";
    case K::Until:
      return "(" + to_string(f->children[0]) + " U" + win() + " " +
             to_string(f->children[1]) + ")";
    case K::Eventually: return "F" + win() + " " + to_string(f->children[0]);
    case K::Always: return "G" + win() + " " + to_string(f->children[0]);
  }
  return "";
}

int max_time_index(const FormulaPtr& f) {
  using K = Formula::Kind;
  switch (f->kind) {
    case K::True:
    case K::False:
    case K::Atom: return 0;
    case K::Not: return max_time_index(f->children[0]);
    case K::And:
    case K::Or:
      return std::max(max_time_index(f->children[0]),
                      max_time_index(f->children[1]));
    case K::Until: {
      const int m1 = max_time_index(f->children[0]);
      const int m2 = max_time_index(f->children[1]);
      int idx = f->k2 + m2;
      if (f->k2 > 0) idx = std::max(idx, f->k2 - 1 + m1);
      return idx;
    }
    case K::Eventually: return f->k2 + max_time_index(f->children[0]);
    case K::Always: return f->k2 + max_time_index(f->children[0]);
  }
  return 0;
}

std::vector<std::string> collect_atoms(const FormulaPtr& f) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
    if (g->kind == Formula::Kind::Atom) {
      if (seen.insert(g->atom).second) out.push_back(g->atom);
    }
    for (const auto& c : g->children) walk(c);
  };
  walk(f);
  return out;
}

namespace {

int atom_index(const std::vector<std::string>& order, const std::string& name) {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == name) return static_cast<int>(i);
  throw ConfigError("formula atom '" + name + "' not in atom order");
}

bool eval_at(const FormulaPtr& f, const Word& w, std::size_t pos,
             const std::vector<std::string>& order) {
  using K = Formula::Kind;
  switch (f->kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Atom: {
      if (pos >= w.size())
        throw ConfigError("evaluate_word: word too short to decide formula");
      return (w[pos] >> atom_index(order, f->atom)) & 1u;
    }
    case K::Not: return !eval_at(f->children[0], w, pos, order);
    case K::And:
      return eval_at(f->children[0], w, pos, order) &&
             eval_at(f->children[1], w, pos, order);
    case K::Or:
      return eval_at(f->children[0], w, pos, order) ||
             eval_at(f->children[1], w, pos, order);
    case K::Until: {
      for (int k = f->k1; k <= f->k2; ++k) {
        if (eval_at(f->children[1], w, pos + k, order)) {
          bool ok = true;
          for (int j = 0; j < k && ok; ++j)
            ok = eval_at(f->children[0], w, pos + j, order);
          if (ok) return true;
        }
      }
      return false;
    }
    case K::Eventually: {
      for (int k = f->k1; k <= f->k2; ++k)
        if (eval_at(f->children[0], w, pos + k, order)) return true;
      return false;
    }
    case K::Always: {
      for (int k = f->k1; k <= f->k2; ++k)
        if (!eval_at(f->children[0], w, pos + k, order)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

bool evaluate_word(const FormulaPtr& f, const Word& w,
                   const std::vector<std::string>& atom_order) {
  if (static_cast<int>(w.size()) <= max_time_index(f))
    throw ConfigError("evaluate_word: word too short to decide formula");
  return eval_at(f, w, 0, atom_order);
}

// ---------------------------------------------------------------------------
// DFA construction: canonical residual formulas under letter derivatives.
// Bounded windows whose end saturates the remaining horizon are rewritten to
// open-ended form (k2 = kInf), which makes residuals depth-independent and
// lets the minimizer collapse the horizon-counting chain.
// ---------------------------------------------------------------------------

namespace {

constexpr int kInf = std::numeric_limits<int>::max();

struct CF;
using CFP = std::shared_ptr<const CF>;

// Canonical form: True/False/Atom/Not/And/Or/Until only, with n-ary sorted
// And/Or and a precomputed structural key.
struct CF {
  enum class K { True, False, Atom, Not, And, Or, Until };
  K k;
  int atom = -1;
  int k1 = 0, k2 = 0;
  std::vector<CFP> kids;
  std::string key;
};

CFP cf_make(CF node) {
  std::string key;
  switch (node.k) {
    case CF::K::True: key = "T"; break;
    case CF::K::False: key = "F"; break;
    case CF::K::Atom: key = "a" + std::to_string(node.atom); break;
    case CF::K::Not: key = "!(" + node.kids[0]->key + ")"; break;
    case CF::K::And:
    case CF::K::Or: {
      key = node.k == CF::K::And ? "&(" : "|(";
      for (const auto& c : node.kids) key += c->key + ",";
      key += ")";
      break;
    }
    case CF::K::Until:
      key = "U" + std::to_string(node.k1) + "," +
            (node.k2 == kInf ? std::string("inf") : std::to_string(node.k2)) +
            "(" + node.kids[0]->key + "," + node.kids[1]->key + ")";
      break;
  }
  node.key = std::move(key);
  return std::make_shared<const CF>(std::move(node));
}

const CFP& cf_true() {
  static CFP v = cf_make({CF::K::True});
  return v;
}
const CFP& cf_false() {
  static CFP v = cf_make({CF::K::False});
  return v;
}

CFP cf_atom(int idx) {
  CF n{CF::K::Atom};
  n.atom = idx;
  return cf_make(std::move(n));
}

CFP cf_not(const CFP& x) {
  if (x->k == CF::K::True) return cf_false();
  if (x->k == CF::K::False) return cf_true();
  if (x->k == CF::K::Not) return x->kids[0];
  CF n{CF::K::Not};
  n.kids = {x};
  return cf_make(std::move(n));
}

CFP cf_junction(CF::K kind, std::vector<CFP> items) {
  const bool is_and = kind == CF::K::And;
  const CFP& unit = is_and ? cf_true() : cf_false();
  const CFP& zero = is_and ? cf_false() : cf_true();
  std::vector<CFP> flat;
  for (auto& x : items) {
    if (x->k == zero->k) return zero;
    if (x->k == unit->k) continue;
    if (x->k == kind) {
      for (const auto& c : x->kids) flat.push_back(c);
    } else {
      flat.push_back(std::move(x));
    }
  }
  std::sort(flat.begin(), flat.end(),
            [](const CFP& a, const CFP& b) { return a->key < b->key; });
  flat.erase(std::unique(flat.begin(), flat.end(),
                         [](const CFP& a, const CFP& b) { return a->key == b->key; }),
             flat.end());
  // x and !x together collapse.
  std::set<std::string> keys;
  for (const auto& x : flat) keys.insert(x->key);
  for (const auto& x : flat)
    if (keys.count("!(" + x->key + ")")) return zero;
  if (flat.empty()) return unit;
  if (flat.size() == 1) return flat[0];
  CF n{kind};
  n.kids = std::move(flat);
  return cf_make(std::move(n));
}

CFP cf_and(std::vector<CFP> xs) { return cf_junction(CF::K::And, std::move(xs)); }
CFP cf_or(std::vector<CFP> xs) { return cf_junction(CF::K::Or, std::move(xs)); }

CFP cf_until(int k1, int k2, const CFP& a, const CFP& b) {
  if (b->k == CF::K::False) return cf_false();
  if (k1 == 0 && k2 == 0) {
    // Pure "now" window still needs a letter; keep the node.
  }
  CF n{CF::K::Until};
  n.k1 = k1;
  n.k2 = k2;
  n.kids = {a, b};
  return cf_make(std::move(n));
}

CFP convert(const FormulaPtr& f, const std::vector<std::string>& order) {
  using K = Formula::Kind;
  switch (f->kind) {
    case K::True: return cf_true();
    case K::False: return cf_false();
    case K::Atom: return cf_atom(atom_index(order, f->atom));
    case K::Not: return cf_not(convert(f->children[0], order));
    case K::And:
      return cf_and({convert(f->children[0], order), convert(f->children[1], order)});
    case K::Or:
      return cf_or({convert(f->children[0], order), convert(f->children[1], order)});
    case K::Until:
      return cf_until(f->k1, f->k2, convert(f->children[0], order),
                      convert(f->children[1], order));
    case K::Eventually:
      return cf_until(f->k1, f->k2, cf_true(), convert(f->children[0], order));
    case K::Always:
      return cf_not(cf_until(f->k1, f->k2, cf_true(),
                             cf_not(convert(f->children[0], order))));
  }
  return cf_false();
}

int dec(int k) { return k == kInf ? kInf : k - 1; }

CFP deriv(const CFP& f, Letter a) {
  switch (f->k) {
    case CF::K::True: return cf_true();
    case CF::K::False: return cf_false();
    case CF::K::Atom: return ((a >> f->atom) & 1u) ? cf_true() : cf_false();
    case CF::K::Not: return cf_not(deriv(f->kids[0], a));
    case CF::K::And: {
      std::vector<CFP> kids;
      for (const auto& c : f->kids) kids.push_back(deriv(c, a));
      return cf_and(std::move(kids));
    }
    case CF::K::Or: {
      std::vector<CFP> kids;
      for (const auto& c : f->kids) kids.push_back(deriv(c, a));
      return cf_or(std::move(kids));
    }
    case CF::K::Until: {
      const CFP da = deriv(f->kids[0], a);
      if (f->k1 > 0)
        return cf_and({da, cf_until(f->k1 - 1, dec(f->k2), f->kids[0], f->kids[1])});
      const CFP db = deriv(f->kids[1], a);
      const CFP cont = f->k2 == 0
                           ? cf_false()
                           : cf_until(0, dec(f->k2), f->kids[0], f->kids[1]);
      return cf_or({db, cf_and({da, cont})});
    }
  }
  return cf_false();
}

// Rewrite top-level windows reaching the remaining horizon R to open-ended
// form; valid because positions beyond R do not exist in the word.
CFP saturate(const CFP& f, int R) {
  switch (f->k) {
    case CF::K::Not: return cf_not(saturate(f->kids[0], R));
    case CF::K::And: {
      std::vector<CFP> kids;
      for (const auto& c : f->kids) kids.push_back(saturate(c, R));
      return cf_and(std::move(kids));
    }
    case CF::K::Or: {
      std::vector<CFP> kids;
      for (const auto& c : f->kids) kids.push_back(saturate(c, R));
      return cf_or(std::move(kids));
    }
    case CF::K::Until:
      if (f->k2 != kInf && f->k2 >= R)
        return cf_until(f->k1, kInf, f->kids[0], f->kids[1]);
      return f;
    default: return f;
  }
}

// Acceptance bit: does the residual hold over an empty remainder?
bool empty_bit(const CFP& f) {
  switch (f->k) {
    case CF::K::True: return true;
    case CF::K::False: return false;
    case CF::K::Atom: return false;
    case CF::K::Not: return !empty_bit(f->kids[0]);
    case CF::K::And:
      for (const auto& c : f->kids)
        if (!empty_bit(c)) return false;
      return true;
    case CF::K::Or:
      for (const auto& c : f->kids)
        if (empty_bit(c)) return true;
      return false;
    case CF::K::Until: return false;
  }
  return false;
}

}  // namespace

bool Dfa::accepts(const Word& w) const {
  int s = initial;
  for (Letter a : w) s = step(s, a);
  return accepting[s] != 0;
}

Dfa minimize_dfa(const Dfa& dfa) {
  const int Z = dfa.num_states();
  const int L = dfa.num_letters();
  std::vector<int> cls(Z);
  for (int s = 0; s < Z; ++s) cls[s] = dfa.accepting[s] ? 1 : 0;
  for (;;) {
    std::map<std::vector<int>, int> sig_to_class;
    std::vector<int> next(Z);
    for (int s = 0; s < Z; ++s) {
      std::vector<int> sig;
      sig.reserve(L + 1);
      sig.push_back(cls[s]);
      for (int a = 0; a < L; ++a) sig.push_back(cls[dfa.step(s, a)]);
      auto [it, inserted] =
          sig_to_class.emplace(std::move(sig), static_cast<int>(sig_to_class.size()));
      next[s] = it->second;
    }
    if (next == cls) break;
    cls = std::move(next);
  }

  // Canonical renumbering: BFS from the initial class, letters ascending.
  std::vector<int> order(*std::max_element(cls.begin(), cls.end()) + 1, -1);
  std::vector<int> rep;  // representative original state per new id
  std::deque<int> queue;
  order[cls[dfa.initial]] = 0;
  rep.push_back(dfa.initial);
  queue.push_back(dfa.initial);
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < L; ++a) {
      const int t = dfa.step(s, a);
      if (order[cls[t]] < 0) {
        order[cls[t]] = static_cast<int>(rep.size());
        rep.push_back(t);
        queue.push_back(t);
      }
    }
  }

  Dfa out;
  out.atoms = dfa.atoms;
  out.initial = 0;
  const int Zm = static_cast<int>(rep.size());
  out.trans.resize(Zm * L);
  out.accepting.resize(Zm);
  for (int s = 0; s < Zm; ++s) {
    out.accepting[s] = dfa.accepting[rep[s]];
    for (int a = 0; a < L; ++a)
      out.trans[s * L + a] = order[cls[dfa.step(rep[s], a)]];
  }
  return out;
}

Dfa to_dfa(const FormulaPtr& f, int horizon,
           const std::vector<std::string>& atom_order) {
  if (static_cast<int>(atom_order.size()) > limits().max_atoms)
    throw CapabilityError("to_dfa: atom count exceeds limit");
  if (max_time_index(f) > horizon)
    throw ConfigError("to_dfa: formula max time index exceeds horizon");
  for (const auto& a : collect_atoms(f)) atom_index(atom_order, a);

  const int L = 1 << static_cast<int>(atom_order.size());
  std::vector<CFP> states;
  std::map<std::string, int> ids;
  std::vector<int> depth_of;
  std::vector<int> trans;

  auto intern = [&](const CFP& g, int depth) {
    auto it = ids.find(g->key);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(states.size());
    ids.emplace(g->key, id);
    states.push_back(g);
    depth_of.push_back(depth);
    if (id > 20000) throw CapabilityError("to_dfa: state explosion");
    return id;
  };

  intern(saturate(convert(f, atom_order), horizon), 0);
  for (int s = 0; s < static_cast<int>(states.size()); ++s) {
    trans.resize((s + 1) * L);
    const int R = std::max(horizon - depth_of[s] - 1, 0);
    for (Letter a = 0; a < static_cast<Letter>(L); ++a) {
      const CFP succ = saturate(deriv(states[s], a), R);
      trans[s * L + a] = intern(succ, depth_of[s] + 1);
    }
  }

  Dfa raw;
  raw.atoms = atom_order;
  raw.initial = 0;
  raw.trans = std::move(trans);
  raw.accepting.resize(states.size());
  for (std::size_t s = 0; s < states.size(); ++s)
    raw.accepting[s] = empty_bit(states[s]) ? 1 : 0;
  return minimize_dfa(raw);
}

std::string Dfa::to_json() const {
  nlohmann::json j;
  j["atoms"] = atoms;
  j["initial"] = initial;
  j["accepting"] = std::vector<int>(accepting.begin(), accepting.end());
  j["trans"] = trans;
  return j.dump(2);
}

Dfa Dfa::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Dfa d;
  d.atoms = j.at("atoms").get<std::vector<std::string>>();
  d.initial = j.at("initial").get<int>();
  for (int v : j.at("accepting").get<std::vector<int>>())
    d.accepting.push_back(static_cast<char>(v));
  d.trans = j.at("trans").get<std::vector<int>>();
  if (static_cast<int>(d.trans.size()) != d.num_states() * d.num_letters())
    throw ConfigError("dfa: transition table size mismatch");
  return d;
}

// ---------------------------------------------------------------------------
// Workspace labeling.
// ---------------------------------------------------------------------------

std::vector<std::string> Workspace::atom_names() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : regions)
    if (seen.insert(r.name).second) out.push_back(r.name);
  return out;
}

Letter Workspace::label_state(const Vec& x) const {
  const auto names = atom_names();
  Letter letter = 0;
  for (const auto& r : regions) {
    const int p = r.box.dim();
    if (p > x.size()) throw ConfigError("workspace: region dimension exceeds state");
    if (r.box.contains_closed(x.head(p), 0.0))
      letter |= 1u << atom_index(names, r.name);
  }
  return letter;
}

Letter Workspace::label_cell(const Box& q) const {
  const auto names = atom_names();
  Letter letter = 0;
  for (const auto& r : regions) {
    const int p = r.box.dim();
    if (p > q.dim()) throw ConfigError("workspace: region dimension exceeds state");
    const Box qp(q.lo.head(p), q.hi.head(p));
    const bool hit = r.type == Region::Type::Obstacle
                         ? qp.intersects(r.box)
                         : qp.inside(r.box, numerics().geometry_tol);
    if (hit) letter |= 1u << atom_index(names, r.name);
  }
  return letter;
}

std::string Workspace::to_json() const {
  nlohmann::json j;
  j["regions"] = nlohmann::json::array();
  for (const auto& r : regions) {
    nlohmann::json jr;
    jr["name"] = r.name;
    jr["type"] = r.type == Region::Type::Goal       ? "goal"
                 : r.type == Region::Type::Obstacle ? "obstacle"
                                                    : "label";
    jr["lo"] = std::vector<double>(r.box.lo.data(), r.box.lo.data() + r.box.lo.size());
    jr["hi"] = std::vector<double>(r.box.hi.data(), r.box.hi.data() + r.box.hi.size());
    j["regions"].push_back(std::move(jr));
  }
  return j.dump(2);
}

Workspace Workspace::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Workspace ws;
  for (const auto& jr : j.at("regions")) {
    Region r;
    r.name = jr.at("name").get<std::string>();
    const std::string t = jr.at("type").get<std::string>();
    if (t == "goal")
      r.type = Region::Type::Goal;
    else if (t == "obstacle")
      r.type = Region::Type::Obstacle;
    else if (t == "label")
      r.type = Region::Type::Label;
    else
      throw ConfigError("workspace: unknown region type '" + t + "'");
    const auto lo = jr.at("lo").get<std::vector<double>>();
    const auto hi = jr.at("hi").get<std::vector<double>>();
    Vec vlo(lo.size()), vhi(hi.size());
    for (std::size_t d = 0; d < lo.size(); ++d) vlo[d] = lo[d];
    for (std::size_t d = 0; d < hi.size(); ++d) vhi[d] = hi[d];
    r.box = Box(vlo, vhi);
    ws.regions.push_back(std::move(r));
  }
  return ws;
}

}  // namespace cpwa
