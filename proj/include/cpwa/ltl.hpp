#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cpwa/grid.hpp"
#include "cpwa/types.hpp"

namespace cpwa {

/// Letters are bitmasks over indexed atomic propositions.
using Letter = std::uint32_t;
using Word = std::vector<Letter>;

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// AST of the bounded-LTL grammar: atoms, boolean connectives, and the
/// bounded temporal operators U/F/G with windows [k1, k2], k1 <= k2.
struct Formula {
  enum class Kind { True, False, Atom, Not, And, Or, Until, Eventually, Always };
  Kind kind;
  std::string atom;                   // Kind::Atom
  int k1 = 0, k2 = 0;                 // temporal operators
  std::vector<FormulaPtr> children;   // Not/F/G: 1, And/Or/Until: 2

  bool equals(const Formula& other) const;
};

FormulaPtr parse_formula(const std::string& text);
std::string to_string(const FormulaPtr& f);

/// Largest time index the formula can inspect; words must be longer than this.
int max_time_index(const FormulaPtr& f);

std::vector<std::string> collect_atoms(const FormulaPtr& f);

/// Recursive bounded-LTL semantics at position 0 of `w`, with atom bit
/// indices given by `atom_order`. Throws if the word is too short to decide.
bool evaluate_word(const FormulaPtr& f, const Word& w,
                   const std::vector<std::string>& atom_order);

/// Deterministic finite automaton over the alphabet 2^atoms. A word is
/// accepted iff the run ends in an accepting state.
struct Dfa {
  std::vector<std::string> atoms;
  int initial = 0;
  std::vector<int> trans;        // index: state * (1 << |atoms|) + letter
  std::vector<char> accepting;   // one flag per state

  int num_states() const { return static_cast<int>(accepting.size()); }
  int num_letters() const { return 1 << static_cast<int>(atoms.size()); }
  int step(int s, Letter a) const { return trans[s * num_letters() + a]; }
  bool accepts(const Word& w) const;

  std::string to_json() const;
  static Dfa from_json(const std::string& text);
};

/// Compile a formula with max_time_index <= H into a minimized DFA whose
/// acceptance on length-(H+1) words equals evaluate_word.
Dfa to_dfa(const FormulaPtr& f, int horizon,
           const std::vector<std::string>& atom_order);

/// Moore partition-refinement minimization with canonical BFS renumbering.
Dfa minimize_dfa(const Dfa& dfa);

/// Named workspace regions tied to atomic propositions. Region boxes may span
/// only the leading (position) dimensions of the state.
struct Region {
  enum class Type { Goal, Obstacle, Label };
  std::string name;
  Type type;
  Box box;
};

struct Workspace {
  std::vector<Region> regions;

  /// Atom names in first-occurrence order (several regions may share a name).
  std::vector<std::string> atom_names() const;

  /// Concrete-state label: atom present iff x lies in some region of that
  /// name (closed membership on the region's dimensions).
  Letter label_state(const Vec& x) const;

  /// Abstract-cell label: obstacle-typed atoms over-approximate (any
  /// intersection), goal- and label-typed atoms under-approximate
  /// (cell contained in the region).
  Letter label_cell(const Box& q) const;

  std::string to_json() const;
  static Workspace from_json(const std::string& text);
};

}  // namespace cpwa
