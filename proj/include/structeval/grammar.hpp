#pragma once

#include <boost/regex.hpp>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "structeval/parse_tree.hpp"

namespace structeval::grammar {

enum class TerminalKind { Literal, Regex };

struct Terminal {
  std::string name;
  TerminalKind kind = TerminalKind::Literal;
  std::string pattern;  // literal text, or regex source without the slashes
  std::wstring wide_literal;
  std::shared_ptr<const boost::wregex> regex;  // compiled; null for literals
};

// Grammar symbols index either into the rule table or the terminal table.
struct Symbol {
  bool is_terminal = false;
  int index = 0;
};

struct Rule {
  std::string head;
  // Each alternative is a symbol sequence; an empty sequence is an epsilon
  // alternative (only produced by star desugaring).
  std::vector<std::vector<Symbol>> alternatives;
  bool auxiliary = false;
};

// Immutable after load; safe to share across threads. Desugaring is closed:
// `(X)*` groups are rewritten to fresh right-recursive auxiliary rules with
// the epsilon alternative first, so first-alternative preference yields the
// shortest star expansion.
class Grammar {
 public:
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<Terminal>& terminals() const { return terminals_; }
  const std::string& start_symbol() const { return rules_.front().head; }
  int start_rule() const { return 0; }

  int rule_index(std::string_view name) const;      // -1 when absent
  int terminal_index(std::string_view name) const;  // -1 when absent
  bool has_node_type(std::string_view name) const;

  std::size_t user_rule_count() const;
  std::size_t regex_terminal_count() const;
  std::size_t literal_terminal_count() const;
  bool literal_terminals_only() const;

  friend Grammar load_grammar(const std::string& source);

 private:
  std::vector<Rule> rules_;
  std::vector<Terminal> terminals_;
  std::unordered_map<std::string, int> rule_by_name_;
  std::unordered_map<std::string, int> terminal_by_name_;
};

struct ParseOutcome {
  bool parsed = false;
  std::optional<tree::ParseTree> tree;   // present iff parsed
  std::size_t failure_position = 0;      // furthest Earley progress iff failed
};

// Parses the grammar-file text: one definition per line, `name: body`,
// alternatives separated by `|`, literals in double quotes, regexes between
// slashes with inline flags, `( ... )*` as the only repetition form, and `//`
// line comments. A line whose body is exactly one regex defines a named regex
// terminal; every other line defines a rule. The first rule is the start
// symbol.
Grammar load_grammar(const std::string& source);

// Scannerless Earley recognition over Unicode scalar values followed by
// deterministic tree extraction. Literal terminals match by exact prefix
// comparison; regex terminals are anchored at the scan position and yield the
// single leftmost match (lazy quantifiers and lookahead honored) — exactly one
// candidate length per (terminal, position). Ambiguity is resolved by earlier
// alternatives within a rule, then shorter spans for the leftmost nonterminal.
ParseOutcome parse(const Grammar& g, std::string_view input);

// Exhaustive leftmost-derivation enumeration, for validating `parse` in tests.
// Requires literal terminals only and input of at most 16 scalar values.
// Throws DepthExceededError when the enumeration is cut off by max_depth
// without either finding a derivation or exhausting the space.
ParseOutcome oracle_parse(const Grammar& g, std::string_view input, int max_depth);

}  // namespace structeval::grammar
