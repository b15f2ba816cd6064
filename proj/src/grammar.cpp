#include "structeval/grammar.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "structeval/errors.hpp"
#include "structeval/text.hpp"

namespace structeval::grammar {

namespace {

// ---------------------------------------------------------------------------
// Grammar file front end
// ---------------------------------------------------------------------------

struct Token {
  enum Type { Ident, Literal, Regex, LParen, RParen, Star, Pipe } type;
  std::string value;
  int col = 0;
};

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

// Tokenizes one definition body. `//` outside quotes and regexes starts a
// comment; inside a regex a literal slash must be escaped as `\/`.
std::vector<Token> tokenize_body(const std::string& body, int line, int col0) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = body.size();
  while (i < n) {
    char c = body[i];
    int col = col0 + static_cast<int>(i);
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && body[i + 1] == '/') break;  // comment
    if (c == '"') {
      std::string value;
      ++i;
      bool closed = false;
      while (i < n) {
        char d = body[i];
        if (d == '\\' && i + 1 < n) {
          char e = body[i + 1];
          if (e == 'n') value.push_back('\n');
          else if (e == 't') value.push_back('\t');
          else if (e == 'r') value.push_back('\r');
          else value.push_back(e);
          i += 2;
          continue;
        }
        if (d == '"') {
          closed = true;
          ++i;
          break;
        }
        value.push_back(d);
        ++i;
      }
      if (!closed) throw SyntaxError(line, col, "unterminated string literal");
      tokens.push_back({Token::Literal, value, col});
      continue;
    }
    if (c == '/') {
      std::string value;
      ++i;
      bool closed = false;
      while (i < n) {
        char d = body[i];
        if (d == '\\' && i + 1 < n) {
          if (body[i + 1] == '/') {
            value.push_back('/');
          } else {
            value.push_back('\\');
            value.push_back(body[i + 1]);
          }
          i += 2;
          continue;
        }
        if (d == '/') {
          closed = true;
          ++i;
          break;
        }
        value.push_back(d);
        ++i;
      }
      if (!closed) throw SyntaxError(line, col, "unterminated regex");
      tokens.push_back({Token::Regex, value, col});
      continue;
    }
    if (c == '(') {
      tokens.push_back({Token::LParen, "(", col});
      ++i;
      continue;
    }
    if (c == ')') {
      tokens.push_back({Token::RParen, ")", col});
      ++i;
      continue;
    }
    if (c == '*') {
      tokens.push_back({Token::Star, "*", col});
      ++i;
      continue;
    }
    if (c == '|') {
      tokens.push_back({Token::Pipe, "|", col});
      ++i;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t start = i;
      while (i < n && is_ident_char(body[i])) ++i;
      tokens.push_back({Token::Ident, body.substr(start, i - start), col});
      continue;
    }
    throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
  }
  return tokens;
}

// Body items before symbol resolution.
struct Item;
using ItemSeq = std::vector<Item>;
struct Item {
  enum Kind { Lit, Re, Name, StarGroup } kind;
  std::string value;  // literal text, regex source, or referenced name
  ItemSeq group;      // StarGroup contents
  int col = 0;
};

struct Definition {
  std::string name;
  int line = 0;
  bool is_terminal_def = false;          // body was exactly one regex
  std::string regex_source;              // terminal defs only
  std::vector<ItemSeq> alternatives;     // rule defs only
};

ItemSeq parse_sequence(const std::vector<Token>& tokens, std::size_t& pos, int line,
                       bool inside_group);

Item parse_item(const std::vector<Token>& tokens, std::size_t& pos, int line) {
  const Token& t = tokens[pos];
  switch (t.type) {
    case Token::Literal:
      if (t.value.empty()) throw SyntaxError(line, t.col, "empty string literal");
      ++pos;
      return {Item::Lit, t.value, {}, t.col};
    case Token::Regex:
      ++pos;
      return {Item::Re, t.value, {}, t.col};
    case Token::Ident:
      ++pos;
      return {Item::Name, t.value, {}, t.col};
    case Token::LParen: {
      ++pos;
      ItemSeq inner = parse_sequence(tokens, pos, line, /*inside_group=*/true);
      if (pos >= tokens.size() || tokens[pos].type != Token::RParen)
        throw SyntaxError(line, t.col, "unclosed group");
      ++pos;
      if (pos >= tokens.size() || tokens[pos].type != Token::Star)
        throw SyntaxError(line, t.col, "a group must be followed by '*'");
      ++pos;
      if (inner.empty()) throw SyntaxError(line, t.col, "empty group");
      Item item{Item::StarGroup, "", std::move(inner), t.col};
      return item;
    }
    default:
      throw SyntaxError(line, t.col, "unexpected token '" + t.value + "'");
  }
}

ItemSeq parse_sequence(const std::vector<Token>& tokens, std::size_t& pos, int line,
                       bool inside_group) {
  ItemSeq seq;
  while (pos < tokens.size()) {
    Token::Type type = tokens[pos].type;
    if (type == Token::Pipe) {
      if (inside_group)
        throw SyntaxError(line, tokens[pos].col, "alternatives are not allowed inside a group");
      break;
    }
    if (type == Token::RParen) {
      if (!inside_group)
        throw SyntaxError(line, tokens[pos].col, "unmatched ')'");
      break;
    }
    if (type == Token::Star)
      throw SyntaxError(line, tokens[pos].col, "'*' may only follow a group");
    seq.push_back(parse_item(tokens, pos, line));
  }
  return seq;
}

Definition parse_definition(const std::string& rawline, int line) {
  std::size_t i = 0;
  const std::size_t n = rawline.size();
  while (i < n && (rawline[i] == ' ' || rawline[i] == '\t')) ++i;
  if (i >= n || !is_ident_start(rawline[i]))
    throw SyntaxError(line, static_cast<int>(i) + 1, "expected a rule name");
  std::size_t start = i;
  while (i < n && is_ident_char(rawline[i])) ++i;
  Definition def;
  def.name = rawline.substr(start, i - start);
  def.line = line;
  while (i < n && (rawline[i] == ' ' || rawline[i] == '\t')) ++i;
  if (i >= n || rawline[i] != ':')
    throw SyntaxError(line, static_cast<int>(i) + 1, "expected ':' after rule name");
  ++i;

  std::vector<Token> tokens = tokenize_body(rawline.substr(i), line, static_cast<int>(i) + 1);
  if (tokens.empty())
    throw SyntaxError(line, static_cast<int>(i) + 1, "empty rule body");

  // `name: /regex/` defines a named regex terminal.
  if (tokens.size() == 1 && tokens[0].type == Token::Regex) {
    def.is_terminal_def = true;
    def.regex_source = tokens[0].value;
    return def;
  }

  std::size_t pos = 0;
  while (true) {
    ItemSeq seq = parse_sequence(tokens, pos, line, /*inside_group=*/false);
    if (seq.empty())
      throw SyntaxError(line, pos < tokens.size() ? tokens[pos].col : 1, "empty alternative");
    def.alternatives.push_back(std::move(seq));
    if (pos >= tokens.size()) break;
    ++pos;  // skip '|'
    if (pos >= tokens.size())
      throw SyntaxError(line, tokens[pos - 1].col, "empty alternative");
  }
  return def;
}

std::shared_ptr<const boost::wregex> compile_regex(const std::string& name,
                                                   const std::string& source) {
  try {
    return std::make_shared<const boost::wregex>(
        text::utf8_to_wide(source), boost::regex::perl | boost::regex::no_mod_m);
  } catch (const boost::regex_error& e) {
    throw BadRegexError(name, e.what());
  }
}

// ---------------------------------------------------------------------------
// Earley engine
// ---------------------------------------------------------------------------

struct EarleyItem {
  int rule;
  int alt;
  int dot;
  int origin;
};

// Bit-packed keys rely on the size caps enforced by load_grammar and parse:
// rules < 4096, at most 256 alternatives of at most 256 symbols, inputs
// shorter than 2^22 scalar values.
constexpr std::size_t kMaxInputLength = 1u << 22;

inline std::uint64_t pack_item(const EarleyItem& it) {
  return (static_cast<std::uint64_t>(it.rule) << 48) |
         (static_cast<std::uint64_t>(it.alt) << 40) |
         (static_cast<std::uint64_t>(it.dot) << 32) |
         static_cast<std::uint32_t>(it.origin);
}

inline std::uint64_t pack_span(int rule, int alt, int origin, int end) {
  return (static_cast<std::uint64_t>(rule) << 52) |
         (static_cast<std::uint64_t>(alt) << 44) |
         (static_cast<std::uint64_t>(origin) << 22) | static_cast<std::uint64_t>(end);
}

inline std::uint64_t pack_guard(int rule, int i, int j) {
  return (static_cast<std::uint64_t>(rule) << 44) |
         (static_cast<std::uint64_t>(i) << 22) | static_cast<std::uint64_t>(j);
}

class Parser {
 public:
  Parser(const Grammar& g, const std::wstring& input) : g_(g), input_(input) {}

  ParseOutcome run() {
    const std::size_t n = input_.size();
    sets_.assign(n + 1, {});
    seen_.assign(n + 1, {});
    wanters_.assign(n + 1, {});
    completed_zero_.assign(n + 1, {});

    const Rule& start = g_.rules()[g_.start_rule()];
    for (int a = 0; a < static_cast<int>(start.alternatives.size()); ++a)
      add(0, {g_.start_rule(), a, 0, 0});

    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t w = 0; w < sets_[i].size(); ++w) {
        EarleyItem it = sets_[i][w];
        const auto& alt = g_.rules()[it.rule].alternatives[it.alt];
        if (it.dot == static_cast<int>(alt.size())) {
          complete(it, static_cast<int>(i));
        } else {
          const Symbol& sym = alt[it.dot];
          if (sym.is_terminal) {
            int len = match_terminal(sym.index, i);
            if (len >= 0) add(i + len, {it.rule, it.alt, it.dot + 1, it.origin});
          } else {
            predict(it, sym.index, static_cast<int>(i));
          }
        }
      }
    }

    ParseOutcome outcome;
    bool accepted = false;
    auto comp = completions_.find(pack_rule_origin(g_.start_rule(), 0));
    if (comp != completions_.end()) {
      for (const auto& [end, alt] : comp->second) {
        if (end == static_cast<int>(n)) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      outcome.parsed = false;
      std::size_t furthest = 0;
      for (std::size_t i = 0; i <= n; ++i)
        if (!sets_[i].empty()) furthest = i;
      outcome.failure_position = furthest;
      return outcome;
    }
    outcome.parsed = true;
    outcome.tree = build_tree(static_cast<int>(n));
    return outcome;
  }

 private:
  static std::uint64_t pack_rule_origin(int rule, int origin) {
    return (static_cast<std::uint64_t>(rule) << 32) | static_cast<std::uint32_t>(origin);
  }

  void add(std::size_t set_idx, EarleyItem it) {
    std::uint64_t key = pack_item(it);
    if (seen_[set_idx].insert(key).second) sets_[set_idx].push_back(it);
  }

  void predict(const EarleyItem& it, int rule, int i) {
    wanters_[i][rule].push_back(it);
    const Rule& r = g_.rules()[rule];
    for (int a = 0; a < static_cast<int>(r.alternatives.size()); ++a)
      add(i, {rule, a, 0, i});
    // A zero-width completion of `rule` may already sit in this set; the
    // completer cannot see this later wanter, so advance it here.
    if (completed_zero_[i].count(rule)) add(i, {it.rule, it.alt, it.dot + 1, it.origin});
  }

  void complete(const EarleyItem& it, int i) {
    completions_[pack_rule_origin(it.rule, it.origin)].emplace_back(i, it.alt);
    if (it.origin == i) completed_zero_[i].insert(it.rule);
    auto want = wanters_[it.origin].find(it.rule);
    if (want == wanters_[it.origin].end()) return;
    auto& list = want->second;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const EarleyItem& w = list[k];
      add(i, {w.rule, w.alt, w.dot + 1, w.origin});
    }
  }

  // One candidate match length per (terminal, position); -1 means no match.
  int match_terminal(int term, std::size_t pos) {
    std::uint64_t key = (static_cast<std::uint64_t>(term) << 32) | pos;
    auto it = match_memo_.find(key);
    if (it != match_memo_.end()) return it->second;
    int len = -1;
    const Terminal& t = g_.terminals()[term];
    if (t.kind == TerminalKind::Literal) {
      const std::wstring& lit = t.wide_literal;
      if (pos + lit.size() <= input_.size() &&
          input_.compare(pos, lit.size(), lit) == 0)
        len = static_cast<int>(lit.size());
    } else {
      boost::wsmatch m;
      if (boost::regex_search(input_.cbegin() + pos, input_.cend(), m, *t.regex,
                              boost::match_continuous))
        len = static_cast<int>(m.length(0));
    }
    match_memo_.emplace(key, len);
    return len;
  }

  // -------------------------------------------------------------------------
  // Deterministic tree extraction over the completed-item table
  // -------------------------------------------------------------------------

  tree::ParseTree build_tree(int n) {
    for (auto& [key, ends] : completions_) {
      std::sort(ends.begin(), ends.end());
      ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
      for (const auto& [end, alt] : ends)
        completed_spans_.insert(pack_span(static_cast<int>(key >> 32), alt,
                                          static_cast<int>(key & 0xFFFFFFFFu), end));
    }
    auto node = build_nt(g_.start_rule(), 0, n);
    tree::ParseTree result;
    result.root = splice(std::move(*node), result.star_counts);
    return result;
  }

  std::optional<tree::ParseNode> build_nt(int rule, int i, int j) {
    std::uint64_t guard = pack_guard(rule, i, j);
    if (!in_progress_.insert(guard).second) return std::nullopt;
    std::optional<tree::ParseNode> result;
    const Rule& r = g_.rules()[rule];
    for (int a = 0; a < static_cast<int>(r.alternatives.size()); ++a) {
      if (!completed_spans_.count(pack_span(rule, a, i, j))) continue;
      std::vector<tree::ParseNode> children;
      if (assign(rule, a, 0, i, j, children)) {
        tree::ParseNode node;
        node.node_type = r.head;
        node.begin = static_cast<std::size_t>(i);
        node.end = static_cast<std::size_t>(j);
        node.text = text::wide_to_utf8(
            std::wstring_view(input_).substr(i, static_cast<std::size_t>(j - i)));
        node.children = std::move(children);
        result = std::move(node);
        break;
      }
    }
    in_progress_.erase(guard);
    return result;
  }

  // Splits [pos, j) across the remaining symbols of an alternative, trying
  // shorter spans for the leftmost nonterminal first.
  // Children are inserted at the front as the recursion unwinds, so the
  // resulting child order follows the symbol order.
  bool assign(int rule, int alt, int sym_idx, int pos, int j,
              std::vector<tree::ParseNode>& out) {
    const auto& symbols = g_.rules()[rule].alternatives[alt];
    if (sym_idx == static_cast<int>(symbols.size())) return pos == j;
    std::uint32_t memo_slot = (static_cast<std::uint32_t>(rule) << 16) |
                              (static_cast<std::uint32_t>(alt) << 8) |
                              static_cast<std::uint32_t>(sym_idx);
    std::uint64_t memo_key = (static_cast<std::uint64_t>(pos) << 22) |
                             static_cast<std::uint64_t>(j);
    auto& failed = assign_failed_[memo_slot];
    if (failed.count(memo_key)) return false;

    const Symbol& sym = symbols[sym_idx];
    if (sym.is_terminal) {
      int len = match_terminal(sym.index, static_cast<std::size_t>(pos));
      if (len >= 0 && pos + len <= j && assign(rule, alt, sym_idx + 1, pos + len, j, out)) {
        const Terminal& t = g_.terminals()[sym.index];
        tree::ParseNode leaf;
        leaf.node_type = t.name;
        leaf.terminal = true;
        leaf.literal = (t.kind == TerminalKind::Literal);
        leaf.begin = static_cast<std::size_t>(pos);
        leaf.end = static_cast<std::size_t>(pos + len);
        leaf.text = text::wide_to_utf8(
            std::wstring_view(input_).substr(pos, static_cast<std::size_t>(len)));
        out.insert(out.begin(), std::move(leaf));
        return true;
      }
      failed.insert(memo_key);
      return false;
    }

    auto comp = completions_.find(pack_rule_origin(sym.index, pos));
    if (comp != completions_.end()) {
      int last_end = -1;
      for (const auto& [end, a] : comp->second) {
        if (end > j || end == last_end) continue;
        last_end = end;
        auto child = build_nt(sym.index, pos, end);
        if (!child) continue;
        if (assign(rule, alt, sym_idx + 1, end, j, out)) {
          out.insert(out.begin(), std::move(*child));
          return true;
        }
      }
    }
    failed.insert(memo_key);
    return false;
  }

  // Auxiliary star rules are spliced out of the final tree: their repeated
  // bodies become siblings in the parent, and the chain length is recorded as
  // that star's repetition count.
  tree::ParseNode splice(tree::ParseNode&& node,
                         std::map<std::string, std::vector<int>>& counts) {
    tree::ParseNode out;
    out.node_type = std::move(node.node_type);
    out.terminal = node.terminal;
    out.literal = node.literal;
    out.begin = node.begin;
    out.end = node.end;
    out.text = std::move(node.text);
    for (auto& child : node.children) {
      int rule = child.terminal ? -1 : g_.rule_index(child.node_type);
      if (rule >= 0 && g_.rules()[rule].auxiliary) {
        int repetitions = 0;
        unroll(std::move(child), out.children, counts, repetitions);
        counts[g_.rules()[rule].head].push_back(repetitions);
      } else {
        out.children.push_back(splice(std::move(child), counts));
      }
    }
    return out;
  }

  void unroll(tree::ParseNode&& aux, std::vector<tree::ParseNode>& into,
              std::map<std::string, std::vector<int>>& counts, int& repetitions) {
    if (aux.children.empty()) return;  // epsilon alternative
    ++repetitions;
    std::size_t last = aux.children.size() - 1;
    for (std::size_t k = 0; k < last; ++k)
      into.push_back(splice(std::move(aux.children[k]), counts));
    unroll(std::move(aux.children[last]), into, counts, repetitions);
  }

  const Grammar& g_;
  const std::wstring& input_;
  std::vector<std::vector<EarleyItem>> sets_;
  std::vector<std::unordered_set<std::uint64_t>> seen_;
  std::vector<std::unordered_map<int, std::vector<EarleyItem>>> wanters_;
  std::vector<std::unordered_set<int>> completed_zero_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<int, int>>> completions_;
  std::unordered_set<std::uint64_t> completed_spans_;
  std::unordered_map<std::uint32_t, std::unordered_set<std::uint64_t>> assign_failed_;
  std::unordered_set<std::uint64_t> in_progress_;
  std::unordered_map<std::uint64_t, int> match_memo_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Grammar
// ---------------------------------------------------------------------------

int Grammar::rule_index(std::string_view name) const {
  auto it = rule_by_name_.find(std::string(name));
  return it == rule_by_name_.end() ? -1 : it->second;
}

int Grammar::terminal_index(std::string_view name) const {
  auto it = terminal_by_name_.find(std::string(name));
  return it == terminal_by_name_.end() ? -1 : it->second;
}

bool Grammar::has_node_type(std::string_view name) const {
  return rule_index(name) >= 0 || terminal_index(name) >= 0;
}

std::size_t Grammar::user_rule_count() const {
  std::size_t count = 0;
  for (const Rule& r : rules_)
    if (!r.auxiliary) ++count;
  return count;
}

std::size_t Grammar::regex_terminal_count() const {
  std::size_t count = 0;
  for (const Terminal& t : terminals_)
    if (t.kind == TerminalKind::Regex) ++count;
  return count;
}

std::size_t Grammar::literal_terminal_count() const {
  return terminals_.size() - regex_terminal_count();
}

bool Grammar::literal_terminals_only() const { return regex_terminal_count() == 0; }

Grammar load_grammar(const std::string& source) {
  std::vector<Definition> defs;
  {
    int line = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
      std::size_t eol = source.find('\n', pos);
      std::string raw = source.substr(pos, eol == std::string::npos ? eol : eol - pos);
      pos = eol == std::string::npos ? source.size() + 1 : eol + 1;
      ++line;
      // skip blank and comment-only lines
      std::size_t first = raw.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (raw.compare(first, 2, "//") == 0) continue;
      defs.push_back(parse_definition(raw, line));
    }
  }
  if (defs.empty()) throw SyntaxError(1, 1, "grammar has no rules");

  Grammar g;
  auto define_name = [&](const std::string& name, int line) {
    if (g.rule_by_name_.count(name) || g.terminal_by_name_.count(name))
      throw SyntaxError(line, 1, "duplicate definition of '" + name + "'");
  };

  // First pass: allocate rule slots and named regex terminals so references
  // resolve regardless of declaration order.
  for (const Definition& def : defs) {
    define_name(def.name, def.line);
    if (def.is_terminal_def) {
      Terminal t;
      t.name = def.name;
      t.kind = TerminalKind::Regex;
      t.pattern = def.regex_source;
      g.terminal_by_name_[def.name] = static_cast<int>(g.terminals_.size());
      g.terminals_.push_back(std::move(t));
    } else {
      Rule r;
      r.head = def.name;
      g.rule_by_name_[def.name] = static_cast<int>(g.rules_.size());
      g.rules_.push_back(std::move(r));
    }
  }
  if (g.rules_.empty()) throw SyntaxError(defs.front().line, 1, "grammar has no rules");
  if (defs.front().is_terminal_def)
    throw SyntaxError(defs.front().line, 1, "the first definition must be a rule");

  auto anonymous_terminal = [&](TerminalKind kind, const std::string& pattern) -> int {
    std::string name = kind == TerminalKind::Literal ? '"' + pattern + '"'
                                                     : '/' + pattern + '/';
    auto it = g.terminal_by_name_.find(name);
    if (it != g.terminal_by_name_.end()) return it->second;
    Terminal t;
    t.name = name;
    t.kind = kind;
    t.pattern = pattern;
    int index = static_cast<int>(g.terminals_.size());
    g.terminal_by_name_[name] = index;
    g.terminals_.push_back(std::move(t));
    return index;
  };

  int star_counter = 0;

  // Recursive lambda: resolves an item sequence to symbols, desugaring star
  // groups to fresh auxiliary rules.
  std::function<std::vector<Symbol>(const ItemSeq&, const Definition&)> resolve_seq =
      [&](const ItemSeq& seq, const Definition& def) {
        std::vector<Symbol> symbols;
        for (const Item& item : seq) {
          switch (item.kind) {
            case Item::Lit:
              symbols.push_back({true, anonymous_terminal(TerminalKind::Literal, item.value)});
              break;
            case Item::Re:
              symbols.push_back({true, anonymous_terminal(TerminalKind::Regex, item.value)});
              break;
            case Item::Name: {
              auto rit = g.rule_by_name_.find(item.value);
              if (rit != g.rule_by_name_.end()) {
                symbols.push_back({false, rit->second});
                break;
              }
              auto tit = g.terminal_by_name_.find(item.value);
              if (tit != g.terminal_by_name_.end()) {
                symbols.push_back({true, tit->second});
                break;
              }
              throw UnknownSymbolError(item.value);
            }
            case Item::StarGroup: {
              std::string aux_name = def.name + "@star" + std::to_string(star_counter++);
              int aux_index = static_cast<int>(g.rules_.size());
              g.rule_by_name_[aux_name] = aux_index;
              Rule aux;
              aux.head = aux_name;
              aux.auxiliary = true;
              g.rules_.push_back(std::move(aux));
              std::vector<Symbol> body = resolve_seq(item.group, def);
              body.push_back({false, aux_index});
              g.rules_[aux_index].alternatives.push_back({});           // epsilon first
              g.rules_[aux_index].alternatives.push_back(std::move(body));
              symbols.push_back({false, aux_index});
              break;
            }
          }
        }
        return symbols;
      };

  for (const Definition& def : defs) {
    if (def.is_terminal_def) continue;
    int rule = g.rule_by_name_.at(def.name);
    for (const ItemSeq& seq : def.alternatives)
      g.rules_[rule].alternatives.push_back(resolve_seq(seq, def));
  }

  if (g.rules_.size() >= 4096)
    throw SyntaxError(defs.back().line, 1, "too many rules (limit 4095)");
  for (const Rule& r : g.rules_) {
    if (r.alternatives.size() > 256)
      throw SyntaxError(1, 1, "rule '" + r.head + "' has too many alternatives (limit 256)");
    for (const auto& alt : r.alternatives)
      if (alt.size() > 256)
        throw SyntaxError(1, 1, "an alternative of '" + r.head + "' is too long (limit 256)");
  }

  for (Terminal& t : g.terminals_) {
    if (t.kind == TerminalKind::Regex) {
      t.regex = compile_regex(t.name, t.pattern);
    } else {
      t.wide_literal = text::utf8_to_wide(t.pattern);
    }
  }
  return g;
}

ParseOutcome parse(const Grammar& g, std::string_view input) {
  std::wstring wide = text::utf8_to_wide(input);
  if (wide.size() >= kMaxInputLength)
    throw Error(ErrorClass::User, "input longer than the supported 2^22 scalar values");
  Parser parser(g, wide);
  return parser.run();
}

// ---------------------------------------------------------------------------
// oracle_parse
// ---------------------------------------------------------------------------

namespace {

constexpr int kInfiniteLength = 1 << 20;

std::vector<int> minimal_lengths(const Grammar& g) {
  std::vector<int> minlen(g.rules().size(), kInfiniteLength);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < g.rules().size(); ++r) {
      for (const auto& alt : g.rules()[r].alternatives) {
        int total = 0;
        for (const Symbol& s : alt) {
          int add = s.is_terminal
                        ? static_cast<int>(g.terminals()[s.index].wide_literal.size())
                        : minlen[s.index];
          total = std::min(kInfiniteLength, total + add);
        }
        if (total < minlen[r]) {
          minlen[r] = total;
          changed = true;
        }
      }
    }
  }
  return minlen;
}

struct OracleSearch {
  const Grammar& g;
  const std::wstring& input;
  const std::vector<int>& minlen;
  int max_depth;
  bool found = false;
  bool truncated = false;
  std::vector<int> trace;         // alternative choices, leftmost order
  std::vector<int> accepted_trace;

  // form is kept reversed: the leftmost symbol is form.back().
  void search(std::vector<Symbol>& form, std::size_t pos, int depth_left) {
    if (found) return;
    if (form.empty()) {
      if (pos == input.size()) {
        found = true;
        accepted_trace = trace;
      }
      return;
    }
    long long remaining = 0;
    for (const Symbol& s : form) {
      remaining += s.is_terminal
                       ? static_cast<long long>(g.terminals()[s.index].wide_literal.size())
                       : minlen[s.index];
      if (static_cast<long long>(pos) + remaining > static_cast<long long>(input.size()))
        return;
    }
    Symbol front = form.back();
    form.pop_back();
    if (front.is_terminal) {
      const std::wstring& lit = g.terminals()[front.index].wide_literal;
      if (pos + lit.size() <= input.size() &&
          input.compare(pos, lit.size(), lit) == 0)
        search(form, pos + lit.size(), depth_left);
    } else {
      if (depth_left == 0) {
        truncated = true;
      } else {
        const Rule& r = g.rules()[front.index];
        for (int a = 0; a < static_cast<int>(r.alternatives.size()) && !found; ++a) {
          const auto& alt = r.alternatives[a];
          trace.push_back(a);
          std::size_t base = form.size();
          for (auto it = alt.rbegin(); it != alt.rend(); ++it) form.push_back(*it);
          search(form, pos, depth_left - 1);
          form.resize(base);
          trace.pop_back();
        }
      }
    }
    form.push_back(front);
  }
};

// Rebuilds the accepting derivation recorded by the oracle search.
tree::ParseNode replay(const Grammar& g, const std::wstring& input,
                       const std::vector<int>& trace, std::size_t& trace_pos, int rule,
                       std::size_t& pos) {
  tree::ParseNode node;
  node.node_type = g.rules()[rule].head;
  node.begin = pos;
  int alt = trace[trace_pos++];
  for (const Symbol& s : g.rules()[rule].alternatives[alt]) {
    if (s.is_terminal) {
      const Terminal& t = g.terminals()[s.index];
      tree::ParseNode leaf;
      leaf.node_type = t.name;
      leaf.terminal = true;
      leaf.literal = true;
      leaf.begin = pos;
      leaf.end = pos + t.wide_literal.size();
      leaf.text = t.pattern;
      pos = leaf.end;
      node.children.push_back(std::move(leaf));
    } else {
      node.children.push_back(replay(g, input, trace, trace_pos, s.index, pos));
    }
  }
  node.end = pos;
  node.text = text::wide_to_utf8(
      std::wstring_view(input).substr(node.begin, node.end - node.begin));
  return node;
}

}  // namespace

ParseOutcome oracle_parse(const Grammar& g, std::string_view input, int max_depth) {
  if (!g.literal_terminals_only())
    throw Error(ErrorClass::User, "oracle_parse requires a literal-terminal grammar");
  std::wstring wide = text::utf8_to_wide(input);
  if (wide.size() > 16)
    throw Error(ErrorClass::User, "oracle_parse requires inputs of at most 16 characters");

  std::vector<int> minlen = minimal_lengths(g);
  OracleSearch search{g, wide, minlen, max_depth};
  std::vector<Symbol> form{Symbol{false, g.start_rule()}};
  search.search(form, 0, max_depth);

  ParseOutcome outcome;
  if (search.found) {
    outcome.parsed = true;
    std::size_t trace_pos = 0;
    std::size_t pos = 0;
    tree::ParseTree t;
    t.root = replay(g, wide, search.accepted_trace, trace_pos, g.start_rule(), pos);
    outcome.tree = std::move(t);
    return outcome;
  }
  if (search.truncated)
    throw DepthExceededError("oracle enumeration hit max_depth = " +
                             std::to_string(max_depth));
  outcome.parsed = false;
  outcome.failure_position = 0;
  return outcome;
}

}  // namespace structeval::grammar
