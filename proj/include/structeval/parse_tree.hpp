#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace structeval::tree {

// One node of a derivation. Nonterminal nodes carry children; terminal leaves
// carry the matched text. Spans are (start, end) offsets into the sample in
// Unicode scalar values; children spans are contiguous and cover the parent.
//
// `text` is the spanned substring. For metric purposes a node's *content* is
// the concatenation of its regex-terminal leaves: literal terminals are format
// tokens ("HUMAN: ", JSON punctuation, ...) and are not part of what a node
// says. content_text() of the query node of "HUMAN: hi GPT: hello" is "hi ".
struct ParseNode {
  std::string node_type;
  bool terminal = false;
  bool literal = false;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;
  std::vector<ParseNode> children;

  std::string content_text() const {
    if (terminal) return literal ? std::string() : text;
    std::string out;
    for (const ParseNode& c : children) out += c.content_text();
    return out;
  }
};

// Root of one sample's derivation plus the star-expansion repetition counts
// observed while building it (one entry per `(...)*` occurrence instance,
// keyed by the auxiliary rule's name). The counts feed the DP generator's
// repetition histograms.
struct ParseTree {
  ParseNode root;
  std::map<std::string, std::vector<int>> star_counts;
};

}  // namespace structeval::tree
