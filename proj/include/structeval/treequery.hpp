#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "structeval/parse_tree.hpp"

namespace structeval::treequery {

enum class PairRelation { NextSibling, SameParent, DocumentAdjacent };

PairRelation relation_from_string(std::string_view s);
std::string relation_to_string(PairRelation r);

struct KeyPairPattern {
  std::string type_a;
  std::string type_b;
  PairRelation relation = PairRelation::NextSibling;

  // Stable label used in metric names and sidecar keys.
  std::string label() const {
    return type_a + "->" + type_b + ":" + relation_to_string(relation);
  }
};

struct NodePair {
  const tree::ParseNode* a = nullptr;
  const tree::ParseNode* b = nullptr;
};

// Pre-order collection of nodes whose type is in `types`. Node types cover
// nonterminals and named regex terminals; anonymous literal leaves are format
// tokens, never nodes. An empty filter collects every named node.
std::vector<const tree::ParseNode*> collect_nodes(const tree::ParseNode& root,
                                                  const std::set<std::string>& types);

// next-sibling: b immediately follows a under one parent (anonymous literal
// leaves in between are skipped). same-parent: every (a, b) with a before b
// under one parent. document-adjacent: b is the first type_b node after a in
// document order with no intervening type_a node. Pairs come back in document
// order of a.
std::vector<NodePair> match_pairs(const tree::ParseNode& root,
                                  const KeyPairPattern& pattern);

enum class BuiltinAttribute { TokenLength, NumNodes, NodeType };

BuiltinAttribute builtin_from_name(std::string_view name);  // UnknownAttribute

// Whitespace token count of a node's content (format literals excluded).
std::size_t token_length(const tree::ParseNode& node);

// Number of key-type nodes in the tree; all named nodes when key_types is
// empty.
std::size_t num_nodes(const tree::ParseNode& root, const std::set<std::string>& key_types);

}  // namespace structeval::treequery
