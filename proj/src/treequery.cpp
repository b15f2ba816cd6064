#include "structeval/treequery.hpp"

#include "structeval/errors.hpp"
#include "structeval/text.hpp"

namespace structeval::treequery {

PairRelation relation_from_string(std::string_view s) {
  if (s == "next-sibling") return PairRelation::NextSibling;
  if (s == "same-parent") return PairRelation::SameParent;
  if (s == "document-adjacent") return PairRelation::DocumentAdjacent;
  throw Error(ErrorClass::User, "unknown pair relation: " + std::string(s));
}

std::string relation_to_string(PairRelation r) {
  switch (r) {
    case PairRelation::NextSibling: return "next-sibling";
    case PairRelation::SameParent: return "same-parent";
    case PairRelation::DocumentAdjacent: return "document-adjacent";
  }
  return "?";
}

namespace {

// Anonymous terminals are named after their pattern ("..." or /.../); only
// nonterminals and named regex terminals count as nodes.
bool is_named_node(const tree::ParseNode& n) {
  if (n.terminal) {
    if (n.literal) return false;
    return !n.node_type.empty() && n.node_type.front() != '/';
  }
  return true;
}

void collect_rec(const tree::ParseNode& node, const std::set<std::string>& types,
                 std::vector<const tree::ParseNode*>& out) {
  bool wanted = types.empty() ? is_named_node(node) : types.count(node.node_type) > 0;
  if (wanted) out.push_back(&node);
  for (const tree::ParseNode& c : node.children) collect_rec(c, types, out);
}

}  // namespace

std::vector<const tree::ParseNode*> collect_nodes(const tree::ParseNode& root,
                                                  const std::set<std::string>& types) {
  std::vector<const tree::ParseNode*> out;
  collect_rec(root, types, out);
  return out;
}

namespace {

void match_in_parent(const tree::ParseNode& parent, const KeyPairPattern& p,
                     std::vector<NodePair>& out) {
  if (p.relation == PairRelation::NextSibling) {
    // Adjacency is judged between meaningful siblings; literal format tokens
    // in between do not break it.
    std::vector<const tree::ParseNode*> sibs;
    for (const tree::ParseNode& c : parent.children)
      if (!(c.terminal && c.literal)) sibs.push_back(&c);
    for (std::size_t i = 0; i + 1 < sibs.size(); ++i)
      if (sibs[i]->node_type == p.type_a && sibs[i + 1]->node_type == p.type_b)
        out.push_back({sibs[i], sibs[i + 1]});
  } else {  // SameParent
    for (std::size_t i = 0; i < parent.children.size(); ++i) {
      if (parent.children[i].node_type != p.type_a) continue;
      for (std::size_t j = i + 1; j < parent.children.size(); ++j)
        if (parent.children[j].node_type == p.type_b)
          out.push_back({&parent.children[i], &parent.children[j]});
    }
  }
  for (const tree::ParseNode& c : parent.children) match_in_parent(c, p, out);
}

}  // namespace

std::vector<NodePair> match_pairs(const tree::ParseNode& root, const KeyPairPattern& p) {
  std::vector<NodePair> out;
  if (p.relation == PairRelation::DocumentAdjacent) {
    std::set<std::string> types{p.type_a, p.type_b};
    std::vector<const tree::ParseNode*> seq = collect_nodes(root, types);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i]->node_type != p.type_a) continue;
      for (std::size_t j = i + 1; j < seq.size(); ++j) {
        if (seq[j]->node_type == p.type_b) {
          out.push_back({seq[i], seq[j]});
          break;
        }
        if (seq[j]->node_type == p.type_a) break;
      }
    }
    return out;
  }
  match_in_parent(root, p, out);
  return out;
}

BuiltinAttribute builtin_from_name(std::string_view name) {
  if (name == "token_length") return BuiltinAttribute::TokenLength;
  if (name == "num_nodes") return BuiltinAttribute::NumNodes;
  if (name == "node_type") return BuiltinAttribute::NodeType;
  throw UnknownAttributeError(std::string(name));
}

std::size_t token_length(const tree::ParseNode& node) {
  return text::token_count(node.content_text());
}

std::size_t num_nodes(const tree::ParseNode& root, const std::set<std::string>& key_types) {
  return collect_nodes(root, key_types).size();
}

}  // namespace structeval::treequery
