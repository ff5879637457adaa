#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "punct/text.hpp"

namespace punct {

/// Labeled ordered tree. Leaves carry surface tokens, internal nodes carry
/// phrasal or POS category strings; child order is significant.
struct ConstituencyTree {
    std::string label;
    std::vector<ConstituencyTree> children;

    bool is_leaf() const { return children.empty(); }
    std::size_t node_count() const;
    bool operator==(const ConstituencyTree&) const = default;
};

/// Penn-Treebank-style bracketed notation, e.g. "(S (NP (DT the) (NN cat)))".
/// Errors carry the byte offset of the problem.
ConstituencyTree parse_bracketed(std::string_view s);

/// Canonical single-space form; parse_bracketed(render_bracketed(t)) == t.
std::string render_bracketed(const ConstituencyTree& t);

/// New "ROOT" node adopting the given trees as children, in order. A single
/// tree still gains the wrapper.
ConstituencyTree merge_under_root(std::vector<ConstituencyTree> trees);

/// Depth-first pre-order label sequence (node before children, children left
/// to right), truncated to max_nodes. Leaves contribute their surface token.
std::vector<std::string> traverse(const ConstituencyTree& t, std::size_t max_nodes);

/// Degenerate ROOT -> S -> one pre-terminal per token ("PUNCT" for
/// punctuation tokens, "TOK" otherwise). Stands in when no parsed tree ships
/// with a sample.
ConstituencyTree flat_fallback_tree(std::span<const Token> tokens);

/// Labels of the internal (non-leaf) nodes in pre-order; feeds vocabulary
/// construction, which keeps every label regardless of frequency.
std::vector<std::string> internal_labels(const ConstituencyTree& t);

}  // namespace punct
