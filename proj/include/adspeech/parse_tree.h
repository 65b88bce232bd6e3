#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace adspeech {

// Constituency tree node. A node without children is a word; a node whose only
// child is a word is a preterminal (POS tag).
struct ParseNode {
  std::string label;
  std::vector<ParseNode> children;

  bool is_word() const { return children.empty(); }
  bool is_preterminal() const {
    return children.size() == 1 && children.front().is_word();
  }

  bool operator==(const ParseNode&) const = default;
};

// Parses a single bracketed tree such as "(S (NP (DT the)(NN cat))(VP (VBD sat)))".
// Throws ParseError (line 0; callers rethrow with their own line) on unbalanced
// brackets, empty constituents, or more than one root.
ParseNode parse_bracketed(std::string_view text);

std::string to_bracketed(const ParseNode& tree);

// Visits every node in pre-order together with its ancestors' labels.
void visit_nodes(const ParseNode& root,
                 const std::function<void(const ParseNode&)>& fn);

}  // namespace adspeech
