#include "adspeech/parse_tree.h"

#include <cctype>

#include "adspeech/common.h"

namespace adspeech {
namespace {

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  ParseNode read_tree() {
    skip_space();
    if (at_end() || peek() != '(') fail("expected '('");
    ParseNode root = read_node();
    skip_space();
    if (!at_end()) {
      fail(peek() == ')' ? "unbalanced brackets: extra ')'"
                         : "more than one root");
    }
    return root;
  }

 private:
  ParseNode read_node() {
    ++pos_;  // '('
    skip_space();
    ParseNode node;
    // "( (S ...))" style wrappers have an empty label.
    if (!at_end() && peek() != '(' && peek() != ')') node.label = read_atom();
    for (;;) {
      skip_space();
      if (at_end()) fail("unbalanced brackets: missing ')'");
      const char c = peek();
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        node.children.push_back(read_node());
      } else {
        node.children.push_back(ParseNode{read_atom(), {}});
      }
    }
    if (node.children.empty()) fail("empty constituent '" + node.label + "'");
    if (node.label.empty()) {
      if (node.children.size() != 1) fail("unlabeled node with several children");
      ParseNode inner = std::move(node.children.front());
      return inner;
    }
    return node;
  }

  std::string read_atom() {
    const std::size_t start = pos_;
    while (!at_end() && peek() != '(' && peek() != ')' &&
           !std::isspace(static_cast<unsigned char>(peek()))) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("parse tree: " + msg + " at offset " + std::to_string(pos_), 0);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render(const ParseNode& node, std::string& out) {
  if (node.is_word()) {
    out += node.label;
    return;
  }
  out += '(';
  out += node.label;
  for (const auto& child : node.children) {
    out += ' ';
    render(child, out);
  }
  out += ')';
}

}  // namespace

ParseNode parse_bracketed(std::string_view text) {
  return BracketReader(text).read_tree();
}

std::string to_bracketed(const ParseNode& tree) {
  std::string out;
  render(tree, out);
  return out;
}

void visit_nodes(const ParseNode& root,
                 const std::function<void(const ParseNode&)>& fn) {
  fn(root);
  for (const auto& child : root.children) visit_nodes(child, fn);
}

}  // namespace adspeech
