#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "covert/errors.hpp"

namespace covert::sexpr {

// A parsed S-expression node: either an atom or a parenthesized list.
struct Node {
  std::string atom;
  std::vector<Node> children;
  bool is_list = false;
  std::size_t line = 0;
  std::size_t column = 0;

  bool is_atom() const noexcept { return !is_list; }
  bool is_atom(std::string_view text) const noexcept { return !is_list && iequals(atom, text); }
  // Head symbol of a list, empty when the list is empty or starts with a list.
  std::string_view head() const noexcept {
    if (!is_list || children.empty() || children.front().is_list) return {};
    return children.front().atom;
  }

  static bool iequals(std::string_view a, std::string_view b) noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
        return false;
    return true;
  }
};

[[noreturn]] inline void fail(const Node& at, const std::string& message) {
  throw ParseError(message, at.line, at.column);
}

// Reads exactly one top-level expression; `;` starts a comment.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Node read_document() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty input", line_, column_);
    Node root = read();
    skip_space();
    if (pos_ < text_.size()) throw ParseError("trailing input after expression", line_, column_);
    return root;
  }

 private:
  Node read() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, column_);
    Node node;
    node.line = line_;
    node.column = column_;
    char c = text_[pos_];
    if (c == ')') throw ParseError("unbalanced ')'", line_, column_);
    if (c == '(') {
      node.is_list = true;
      advance();
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("missing ')'", node.line, node.column);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.children.push_back(read());
      }
      return node;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';')
      advance();
    node.atom = std::string(text_.substr(start, pos_ - start));
    return node;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

inline Node parse(std::string_view text) { return Reader(text).read_document(); }

}  // namespace covert::sexpr
