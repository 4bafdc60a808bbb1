#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fails::html {

// Minimal DOM for status-page markup. Not a conforming HTML5 parser: it
// handles well-nested documents, void elements, comments and raw-text
// script/style bodies, which is what the supported page grammar needs.
struct Node {
  std::string tag;  // lowercase; empty for text nodes
  std::map<std::string, std::string> attrs;
  std::string text;  // text nodes and raw script/style bodies
  std::vector<Node> children;

  bool is_text() const { return tag.empty(); }
  bool has_class(std::string_view cls) const;
  const std::string* attr(const std::string& name) const;
};

Node parse(std::string_view document);

std::string decode_entities(std::string_view text);

/// Concatenated text of the subtree; <br> becomes a newline.
std::string text_content(const Node& node);

void find_all(const Node& root, const std::function<bool(const Node&)>& pred,
              std::vector<const Node*>& out);
std::vector<const Node*> find_by_class(const Node& root, std::string_view cls);
const Node* find_first_by_class(const Node& root, std::string_view cls);
const Node* find_first_tag(const Node& root, std::string_view tag);

}  // namespace fails::html
