#include "html.hpp"

#include <cctype>
#include <cstdint>

#include "text_util.hpp"

namespace fails::html {

namespace {

bool is_void(std::string_view tag) {
  static constexpr std::string_view kVoid[] = {
      "area", "base", "br", "col", "embed", "hr", "img", "input",
      "link", "meta", "source", "track", "wbr"};
  for (auto v : kVoid) {
    if (v == tag) return true;
  }
  return false;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  Node run() {
    Node root;
    root.tag = "#document";
    std::vector<Node*> stack{&root};
    while (pos_ < doc_.size()) {
      if (doc_[pos_] != '<') {
        const auto next = doc_.find('<', pos_);
        const auto end = next == std::string_view::npos ? doc_.size() : next;
        add_text(*stack.back(), doc_.substr(pos_, end - pos_));
        pos_ = end;
        continue;
      }
      if (doc_.compare(pos_, 4, "<!--") == 0) {
        const auto close = doc_.find("-->", pos_ + 4);
        pos_ = close == std::string_view::npos ? doc_.size() : close + 3;
        continue;
      }
      if (doc_.compare(pos_, 2, "<!") == 0 || doc_.compare(pos_, 2, "<?") == 0) {
        const auto close = doc_.find('>', pos_);
        pos_ = close == std::string_view::npos ? doc_.size() : close + 1;
        continue;
      }
      if (doc_.compare(pos_, 2, "</") == 0) {
        pos_ += 2;
        const std::string name = read_name();
        const auto close = doc_.find('>', pos_);
        pos_ = close == std::string_view::npos ? doc_.size() : close + 1;
        for (std::size_t i = stack.size(); i-- > 1;) {
          if (stack[i]->tag == name) {
            stack.resize(i);
            break;
          }
        }
        continue;
      }
      ++pos_;
      const std::string name = read_name();
      if (name.empty()) {
        add_text(*stack.back(), "<");
        continue;
      }
      Node element;
      element.tag = name;
      const bool self_closing = read_attributes(element);
      Node& parent = *stack.back();
      parent.children.push_back(std::move(element));
      Node* inserted = &parent.children.back();
      if (name == "script" || name == "style") {
        const std::string closing = "</" + name;
        auto end = find_ci(closing, pos_);
        if (end == std::string_view::npos) end = doc_.size();
        inserted->text = std::string(doc_.substr(pos_, end - pos_));
        const auto gt = doc_.find('>', end);
        pos_ = gt == std::string_view::npos ? doc_.size() : gt + 1;
        continue;
      }
      if (!self_closing && !is_void(name)) stack.push_back(inserted);
    }
    return root;
  }

 private:
  std::size_t find_ci(const std::string& needle, std::size_t from) const {
    const std::string hay = ascii_lower(doc_.substr(from));
    const auto pos = hay.find(needle);
    return pos == std::string::npos ? std::string_view::npos : from + pos;
  }

  static void add_text(Node& parent, std::string_view raw) {
    if (raw.empty()) return;
    Node text;
    text.text = decode_entities(raw);
    parent.children.push_back(std::move(text));
  }

  std::string read_name() {
    std::string name;
    while (pos_ < doc_.size()) {
      const char c = doc_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
          c == ':') {
        name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        ++pos_;
      } else {
        break;
      }
    }
    return name;
  }

  void skip_space() {
    while (pos_ < doc_.size() &&
           std::isspace(static_cast<unsigned char>(doc_[pos_]))) {
      ++pos_;
    }
  }

  // Returns true for `/>`.
  bool read_attributes(Node& element) {
    while (pos_ < doc_.size()) {
      skip_space();
      if (pos_ >= doc_.size()) return false;
      if (doc_[pos_] == '>') {
        ++pos_;
        return false;
      }
      if (doc_.compare(pos_, 2, "/>") == 0) {
        pos_ += 2;
        return true;
      }
      if (doc_[pos_] == '/') {
        ++pos_;
        continue;
      }
      std::string name = read_name();
      if (name.empty()) {
        ++pos_;
        continue;
      }
      skip_space();
      std::string value;
      if (pos_ < doc_.size() && doc_[pos_] == '=') {
        ++pos_;
        skip_space();
        if (pos_ < doc_.size() && (doc_[pos_] == '"' || doc_[pos_] == '\'')) {
          const char quote = doc_[pos_++];
          const auto close = doc_.find(quote, pos_);
          const auto end = close == std::string_view::npos ? doc_.size() : close;
          value = decode_entities(doc_.substr(pos_, end - pos_));
          pos_ = end == doc_.size() ? end : end + 1;
        } else {
          const auto begin = pos_;
          while (pos_ < doc_.size() &&
                 !std::isspace(static_cast<unsigned char>(doc_[pos_])) &&
                 doc_[pos_] != '>') {
            ++pos_;
          }
          value = decode_entities(doc_.substr(begin, pos_ - begin));
        }
      }
      element.attrs.emplace(std::move(name), std::move(value));
    }
    return false;
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

void collect_text(const Node& node, std::string& out) {
  if (node.is_text()) {
    out += node.text;
    return;
  }
  if (node.tag == "br") {
    out += '\n';
    return;
  }
  if (node.tag == "script" || node.tag == "style") return;
  for (const auto& child : node.children) collect_text(child, out);
}

}  // namespace

bool Node::has_class(std::string_view cls) const {
  auto it = attrs.find("class");
  if (it == attrs.end()) return false;
  for (const auto& token : split(it->second, ' ')) {
    if (token == cls) return true;
  }
  return false;
}

const std::string* Node::attr(const std::string& name) const {
  auto it = attrs.find(name);
  return it == attrs.end() ? nullptr : &it->second;
}

Node parse(std::string_view document) { return Parser(document).run(); }

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    const auto semi = text.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view name = text.substr(i + 1, semi - i - 1);
    std::uint32_t cp = 0;
    if (!name.empty() && name[0] == '#') {
      try {
        if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
          cp = static_cast<std::uint32_t>(std::stoul(std::string(name.substr(2)), nullptr, 16));
        } else {
          cp = static_cast<std::uint32_t>(std::stoul(std::string(name.substr(1))));
        }
      } catch (const std::exception&) {
        cp = 0;
      }
    } else if (name == "amp") {
      cp = '&';
    } else if (name == "lt") {
      cp = '<';
    } else if (name == "gt") {
      cp = '>';
    } else if (name == "quot") {
      cp = '"';
    } else if (name == "apos") {
      cp = '\'';
    } else if (name == "nbsp") {
      cp = ' ';
    } else if (name == "middot") {
      cp = 0xB7;
    } else if (name == "mdash") {
      cp = 0x2014;
    } else if (name == "ndash") {
      cp = 0x2013;
    }
    if (cp == 0) {
      out.push_back('&');
      continue;
    }
    append_utf8(out, cp);
    i = semi;
  }
  return out;
}

std::string text_content(const Node& node) {
  std::string out;
  collect_text(node, out);
  return out;
}

void find_all(const Node& root, const std::function<bool(const Node&)>& pred,
              std::vector<const Node*>& out) {
  for (const auto& child : root.children) {
    if (!child.is_text() && pred(child)) out.push_back(&child);
    find_all(child, pred, out);
  }
}

std::vector<const Node*> find_by_class(const Node& root, std::string_view cls) {
  std::vector<const Node*> out;
  find_all(root, [&](const Node& n) { return n.has_class(cls); }, out);
  return out;
}

const Node* find_first_by_class(const Node& root, std::string_view cls) {
  for (const auto& child : root.children) {
    if (child.has_class(cls)) return &child;
    if (const Node* hit = find_first_by_class(child, cls)) return hit;
  }
  return nullptr;
}

const Node* find_first_tag(const Node& root, std::string_view tag) {
  for (const auto& child : root.children) {
    if (child.tag == tag) return &child;
    if (const Node* hit = find_first_tag(child, tag)) return hit;
  }
  return nullptr;
}

}  // namespace fails::html
