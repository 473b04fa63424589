#pragma once

#include <cctype>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "treemend/dom.hpp"

namespace treemend {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseOptions {
    // Off by default: the matching algorithms compare tags, not text. When
    // on, non-whitespace text runs become "#text" nodes.
    bool include_text_nodes = false;
};

namespace detail {

inline bool is_name_start(char c) {
    return std::isalpha((unsigned char)c) != 0;
}

inline bool is_name_char(char c) {
    return std::isalnum((unsigned char)c) || c == '-' || c == '_' || c == ':' || c == '.';
}

inline char to_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
}

inline std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(to_lower(c));
    return out;
}

inline bool valid_utf8(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = (unsigned char)s[i];
        size_t extra;
        if (c < 0x80)
            extra = 0;
        else if ((c >> 5) == 0x6)
            extra = 1;
        else if ((c >> 4) == 0xe)
            extra = 2;
        else if ((c >> 3) == 0x1e)
            extra = 3;
        else
            return false;
        if (i + extra >= s.size()) return false;
        for (size_t k = 1; k <= extra; ++k)
            if (((unsigned char)s[i + k] >> 6) != 0x2) return false;
        i += extra + 1;
    }
    return true;
}

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back((char)cp);
    } else if (cp < 0x800) {
        out.push_back((char)(0xc0 | (cp >> 6)));
        out.push_back((char)(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back((char)(0xe0 | (cp >> 12)));
        out.push_back((char)(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back((char)(0x80 | (cp & 0x3f)));
    } else {
        out.push_back((char)(0xf0 | (cp >> 18)));
        out.push_back((char)(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back((char)(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back((char)(0x80 | (cp & 0x3f)));
    }
}

// UTF-8 when the bytes are valid UTF-8, otherwise Latin-1 transcoded.
inline std::string decode_bytes(std::string_view bytes) {
    if (bytes.size() >= 3 && (unsigned char)bytes[0] == 0xef && (unsigned char)bytes[1] == 0xbb &&
        (unsigned char)bytes[2] == 0xbf)
        bytes.remove_prefix(3);
    if (valid_utf8(bytes)) return std::string(bytes);
    std::string out;
    out.reserve(bytes.size());
    for (unsigned char c : bytes) append_utf8(out, c);
    return out;
}

inline std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        size_t end = s.find(';', i + 1);
        if (end == std::string_view::npos || end - i > 10) {
            out.push_back(s[i++]);
            continue;
        }
        std::string_view name = s.substr(i + 1, end - i - 1);
        if (name == "amp")
            out.push_back('&');
        else if (name == "lt")
            out.push_back('<');
        else if (name == "gt")
            out.push_back('>');
        else if (name == "quot")
            out.push_back('"');
        else if (name == "apos")
            out.push_back('\'');
        else if (name == "nbsp")
            append_utf8(out, 0xa0);
        else if (!name.empty() && name[0] == '#') {
            uint32_t cp = 0;
            bool ok = name.size() > 1;
            if (name.size() > 2 && (name[1] == 'x' || name[1] == 'X')) {
                for (size_t k = 2; k < name.size() && ok; ++k) {
                    char c = to_lower(name[k]);
                    if (c >= '0' && c <= '9')
                        cp = cp * 16 + (uint32_t)(c - '0');
                    else if (c >= 'a' && c <= 'f')
                        cp = cp * 16 + (uint32_t)(c - 'a' + 10);
                    else
                        ok = false;
                }
            } else {
                for (size_t k = 1; k < name.size() && ok; ++k) {
                    if (name[k] >= '0' && name[k] <= '9')
                        cp = cp * 10 + (uint32_t)(name[k] - '0');
                    else
                        ok = false;
                }
            }
            if (ok && cp > 0 && cp <= 0x10ffff)
                append_utf8(out, cp);
            else {
                out.push_back(s[i]);
                ++i;
                continue;
            }
        } else {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        i = end + 1;
    }
    return out;
}

// Opening `incoming` implicitly closes an open `open` element in these cases,
// mirroring the common tag-omission rules of real pages.
inline bool implicitly_closes(std::string_view open, std::string_view incoming) {
    auto any = [&](std::initializer_list<std::string_view> set) {
        for (auto t : set)
            if (incoming == t) return true;
        return false;
    };
    if (open == "p")
        return any({"p", "div", "ul", "ol", "li", "table", "section", "article", "aside", "nav",
                    "h1", "h2", "h3", "h4", "h5", "h6", "blockquote", "pre", "form", "hr"});
    if (open == "li") return any({"li"});
    if (open == "dt" || open == "dd") return any({"dt", "dd"});
    if (open == "td" || open == "th") return any({"td", "th", "tr", "tbody", "thead", "tfoot"});
    if (open == "tr") return any({"tr", "tbody", "thead", "tfoot"});
    if (open == "thead" || open == "tbody" || open == "tfoot")
        return any({"tbody", "tfoot", "thead"});
    if (open == "option") return any({"option", "optgroup"});
    return false;
}

struct HtmlParser {
    std::string_view src;
    size_t pos = 0;
    ParseOptions opts;

    TreeNode doc;                      // synthetic container for top-level nodes
    std::vector<TreeNode*> stack;      // open elements, doc at bottom
    size_t element_count = 0;

    explicit HtmlParser(std::string_view s, ParseOptions o) : src(s), opts(o) {
        stack.push_back(&doc);
    }

    bool eof() const { return pos >= src.size(); }
    char peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }
    bool starts_with(std::string_view s) const { return src.substr(pos, s.size()) == s; }

    void run() {
        while (!eof()) {
            if (peek() == '<') {
                if (starts_with("<!--")) {
                    skip_comment();
                } else if (starts_with("<!") || starts_with("<?")) {
                    skip_until('>');
                } else if (peek(1) == '/') {
                    close_tag();
                } else if (is_name_start(peek(1))) {
                    open_tag();
                } else {
                    take_text_char();
                }
            } else {
                take_text_run();
            }
        }
        flush_text();
    }

    std::string pending_text;

    void take_text_char() { pending_text.push_back(src[pos++]); }

    void take_text_run() {
        size_t start = pos;
        while (!eof() && peek() != '<') ++pos;
        pending_text.append(src.substr(start, pos - start));
    }

    void flush_text() {
        if (pending_text.empty()) return;
        std::string text = decode_entities(pending_text);
        pending_text.clear();
        bool all_ws = true;
        for (char c : text)
            if (!std::isspace((unsigned char)c)) {
                all_ws = false;
                break;
            }
        if (all_ws || !opts.include_text_nodes) return;
        auto node = std::make_unique<TreeNode>(std::string(kTextTag));
        node->text = std::move(text);
        stack.back()->add_child(std::move(node));
    }

    void skip_comment() {
        size_t end = src.find("-->", pos + 4);
        pos = end == std::string_view::npos ? src.size() : end + 3;
    }

    void skip_until(char c) {
        size_t end = src.find(c, pos);
        pos = end == std::string_view::npos ? src.size() : end + 1;
    }

    std::string read_name() {
        size_t start = pos;
        while (!eof() && is_name_char(peek())) ++pos;
        return lower(src.substr(start, pos - start));
    }

    void skip_ws() {
        while (!eof() && std::isspace((unsigned char)peek())) ++pos;
    }

    void open_tag() {
        flush_text();
        ++pos;  // '<'
        std::string tag = read_name();
        auto node = std::make_unique<TreeNode>(tag);
        bool self_closed = false;
        // attribute list, tolerant of junk
        while (!eof()) {
            skip_ws();
            if (eof()) break;
            if (peek() == '>') {
                ++pos;
                break;
            }
            if (peek() == '/' && peek(1) == '>') {
                pos += 2;
                self_closed = true;
                break;
            }
            if (!is_name_start(peek())) {
                ++pos;
                continue;
            }
            std::string attr_name = read_name();
            std::string attr_value;
            skip_ws();
            if (peek() == '=') {
                ++pos;
                skip_ws();
                if (peek() == '"' || peek() == '\'') {
                    char quote = peek();
                    ++pos;
                    size_t start = pos;
                    while (!eof() && peek() != quote) ++pos;
                    attr_value = decode_entities(src.substr(start, pos - start));
                    if (!eof()) ++pos;
                } else {
                    size_t start = pos;
                    while (!eof() && !std::isspace((unsigned char)peek()) && peek() != '>' &&
                           !(peek() == '/' && peek(1) == '>'))
                        ++pos;
                    attr_value = decode_entities(src.substr(start, pos - start));
                }
            }
            if (attr_name == kMarkerAttr)
                node->marker = attr_value;
            else if (is_retained_attr(attr_name))
                node->label.attrs.emplace(std::move(attr_name), std::move(attr_value));
        }

        while (stack.size() > 1 && implicitly_closes(stack.back()->label.tag, tag)) stack.pop_back();

        ++element_count;
        TreeNode* placed = stack.back()->add_child(std::move(node));
        if (self_closed || is_void_tag(tag)) return;
        if (tag == "script" || tag == "style") {
            consume_raw_text(tag);   // contents excluded from the tree
            return;
        }
        stack.push_back(placed);
    }

    void consume_raw_text(const std::string& tag) {
        std::string close = "</" + tag;
        size_t i = pos;
        while (i < src.size()) {
            size_t hit = src.find('<', i);
            if (hit == std::string_view::npos) {
                pos = src.size();
                return;
            }
            if (lower(src.substr(hit, close.size())) == close) {
                size_t end = src.find('>', hit);
                pos = end == std::string_view::npos ? src.size() : end + 1;
                return;
            }
            i = hit + 1;
        }
        pos = src.size();
    }

    void close_tag() {
        flush_text();
        pos += 2;  // '</'
        std::string tag = read_name();
        skip_until('>');
        for (size_t i = stack.size(); i-- > 1;) {
            if (stack[i]->label.tag == tag) {
                stack.resize(i);
                return;
            }
        }
        // stray close tag: ignored
    }
};

}  // namespace detail

// Error-tolerant HTML ingestion. Malformed markup is repaired, never
// rejected; comments, processing instructions and script/style contents are
// excluded; whitespace-only text is dropped. The returned tree is rooted at
// an `html` element, synthesized when the input has no single html root.
inline DomTree parse_html(std::string_view bytes, const ParseOptions& opts = {}) {
    std::string text = detail::decode_bytes(bytes);
    bool all_ws = true;
    for (char c : text)
        if (!std::isspace((unsigned char)c)) {
            all_ws = false;
            break;
        }
    if (all_ws) throw ParseError("html: empty input");

    detail::HtmlParser parser(text, opts);
    parser.run();

    TreeNode& doc = parser.doc;
    if (doc.children.size() == 1 && doc.children[0]->label.tag == "html")
        return DomTree::freeze(*doc.children[0]);

    TreeNode root("html");
    // keep an existing <html> shell's children flat if one appears among
    // several top-level nodes; everything else is adopted as-is
    for (auto& child : doc.children) {
        if (child->label.tag == "html") {
            for (auto& grand : child->children) root.children.push_back(std::move(grand));
        } else {
            root.children.push_back(std::move(child));
        }
    }
    return DomTree::freeze(root);
}

inline DomTree parse_html_file(const std::string& path, const ParseOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("html: cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_html(buf.str(), opts);
}

}  // namespace treemend
