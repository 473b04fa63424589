#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "treemend/rational.hpp"

namespace treemend {

// Tag used for text nodes when include_text_nodes is enabled.
inline constexpr std::string_view kTextTag = "#text";

// Attribute carrying the synthetic ground-truth marker used by the eval
// harness. Parsed out-of-band: it never enters NodeLabel::attrs, so it can
// never influence label matching.
inline constexpr std::string_view kMarkerAttr = "data-tm-oracle";

// Attributes kept in node labels; everything else is discarded at parse time.
inline const std::array<std::string_view, 5>& retained_attrs() {
    static const std::array<std::string_view, 5> keys = {"id", "class", "name", "href", "src"};
    return keys;
}

inline bool is_retained_attr(std::string_view name) {
    const auto& keys = retained_attrs();
    return std::find(keys.begin(), keys.end(), name) != keys.end();
}

struct NodeLabel {
    std::string tag;                            // lowercase element name or "#text"
    std::map<std::string, std::string> attrs;   // retained attributes only

    friend bool operator==(const NodeLabel&, const NodeLabel&) = default;
};

enum class Algorithm { simple, clustered };

inline std::string_view algorithm_name(Algorithm a) {
    return a == Algorithm::simple ? "simple" : "clustered";
}

inline std::optional<Algorithm> algorithm_from_name(std::string_view s) {
    if (s == "simple") return Algorithm::simple;
    if (s == "clustered") return Algorithm::clustered;
    return std::nullopt;
}

// Comparable-tag equivalence classes; a label pair with different tags still
// matches when some class contains both. The default set covers the usual
// layout migrations (tables and lists rebuilt as divs/spans).
using TagClasses = std::vector<std::vector<std::string>>;

inline TagClasses default_tag_classes() {
    return {
        {"table", "div", "ul", "ol"},
        {"tr", "li", "div"},
        {"td", "span", "div"},
    };
}

struct MatchOptions {
    std::vector<std::string> attr_keys;   // subset of {id, class, name} folded into label equality
    TagClasses tag_classes;               // empty unless comparable tags are enabled
    Algorithm algorithm = Algorithm::clustered;
    Rational threshold = Rational(17, 20);
    bool prune_nested = false;
    std::optional<Rational> max_size_ratio;   // candidate/snapshot node-count ratio cap

    friend bool operator==(const MatchOptions&, const MatchOptions&) = default;
};

namespace detail {

inline std::vector<std::string_view> class_tokens(std::string_view value) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < value.size()) {
        while (i < value.size() && std::isspace((unsigned char)value[i])) ++i;
        size_t start = i;
        while (i < value.size() && !std::isspace((unsigned char)value[i])) ++i;
        if (i > start) out.push_back(value.substr(start, i - start));
    }
    return out;
}

}  // namespace detail

// Label equality in the sense of the matching algorithms: equal tags, or tags
// sharing a configured class; then, for each selected attribute key present
// on BOTH labels, values must agree (class as token sets with a common token,
// id/name exactly). A key absent on either side does not veto the match.
inline bool labels_match(const NodeLabel& a, const NodeLabel& b, const MatchOptions& opts) {
    bool tags_ok = a.tag == b.tag;
    if (!tags_ok) {
        for (const auto& cls : opts.tag_classes) {
            bool has_a = std::find(cls.begin(), cls.end(), a.tag) != cls.end();
            bool has_b = std::find(cls.begin(), cls.end(), b.tag) != cls.end();
            if (has_a && has_b) {
                tags_ok = true;
                break;
            }
        }
    }
    if (!tags_ok) return false;
    for (const auto& key : opts.attr_keys) {
        auto ia = a.attrs.find(key);
        auto ib = b.attrs.find(key);
        if (ia == a.attrs.end() || ib == b.attrs.end()) continue;
        if (key == "class") {
            auto ta = detail::class_tokens(ia->second);
            auto tb = detail::class_tokens(ib->second);
            if (ta.empty() && tb.empty()) continue;
            bool common = false;
            for (auto t : ta) {
                if (std::find(tb.begin(), tb.end(), t) != tb.end()) {
                    common = true;
                    break;
                }
            }
            if (!common) return false;
        } else if (ia->second != ib->second) {
            return false;
        }
    }
    return true;
}

// Mutable tree used while building (parser, mutations, snapshot decoding);
// frozen into a DomTree for everything else.
struct TreeNode {
    NodeLabel label;
    std::string text;     // payload for #text nodes
    std::string marker;   // eval-harness ground-truth marker, "" = none
    std::vector<std::unique_ptr<TreeNode>> children;

    TreeNode() = default;
    explicit TreeNode(std::string tag) { label.tag = std::move(tag); }

    TreeNode* add_child(std::unique_ptr<TreeNode> child) {
        children.push_back(std::move(child));
        return children.back().get();
    }

    TreeNode* add_child(std::string tag) {
        return add_child(std::make_unique<TreeNode>(std::move(tag)));
    }
};

class NodeRef;

// Immutable labeled rooted ordered tree. Nodes live in one arena in document
// order, so a node's id doubles as its document-order rank and stays stable
// across traversals.
class DomTree {
public:
    using NodeId = int32_t;

    DomTree() = default;

    static DomTree freeze(const TreeNode& root) {
        DomTree t;
        t.append(root, -1);
        for (NodeId id = (NodeId)t.nodes_.size() - 1; id >= 0; --id) {
            Node& n = t.nodes_[id];
            n.subtree_size = 1;
            for (NodeId c : n.children) n.subtree_size += t.nodes_[c].subtree_size;
        }
        return t;
    }

    bool empty() const { return nodes_.empty(); }
    size_t size() const { return nodes_.size(); }

    NodeRef root() const;
    NodeRef node(NodeId id) const;

    friend bool operator==(const DomTree& a, const DomTree& b) {
        if (a.nodes_.size() != b.nodes_.size()) return false;
        for (size_t i = 0; i < a.nodes_.size(); ++i) {
            const Node& x = a.nodes_[i];
            const Node& y = b.nodes_[i];
            if (x.label != y.label || x.text != y.text || x.marker != y.marker ||
                x.parent != y.parent || x.children != y.children)
                return false;
        }
        return true;
    }

private:
    struct Node {
        NodeLabel label;
        std::string text;
        std::string marker;
        NodeId parent = -1;
        int32_t subtree_size = 1;
        std::vector<NodeId> children;
    };

    std::vector<Node> nodes_;

    // iterative pre-order copy; tree depth must not bound the call stack
    void append(const TreeNode& root, NodeId root_parent) {
        struct Item {
            const TreeNode* src;
            NodeId parent;
        };
        std::vector<Item> pending{{&root, root_parent}};
        while (!pending.empty()) {
            Item item = pending.back();
            pending.pop_back();
            NodeId id = (NodeId)nodes_.size();
            nodes_.push_back(Node{item.src->label, item.src->text, item.src->marker, item.parent,
                                  1, {}});
            if (item.parent >= 0) nodes_[(size_t)item.parent].children.push_back(id);
            for (size_t i = item.src->children.size(); i-- > 0;)
                pending.push_back({item.src->children[i].get(), id});
        }
    }

    friend class NodeRef;
};

// Lightweight reference to a node inside a DomTree.
class NodeRef {
public:
    NodeRef() = default;
    NodeRef(const DomTree* tree, DomTree::NodeId id) : tree_(tree), id_(id) {}

    bool valid() const { return tree_ != nullptr && id_ >= 0 && (size_t)id_ < tree_->nodes_.size(); }
    const DomTree* tree() const { return tree_; }
    DomTree::NodeId id() const { return id_; }

    const NodeLabel& label() const { return data().label; }
    const std::string& tag() const { return data().label.tag; }
    const std::string& text() const { return data().text; }
    const std::string& marker() const { return data().marker; }
    bool is_text() const { return data().label.tag == kTextTag; }

    int degree() const { return (int)data().children.size(); }
    int subtree_size() const { return data().subtree_size; }

    NodeRef parent() const {
        auto p = data().parent;
        return p < 0 ? NodeRef{} : NodeRef{tree_, p};
    }

    NodeRef child(int i) const { return {tree_, data().children[(size_t)i]}; }

    std::span<const DomTree::NodeId> child_ids() const { return data().children; }

    // Number of siblings including the node itself; 1 for a root.
    int sibling_count() const {
        auto p = data().parent;
        return p < 0 ? 1 : (int)tree_->nodes_[p].children.size();
    }

    bool is_ancestor_of(const NodeRef& other) const {
        if (tree_ != other.tree_) return false;
        for (NodeRef n = other.parent(); n.valid(); n = n.parent())
            if (n.id_ == id_) return true;
        return false;
    }

    friend bool operator==(const NodeRef& a, const NodeRef& b) {
        return a.tree_ == b.tree_ && a.id_ == b.id_;
    }

private:
    const DomTree* tree_ = nullptr;
    DomTree::NodeId id_ = -1;

    const DomTree::Node& data() const { return tree_->nodes_[(size_t)id_]; }
};

inline NodeRef DomTree::root() const { return empty() ? NodeRef{} : NodeRef{this, 0}; }
inline NodeRef DomTree::node(NodeId id) const { return {this, id}; }

inline int degree(const NodeRef& n) { return n.degree(); }
inline int sibling_count(const NodeRef& n) { return n.sibling_count(); }
inline int node_count(const NodeRef& n) { return n.subtree_size(); }

inline std::unique_ptr<TreeNode> to_builder(const NodeRef& n, bool keep_markers = true) {
    auto out = std::make_unique<TreeNode>();
    out->label = n.label();
    out->text = n.text();
    if (keep_markers) out->marker = n.marker();
    for (int i = 0; i < n.degree(); ++i) out->children.push_back(to_builder(n.child(i), keep_markers));
    return out;
}

// Standalone copy of the subtree rooted at n. Markers are dropped by default:
// snapshot subtrees must never carry ground-truth markers.
inline DomTree subtree_copy(const NodeRef& n, bool keep_markers = false) {
    return DomTree::freeze(*to_builder(n, keep_markers));
}

namespace detail {

inline void escape_html_into(std::string& out, std::string_view s, bool attr) {
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"':
                if (attr)
                    out += "&quot;";
                else
                    out += c;
                break;
            default: out += c;
        }
    }
}

inline bool is_void_tag(std::string_view tag) {
    static const std::array<std::string_view, 14> tags = {
        "area", "base", "br",    "col",   "embed",  "hr",  "img",
        "input", "link", "meta", "param", "source", "track", "wbr"};
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

inline void write_html(std::string& out, const NodeRef& n, int depth) {
    std::string indent((size_t)depth * 2, ' ');
    if (n.is_text()) {
        out += indent;
        escape_html_into(out, n.text(), false);
        out += '\n';
        return;
    }
    out += indent;
    out += '<';
    out += n.tag();
    for (auto key : retained_attrs()) {
        auto it = n.label().attrs.find(std::string(key));
        if (it == n.label().attrs.end()) continue;
        out += ' ';
        out += it->first;
        out += "=\"";
        escape_html_into(out, it->second, true);
        out += '"';
    }
    if (!n.marker().empty()) {
        out += ' ';
        out += kMarkerAttr;
        out += "=\"";
        escape_html_into(out, n.marker(), true);
        out += '"';
    }
    if (n.degree() == 0 && is_void_tag(n.tag())) {
        out += ">\n";
        return;
    }
    out += '>';
    if (n.degree() == 0) {
        out += "</";
        out += n.tag();
        out += ">\n";
        return;
    }
    out += '\n';
    for (int i = 0; i < n.degree(); ++i) write_html(out, n.child(i), depth + 1);
    out += indent;
    out += "</";
    out += n.tag();
    out += ">\n";
}

}  // namespace detail

// Deterministic HTML serialization: fixed attribute order, two-space indent.
// Reparsing the output reproduces the tree (modulo dropped text nodes when
// include_text_nodes is off).
inline std::string to_html(const DomTree& tree) {
    std::string out;
    if (!tree.empty()) detail::write_html(out, tree.root(), 0);
    return out;
}

}  // namespace treemend
