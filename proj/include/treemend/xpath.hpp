#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "treemend/dom.hpp"
#include "treemend/html.hpp"

namespace treemend {

// Raised for syntax outside the supported dialect (axes, attribute
// predicates, `//`, ...). The message names the offending token.
struct XPathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct XPathStep {
    std::string tag;
    std::optional<int> index;   // 1-based position among same-tag siblings

    friend bool operator==(const XPathStep&, const XPathStep&) = default;
};

// Absolute child paths with optional positional predicates:
//   "/" step ("/" step)*, step = tag ("[" int "]")?
// Only the final step may omit its index (the multi-select form).
struct XPathExpr {
    std::vector<XPathStep> steps;

    friend bool operator==(const XPathExpr&, const XPathExpr&) = default;

    std::string str() const {
        std::string out;
        for (const auto& s : steps) {
            out += '/';
            out += s.tag;
            if (s.index) {
                out += '[';
                out += std::to_string(*s.index);
                out += ']';
            }
        }
        return out;
    }
};

inline XPathExpr parse_xpath(std::string_view text) {
    if (text.empty()) throw XPathError("xpath: empty expression");
    if (text.substr(0, 2) == "//") throw XPathError("xpath: unsupported token '//'");
    if (text[0] != '/') throw XPathError("xpath: expected leading '/', got '" +
                                         std::string(text.substr(0, 1)) + "'");
    XPathExpr expr;
    size_t i = 1;
    while (true) {
        size_t start = i;
        while (i < text.size() && text[i] != '/' && text[i] != '[') ++i;
        std::string_view tag = text.substr(start, i - start);
        if (tag.empty())
            throw XPathError("xpath: empty step at offset " + std::to_string(start));
        for (char c : tag) {
            if (!(std::isalnum((unsigned char)c) || c == '-' || c == '_' || c == '#'))
                throw XPathError("xpath: unsupported token '" + std::string(tag) + "'");
        }
        XPathStep step;
        step.tag = detail::lower(tag);
        if (i < text.size() && text[i] == '[') {
            size_t close = text.find(']', i);
            if (close == std::string_view::npos)
                throw XPathError("xpath: unterminated predicate in '" + std::string(text) + "'");
            std::string_view body = text.substr(i + 1, close - i - 1);
            int value = 0;
            bool digits = !body.empty();
            for (char c : body) {
                if (c < '0' || c > '9') {
                    digits = false;
                    break;
                }
                value = value * 10 + (c - '0');
                if (value > 1'000'000) break;
            }
            if (!digits)
                throw XPathError("xpath: unsupported predicate '[" + std::string(body) + "]'");
            if (value < 1)
                throw XPathError("xpath: index must be >= 1 in '[" + std::string(body) + "]'");
            step.index = value;
            i = close + 1;
        }
        bool at_end = i >= text.size();
        if (!at_end && text[i] != '/')
            throw XPathError("xpath: unexpected token '" + std::string(text.substr(i, 1)) + "'");
        if (!at_end && !step.index)
            throw XPathError("xpath: only the final step may omit its index ('" + step.tag + "')");
        expr.steps.push_back(std::move(step));
        if (at_end) break;
        ++i;
        if (i >= text.size()) throw XPathError("xpath: trailing '/'");
        if (text[i] == '/') throw XPathError("xpath: unsupported token '//'");
    }
    return expr;
}

// Step semantics: `tag[k]` selects the k-th child among same-tag siblings in
// document order; an unindexed final step selects all matching children. A
// failed step yields the empty sequence, never an error.
inline std::vector<NodeRef> eval_xpath(const DomTree& tree, const XPathExpr& expr) {
    std::vector<NodeRef> current;
    if (tree.empty() || expr.steps.empty()) return current;

    auto select = [](const std::vector<NodeRef>& parents, const XPathStep& step) {
        std::vector<NodeRef> out;
        for (const NodeRef& p : parents) {
            int nth = 0;
            for (int i = 0; i < p.degree(); ++i) {
                NodeRef c = p.child(i);
                if (c.tag() != step.tag) continue;
                ++nth;
                if (!step.index || *step.index == nth) out.push_back(c);
            }
        }
        return out;
    };

    // the first step addresses the root element itself
    const XPathStep& first = expr.steps[0];
    NodeRef root = tree.root();
    if (root.tag() == first.tag && (!first.index || *first.index == 1)) current.push_back(root);
    for (size_t s = 1; s < expr.steps.size() && !current.empty(); ++s)
        current = select(current, expr.steps[s]);
    return current;
}

inline std::vector<NodeRef> eval_xpath(const DomTree& tree, std::string_view text) {
    return eval_xpath(tree, parse_xpath(text));
}

// Fully indexed absolute path from the root to `node`; evaluating it yields
// exactly [node].
inline XPathExpr induce_xpath(const DomTree& tree, const NodeRef& node) {
    if (!node.valid() || node.tree() != &tree)
        throw std::invalid_argument("induce_xpath: node does not belong to tree");
    std::vector<XPathStep> reversed;
    NodeRef n = node;
    while (n.valid()) {
        NodeRef parent = n.parent();
        int nth = 1;
        if (parent.valid()) {
            for (int i = 0; i < parent.degree(); ++i) {
                NodeRef sib = parent.child(i);
                if (sib == n) break;
                if (sib.tag() == n.tag()) ++nth;
            }
        }
        reversed.push_back(XPathStep{n.tag(), nth});
        n = parent;
    }
    XPathExpr expr;
    expr.steps.assign(reversed.rbegin(), reversed.rend());
    return expr;
}

struct GeneralizedXPath {
    std::optional<XPathExpr> unified;   // unindexed-final-step form, when one exists
    bool over_selects = false;          // unified form selects strictly more than the inputs
    std::vector<XPathExpr> paths;       // per-node indexed paths otherwise

    XPathExpr primary() const { return unified ? *unified : paths.front(); }
};

// One unindexed expression when all nodes share a parent and tag (flagging
// over-selection), else the list of individually induced paths.
inline GeneralizedXPath generalize_xpaths(const DomTree& tree, const std::vector<NodeRef>& nodes) {
    if (nodes.empty()) throw std::invalid_argument("generalize_xpaths: no nodes");
    GeneralizedXPath out;
    if (nodes.size() == 1) {
        out.unified = induce_xpath(tree, nodes[0]);
        return out;
    }
    bool same_group = true;
    for (const NodeRef& n : nodes) {
        if (!(n.parent() == nodes[0].parent()) || n.tag() != nodes[0].tag()) {
            same_group = false;
            break;
        }
    }
    if (same_group) {
        XPathExpr expr = induce_xpath(tree, nodes[0]);
        expr.steps.back().index.reset();
        size_t selected = eval_xpath(tree, expr).size();
        out.unified = std::move(expr);
        out.over_selects = selected > nodes.size();
        return out;
    }
    for (const NodeRef& n : nodes) out.paths.push_back(induce_xpath(tree, n));
    return out;
}

// Count of differing steps, compared from the root; length differences count
// as differing steps. Used to prefer candidates near the original location.
inline int xpath_step_distance(const XPathExpr& a, const XPathExpr& b) {
    size_t shared = std::min(a.steps.size(), b.steps.size());
    int dist = (int)(std::max(a.steps.size(), b.steps.size()) - shared);
    for (size_t i = 0; i < shared; ++i)
        if (!(a.steps[i] == b.steps[i])) ++dist;
    return dist;
}

}  // namespace treemend
