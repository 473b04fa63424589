#pragma once

#include <stdexcept>

#include "treemend/dom.hpp"

namespace treemend {

namespace detail {

int oracle_node(const NodeRef& a, const NodeRef& b, const MatchOptions& opts);

// Exhaustively explores every monotone partial injection between the child
// sequences a.children[i..] and b.children[j..]: either a_i stays unmatched,
// or it pairs with some b_k (k >= j) and the search continues after both.
// No dynamic programming, no memoization.
inline int oracle_children(const NodeRef& a, const NodeRef& b, int i, int j,
                           const MatchOptions& opts) {
    if (i >= a.degree() || j >= b.degree()) return 0;
    int best = oracle_children(a, b, i + 1, j, opts);
    for (int k = j; k < b.degree(); ++k) {
        int paired = oracle_node(a.child(i), b.child(k), opts) +
                     oracle_children(a, b, i + 1, k + 1, opts);
        if (paired > best) best = paired;
    }
    return best;
}

inline int oracle_node(const NodeRef& a, const NodeRef& b, const MatchOptions& opts) {
    if (!labels_match(a.label(), b.label(), opts)) return 0;
    return 1 + oracle_children(a, b, 0, 0, opts);
}

}  // namespace detail

// Brute-force reference for simple_tree_match: the size of the maximum
// top-down, order-preserving, label-preserving mapping, found by enumerating
// all such mappings. Exponential, hence the hard size bound.
inline int oracle_max_mapping(const NodeRef& a, const NodeRef& b, const MatchOptions& opts = {}) {
    if (node_count(a) > 10 || node_count(b) > 10)
        throw std::length_error("oracle_max_mapping: subtree exceeds 10 nodes");
    return detail::oracle_node(a, b, opts);
}

}  // namespace treemend
