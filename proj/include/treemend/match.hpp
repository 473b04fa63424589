#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "treemend/dom.hpp"
#include "treemend/rational.hpp"

namespace treemend {

enum class ScoreKind { simple, clustered, simple_normalized };

inline std::string_view score_kind_name(ScoreKind k) {
    switch (k) {
        case ScoreKind::simple: return "simple";
        case ScoreKind::clustered: return "clustered";
        default: return "simple_normalized";
    }
}

struct SimilarityScore {
    Rational value;
    ScoreKind kind = ScoreKind::clustered;
};

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<Rational> cells;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), cells((size_t)r * (size_t)c) {}

    Rational& at(int i, int j) { return cells[(size_t)i * (size_t)cols + (size_t)j]; }
    const Rational& at(int i, int j) const { return cells[(size_t)i * (size_t)cols + (size_t)j]; }
};

// The W and M grids of one matching invocation: W is d(a) x d(b) with the
// recursive child-pair scores, M is (d(a)+1) x (d(b)+1) with row 0 and
// column 0 all zero.
struct DpMatrices {
    Matrix m;
    Matrix w;
};

struct TraceEntry {
    DomTree::NodeId a_id = -1;
    DomTree::NodeId b_id = -1;
    DpMatrices matrices;
    Rational value;   // value this invocation returned
};

// Full recursion trace of one top-level match: one entry per invocation with
// matching labels, keyed by the compared node pair.
struct MatchTrace {
    Algorithm algorithm = Algorithm::clustered;
    Rational root_score;
    std::vector<TraceEntry> entries;

    const TraceEntry* find(DomTree::NodeId a, DomTree::NodeId b) const {
        for (const auto& e : entries)
            if (e.a_id == a && e.b_id == b) return &e;
        return nullptr;
    }
};

namespace detail {

// Shared evaluation core for both algorithms. Both compute the same dynamic
// program over child pairs
//   M[i][j] = max(M[i][j-1], M[i-1][j], M[i-1][j-1] + W[i][j])
// and differ only in what an invocation returns: simple returns M[m][n]+1 on
// a label match, clustered weights the return by the larger sibling count of
// the compared nodes (multiplying when both have children, adding the
// node's own weight when either is a leaf). Both arguments of the top-level
// call are treated as roots of the comparison, so its scale is 1.
//
// Evaluation runs on an explicit stack: pathological page depth cannot
// exhaust the call stack. Results are memoized by (node_id, node_id) within
// the call.
inline Rational tree_match_eval(NodeRef root_a, NodeRef root_b, const MatchOptions& opts,
                                Algorithm alg, MatchTrace* trace = nullptr) {
    struct Frame {
        NodeRef a, b;
        int t_a, t_b;   // sibling counts within the compared trees
        bool expanded = false;
    };
    auto key_of = [](const NodeRef& a, const NodeRef& b) {
        return ((uint64_t)(uint32_t)a.id() << 32) | (uint64_t)(uint32_t)b.id();
    };

    std::unordered_map<uint64_t, Rational> memo;
    std::vector<Frame> stack;
    stack.push_back({root_a, root_b, 1, 1});

    while (!stack.empty()) {
        Frame frame = stack.back();
        if (!frame.expanded) {
            if (!labels_match(frame.a.label(), frame.b.label(), opts)) {
                memo[key_of(frame.a, frame.b)] = Rational(0);
                stack.pop_back();
                continue;
            }
            stack.back().expanded = true;
            int m = frame.a.degree();
            int n = frame.b.degree();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    stack.push_back({frame.a.child(i), frame.b.child(j), m, n});
            continue;
        }
        stack.pop_back();

        int m = frame.a.degree();
        int n = frame.b.degree();
        DpMatrices mats;
        mats.w = Matrix(m, n);
        mats.m = Matrix(m + 1, n + 1);
        for (int i = 1; i <= m; ++i) {
            for (int j = 1; j <= n; ++j) {
                Rational w = memo.at(key_of(frame.a.child(i - 1), frame.b.child(j - 1)));
                mats.w.at(i - 1, j - 1) = w;
                Rational best = mats.m.at(i, j - 1);
                if (best < mats.m.at(i - 1, j)) best = mats.m.at(i - 1, j);
                Rational diag = mats.m.at(i - 1, j - 1) + w;
                if (best < diag) best = diag;
                mats.m.at(i, j) = best;
            }
        }

        Rational result;
        if (alg == Algorithm::simple) {
            result = mats.m.at(m, n) + Rational(1);
        } else {
            Rational scale(1, std::max(frame.t_a, frame.t_b));
            if (m > 0 && n > 0)
                result = mats.m.at(m, n) * scale;
            else
                result = mats.m.at(m, n) + scale;
        }
        memo[key_of(frame.a, frame.b)] = result;
        if (trace) trace->entries.push_back({frame.a.id(), frame.b.id(), std::move(mats), result});
    }
    return memo.at(key_of(root_a, root_b));
}

}  // namespace detail

// Size of the maximum top-down, label-, order- and ancestry-preserving node
// mapping between the subtrees rooted at a and b. 0 when the root labels
// differ.
inline long long simple_tree_match(const NodeRef& a, const NodeRef& b,
                                   const MatchOptions& opts = {}) {
    return detail::tree_match_eval(a, b, opts, Algorithm::simple).num();
}

// Weighted variant returning an absolute similarity in [0,1]; mismatches in
// deep or crowded sublevels count less.
inline Rational clustered_tree_match(const NodeRef& a, const NodeRef& b,
                                     const MatchOptions& opts = {}) {
    return detail::tree_match_eval(a, b, opts, Algorithm::clustered);
}

// Mapping value divided by the node count of the larger tree.
inline Rational normalized_simple_similarity(const NodeRef& a, const NodeRef& b,
                                             const MatchOptions& opts = {}) {
    long long mapping = simple_tree_match(a, b, opts);
    return Rational(mapping, std::max(node_count(a), node_count(b)));
}

// Similarity used for threshold comparisons: the configured algorithm's
// [0,1]-valued form.
inline SimilarityScore similarity_score(const NodeRef& a, const NodeRef& b,
                                        const MatchOptions& opts) {
    if (opts.algorithm == Algorithm::simple)
        return {normalized_simple_similarity(a, b, opts), ScoreKind::simple_normalized};
    return {clustered_tree_match(a, b, opts), ScoreKind::clustered};
}

inline MatchTrace explain_match(const NodeRef& a, const NodeRef& b, const MatchOptions& opts = {}) {
    MatchTrace trace;
    trace.algorithm = opts.algorithm;
    trace.root_score = detail::tree_match_eval(a, b, opts, opts.algorithm, &trace);
    return trace;
}

namespace detail {

inline std::string node_caption(const DomTree& tree, DomTree::NodeId id) {
    NodeRef n = tree.node(id);
    return n.tag() + "#" + std::to_string(id);
}

}  // namespace detail

// Text rendering of a trace: one W/M table pair per recursive call, cells as
// "p/q" fractions.
inline std::string trace_to_text(const MatchTrace& trace, const DomTree& tree_a,
                                 const DomTree& tree_b) {
    std::string out;
    out += "algorithm: ";
    out += algorithm_name(trace.algorithm);
    out += "\nscore: " + trace.root_score.str() + "\n";
    for (const auto& e : trace.entries) {
        out += "\npair " + detail::node_caption(tree_a, e.a_id) + " x " +
               detail::node_caption(tree_b, e.b_id) + " -> " + e.value.str() + "\n";
        const Matrix& w = e.matrices.w;
        out += "  W (" + std::to_string(w.rows) + "x" + std::to_string(w.cols) + "):\n";
        for (int i = 0; i < w.rows; ++i) {
            out += "   ";
            for (int j = 0; j < w.cols; ++j) out += " " + w.at(i, j).str();
            out += "\n";
        }
        const Matrix& m = e.matrices.m;
        out += "  M (" + std::to_string(m.rows) + "x" + std::to_string(m.cols) + "):\n";
        for (int i = 0; i < m.rows; ++i) {
            out += "   ";
            for (int j = 0; j < m.cols; ++j) out += " " + m.at(i, j).str();
            out += "\n";
        }
    }
    return out;
}

}  // namespace treemend
