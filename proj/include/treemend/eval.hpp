#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "treemend/adapt.hpp"
#include "treemend/dom.hpp"
#include "treemend/html.hpp"
#include "treemend/signature.hpp"
#include "treemend/xpath.hpp"

namespace treemend {

struct MutationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Metrics

struct EvalCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;

    std::optional<Rational> precision() const {
        if (tp + fp == 0) return std::nullopt;
        return Rational(tp, tp + fp);
    }

    std::optional<Rational> recall() const {
        if (tp + fn == 0) return std::nullopt;
        return Rational(tp, tp + fn);
    }

    std::optional<Rational> f_measure() const {
        auto p = precision();
        auto r = recall();
        if (!p || !r) return std::nullopt;
        Rational sum = *p + *r;
        if (sum.is_zero()) return std::nullopt;
        return Rational(2) * *p * *r / sum;
    }

    EvalCounts& operator+=(const EvalCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

// tp = expected hits, fp = extracted nodes that are not ground truth (unmarked
// nodes included), fn = ground truth the adapted wrapper missed. Marker sets
// identify nodes; an empty actual marker means the node is not ground truth.
inline EvalCounts score_run(const std::set<std::string>& expected,
                            const std::vector<std::string>& actual_markers) {
    EvalCounts counts;
    std::set<std::string> matched;
    for (const auto& m : actual_markers) {
        if (!m.empty() && expected.count(m) && !matched.count(m)) {
            matched.insert(m);
            ++counts.tp;
        } else {
            ++counts.fp;
        }
    }
    counts.fn = (long long)(expected.size() - matched.size());
    return counts;
}

// ---------------------------------------------------------------------------
// Synthetic page drift

enum class MutationKind {
    insert_sibling,
    delete_leaf,
    delete_branch,
    relabel_within_class,
    wrap_element,
    attribute_change,
    move_subtree,
};

inline std::optional<MutationKind> mutation_kind_from_name(std::string_view s) {
    if (s == "insert_sibling") return MutationKind::insert_sibling;
    if (s == "delete_leaf") return MutationKind::delete_leaf;
    if (s == "delete_branch") return MutationKind::delete_branch;
    if (s == "relabel_within_class") return MutationKind::relabel_within_class;
    if (s == "wrap_element") return MutationKind::wrap_element;
    if (s == "attribute_change") return MutationKind::attribute_change;
    if (s == "move_subtree") return MutationKind::move_subtree;
    return std::nullopt;
}

struct MutationOp {
    MutationKind kind = MutationKind::attribute_change;
    std::string locus;        // xpath; the op applies to every selected node
    std::string tag;          // insert_sibling: new element; wrap_element/relabel: target tag
    std::string position = "after";   // insert_sibling
    bool clone = false;               // insert_sibling: clone the locus target
    std::string attr_name;            // attribute_change
    std::string attr_value;
    bool remove_attr = false;
    std::string dest;                 // move_subtree: xpath of the new parent
};

struct MutationSpec {
    uint64_t seed = 0;
    std::vector<MutationOp> ops;
};

inline MutationSpec mutation_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw MutationError("mutation spec: root is not an object");
    MutationSpec spec;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "seed" && it.key() != "operations")
            throw MutationError("mutation spec: unknown field '" + it.key() + "'");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) throw MutationError("mutation spec: seed not integer");
        spec.seed = j["seed"].get<uint64_t>();
    }
    if (!j.contains("operations") || !j["operations"].is_array())
        throw MutationError("mutation spec: missing operations array");
    for (const auto& o : j["operations"]) {
        if (!o.is_object()) throw MutationError("mutation spec: operation is not an object");
        MutationOp op;
        if (!o.contains("kind") || !o["kind"].is_string())
            throw MutationError("mutation spec: operation missing kind");
        auto kind = mutation_kind_from_name(o["kind"].get<std::string>());
        if (!kind)
            throw MutationError("mutation spec: unknown kind '" + o["kind"].get<std::string>() +
                                "'");
        op.kind = *kind;
        if (!o.contains("locus") || !o["locus"].is_string())
            throw MutationError("mutation spec: operation missing locus");
        op.locus = o["locus"].get<std::string>();
        auto str = [&](const char* key) -> std::string {
            return o.contains(key) && o[key].is_string() ? o[key].get<std::string>() : "";
        };
        op.tag = detail::lower(!str("to").empty() ? str("to") : str("tag"));
        op.position = str("position").empty() ? "after" : str("position");
        op.clone = o.contains("clone") && o["clone"].is_boolean() && o["clone"].get<bool>();
        op.attr_name = str("name");
        op.attr_value = str("value");
        op.remove_attr = o.contains("remove") && o["remove"].is_boolean() && o["remove"].get<bool>();
        op.dest = str("dest");
        spec.ops.push_back(std::move(op));
    }
    return spec;
}

inline MutationSpec load_mutation_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MutationError("mutation spec: cannot read '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw MutationError(std::string("mutation spec: invalid JSON: ") + e.what());
    }
    return mutation_spec_from_json(j);
}

namespace detail {

// Pre-order pointer list aligned with DomTree::freeze node ids.
inline void flatten_builder(TreeNode* node, TreeNode* parent, std::vector<TreeNode*>& nodes,
                            std::vector<TreeNode*>& parents) {
    nodes.push_back(node);
    parents.push_back(parent);
    for (auto& c : node->children) flatten_builder(c.get(), node, nodes, parents);
}

inline std::unique_ptr<TreeNode> detach_child(TreeNode* parent, TreeNode* child) {
    for (auto it = parent->children.begin(); it != parent->children.end(); ++it) {
        if (it->get() == child) {
            auto owned = std::move(*it);
            parent->children.erase(it);
            return owned;
        }
    }
    return nullptr;
}

inline size_t child_index(TreeNode* parent, TreeNode* child) {
    for (size_t i = 0; i < parent->children.size(); ++i)
        if (parent->children[i].get() == child) return i;
    return parent->children.size();
}

inline bool builder_contains(TreeNode* root, TreeNode* needle) {
    if (root == needle) return true;
    for (auto& c : root->children)
        if (builder_contains(c.get(), needle)) return true;
    return false;
}

inline std::unique_ptr<TreeNode> clone_builder(const TreeNode& src, bool keep_markers) {
    auto out = std::make_unique<TreeNode>();
    out->label = src.label;
    out->text = src.text;
    if (keep_markers) out->marker = src.marker;
    for (const auto& c : src.children) out->children.push_back(clone_builder(*c, keep_markers));
    return out;
}

}  // namespace detail

// Applies the spec's operations in order; each locus is evaluated against the
// tree state left by the preceding operations. Ground-truth markers ride on
// the nodes themselves: relabel/wrap/move keep them, deletions take them
// along.
inline DomTree mutate(const DomTree& page, const MutationSpec& spec) {
    std::unique_ptr<TreeNode> root = to_builder(page.root(), true);
    std::mt19937_64 rng(spec.seed);

    for (size_t op_index = 0; op_index < spec.ops.size(); ++op_index) {
        const MutationOp& op = spec.ops[op_index];
        auto fail = [&](const std::string& msg) {
            throw MutationError("mutation op " + std::to_string(op_index) + ": " + msg);
        };

        DomTree current = DomTree::freeze(*root);
        std::vector<TreeNode*> nodes, parents;
        detail::flatten_builder(root.get(), nullptr, nodes, parents);

        std::vector<NodeRef> selected;
        try {
            selected = eval_xpath(current, parse_xpath(op.locus));
        } catch (const XPathError& e) {
            fail(std::string("bad locus: ") + e.what());
        }
        if (selected.empty()) fail("locus '" + op.locus + "' resolves to nothing");

        // descendants first so nested selections stay valid while editing
        std::vector<DomTree::NodeId> ids;
        for (const NodeRef& n : selected) ids.push_back(n.id());
        std::sort(ids.rbegin(), ids.rend());

        for (DomTree::NodeId id : ids) {
            TreeNode* target = nodes[(size_t)id];
            TreeNode* parent = parents[(size_t)id];
            switch (op.kind) {
                case MutationKind::insert_sibling: {
                    if (!parent) fail("cannot insert a sibling of the root");
                    std::unique_ptr<TreeNode> fresh;
                    if (op.clone)
                        fresh = detail::clone_builder(*target, false);
                    else if (!op.tag.empty())
                        fresh = std::make_unique<TreeNode>(op.tag);
                    else
                        fail("insert_sibling needs 'tag' or 'clone'");
                    size_t at = detail::child_index(parent, target);
                    if (op.position == "after") ++at;
                    else if (op.position != "before") fail("position must be before or after");
                    parent->children.insert(parent->children.begin() + (long)at, std::move(fresh));
                    break;
                }
                case MutationKind::delete_leaf:
                    if (!target->children.empty()) fail("delete_leaf: locus is not a leaf");
                    [[fallthrough]];
                case MutationKind::delete_branch: {
                    if (!parent) fail("cannot delete the root");
                    detail::detach_child(parent, target);
                    break;
                }
                case MutationKind::relabel_within_class: {
                    std::string to = op.tag;
                    if (to.empty()) {
                        const TagClasses classes = default_tag_classes();
                        std::vector<std::string> choices;
                        for (const auto& cls : classes) {
                            if (std::find(cls.begin(), cls.end(), target->label.tag) == cls.end())
                                continue;
                            for (const auto& t : cls)
                                if (t != target->label.tag) choices.push_back(t);
                            break;
                        }
                        if (choices.empty())
                            fail("no tag class contains '" + target->label.tag + "'");
                        to = choices[rng() % choices.size()];
                    }
                    target->label.tag = to;
                    break;
                }
                case MutationKind::wrap_element: {
                    if (op.tag.empty()) fail("wrap_element needs 'to'");
                    target->label.tag = op.tag;
                    break;
                }
                case MutationKind::attribute_change: {
                    if (op.attr_name.empty()) fail("attribute_change needs 'name'");
                    if (!is_retained_attr(op.attr_name))
                        fail("attribute '" + op.attr_name + "' is not retained");
                    if (op.remove_attr)
                        target->label.attrs.erase(op.attr_name);
                    else
                        target->label.attrs[op.attr_name] = op.attr_value;
                    break;
                }
                case MutationKind::move_subtree: {
                    if (!parent) fail("cannot move the root");
                    if (op.dest.empty()) fail("move_subtree needs 'dest'");
                    std::vector<NodeRef> dests;
                    try {
                        dests = eval_xpath(current, parse_xpath(op.dest));
                    } catch (const XPathError& e) {
                        fail(std::string("bad dest: ") + e.what());
                    }
                    if (dests.empty()) fail("dest '" + op.dest + "' resolves to nothing");
                    TreeNode* dest = nodes[(size_t)dests.front().id()];
                    if (detail::builder_contains(target, dest))
                        fail("dest lies inside the moved subtree");
                    auto owned = detail::detach_child(parent, target);
                    dest->children.push_back(std::move(owned));
                    break;
                }
            }
        }
    }
    return DomTree::freeze(*root);
}

inline std::vector<std::string> collect_markers(const DomTree& tree) {
    std::vector<std::string> out;
    for (DomTree::NodeId id = 0; (size_t)id < tree.size(); ++id) {
        const std::string& m = tree.node(id).marker();
        if (!m.empty()) out.push_back(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corpus runner

struct CorpusCaseResult {
    std::string name;
    std::string kind;
    Rational threshold;
    std::map<Algorithm, EvalCounts> counts;
    std::string error;   // non-empty: case skipped
};

struct CorpusRunResult {
    std::vector<CorpusCaseResult> cases;
    std::map<Algorithm, EvalCounts> totals;
    std::map<std::string, std::map<Algorithm, EvalCounts>> by_kind;
    size_t skipped = 0;
};

// One directory per case: original.html, signature.json, mutated.html,
// expected.json ({"kind": ..., "markers": [...]}). A malformed case is
// reported and skipped; the run never aborts.
inline CorpusRunResult run_corpus(const std::string& dir, const std::vector<Algorithm>& algos) {
    namespace fs = std::filesystem;
    CorpusRunResult result;
    std::vector<fs::path> case_dirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) case_dirs.push_back(entry.path());
    std::sort(case_dirs.begin(), case_dirs.end());

    for (const auto& path : case_dirs) {
        CorpusCaseResult cres;
        cres.name = path.filename().string();
        try {
            Signature sig = load_signature((path / "signature.json").string());
            DomTree mutated = parse_html_file((path / "mutated.html").string());

            std::ifstream ein(path / "expected.json", std::ios::binary);
            if (!ein) throw std::runtime_error("missing expected.json");
            nlohmann::json ej = nlohmann::json::parse(ein);
            std::set<std::string> expected;
            for (const auto& m : ej.at("markers")) expected.insert(m.get<std::string>());
            cres.kind = ej.value("kind", "unspecified");
            cres.threshold = sig.options.threshold;

            for (Algorithm algo : algos) {
                MatchOptions opts = sig.options;
                opts.algorithm = algo;
                AdaptationReport report = adapt(mutated, sig, opts);
                std::vector<std::string> actual;
                for (const auto& r : report.results) actual.push_back(r.node.marker());
                cres.counts[algo] = score_run(expected, actual);
            }
        } catch (const std::exception& e) {
            cres.error = e.what();
            ++result.skipped;
        }
        if (cres.error.empty()) {
            for (const auto& [algo, counts] : cres.counts) {
                result.totals[algo] += counts;
                result.by_kind[cres.kind][algo] += counts;
            }
        }
        result.cases.push_back(std::move(cres));
    }
    return result;
}

inline std::string format_metric(const std::optional<Rational>& v) {
    return v ? v->percent_str() : "n/a";
}

// Tab-delimited table shaped like the tp/fp/fn comparison the harness is
// modeled on: one row per case, totals, then recall/precision/F rows.
inline std::string render_corpus_table(const CorpusRunResult& result,
                                       const std::vector<Algorithm>& algos) {
    std::ostringstream out;
    out << "case\tkind\tthr";
    for (Algorithm a : algos)
        out << "\t" << algorithm_name(a) << ".tp\t" << algorithm_name(a) << ".fp\t"
            << algorithm_name(a) << ".fn";
    out << "\n";
    for (const auto& c : result.cases) {
        out << c.name << "\t" << c.kind << "\t";
        if (!c.error.empty()) {
            out << "-\tSKIPPED: " << c.error << "\n";
            continue;
        }
        out << c.threshold.decimal_str(4);
        for (Algorithm a : algos) {
            const EvalCounts& e = c.counts.at(a);
            out << "\t" << e.tp << "\t" << e.fp << "\t" << e.fn;
        }
        out << "\n";
    }
    out << "total\t\t";
    for (Algorithm a : algos) {
        EvalCounts e = result.totals.count(a) ? result.totals.at(a) : EvalCounts{};
        out << "\t" << e.tp << "\t" << e.fp << "\t" << e.fn;
    }
    out << "\n";
    for (const char* row : {"recall", "precision", "f-measure"}) {
        out << row << "\t\t";
        for (Algorithm a : algos) {
            EvalCounts e = result.totals.count(a) ? result.totals.at(a) : EvalCounts{};
            std::optional<Rational> v;
            if (std::string_view(row) == "recall") v = e.recall();
            else if (std::string_view(row) == "precision") v = e.precision();
            else v = e.f_measure();
            out << "\t" << format_metric(v) << "\t\t";
        }
        out << "\n";
    }
    if (result.skipped > 0) out << "skipped\t" << result.skipped << "\n";
    return out.str();
}

}  // namespace treemend
