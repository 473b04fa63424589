#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "treemend/eval.hpp"

namespace treemend {

namespace detail {

inline TreeNode* kid(TreeNode* parent, std::string tag,
                     std::map<std::string, std::string> attrs = {}) {
    TreeNode* n = parent->add_child(std::move(tag));
    n->label.attrs = std::move(attrs);
    return n;
}

// Shared layout: nav list, a content table (one structurally distinct first
// cell per row), footer. Signing targets live in the table.
inline std::unique_ptr<TreeNode> table_page(int rows) {
    auto page = std::make_unique<TreeNode>("html");
    kid(page.get(), "head");
    TreeNode* body = kid(page.get(), "body");
    TreeNode* nav = kid(body, "div", {{"id", "nav"}});
    TreeNode* menu = kid(nav, "ul");
    for (int i = 0; i < 5; ++i) kid(kid(menu, "li"), "a", {{"href", "/p" + std::to_string(i)}});
    TreeNode* content = kid(body, "div", {{"id", "content"}});
    TreeNode* table = kid(content, "table");
    for (int r = 1; r <= rows; ++r) {
        TreeNode* tr = kid(table, "tr");
        TreeNode* first = kid(tr, "td");
        TreeNode* box = kid(first, "div");
        for (int s = 0; s < r; ++s) kid(box, "span");
        kid(box, "a", {{"href", "/row" + std::to_string(r)}});
        kid(kid(tr, "td"), "span");
        kid(kid(kid(tr, "td"), "p"), "a");
    }
    TreeNode* footer = kid(body, "div", {{"id", "footer"}});
    kid(kid(footer, "p"), "a");
    return page;
}

// Card layout used by the recall-gap and deep-change families: one rich
// element (heading, crowded list, trailing paragraph) between boilerplate.
inline std::unique_ptr<TreeNode> card_page(int list_items) {
    auto page = std::make_unique<TreeNode>("html");
    kid(page.get(), "head");
    TreeNode* body = kid(page.get(), "body");
    TreeNode* header = kid(body, "div", {{"id", "header"}});
    TreeNode* menu = kid(kid(header, "nav"), "ul");
    for (int i = 0; i < 4; ++i) kid(kid(menu, "li"), "a");
    TreeNode* main = kid(body, "main");
    TreeNode* section = kid(main, "section");
    TreeNode* card = kid(section, "div", {{"class", "card"}});
    kid(kid(card, "h2"), "a");
    TreeNode* list = kid(card, "ul");
    for (int i = 0; i < list_items; ++i) kid(kid(list, "li"), "a");
    TreeNode* para = kid(card, "p");
    kid(para, "a");
    kid(para, "em");
    TreeNode* footer = kid(body, "div", {{"id", "footer"}});
    kid(kid(footer, "p"), "a");
    kid(kid(footer, "p"), "a");
    return page;
}

// Result-list layout for the multi-select families: six identical items.
inline std::unique_ptr<TreeNode> items_page(const std::string& item_class, int spans,
                                            bool span_anchor) {
    auto page = std::make_unique<TreeNode>("html");
    kid(page.get(), "head");
    TreeNode* body = kid(page.get(), "body");
    TreeNode* header = kid(body, "div", {{"id", "header"}});
    TreeNode* menu = kid(kid(header, "nav"), "ul", {{"class", "menu"}});
    for (int i = 0; i < 4; ++i) kid(kid(menu, "li"), "a");
    TreeNode* main = kid(body, "div", {{"id", "main"}});
    TreeNode* list = kid(main, "ul", {{"class", "results"}});
    for (int i = 0; i < 6; ++i) {
        TreeNode* item = kid(list, "li", {{"class", item_class}});
        kid(kid(item, "h3"), "a");
        TreeNode* box = kid(item, "div");
        for (int s = 0; s < spans; ++s) kid(box, "span");
        if (span_anchor) kid(box, "a");
        TreeNode* para = kid(item, "p");
        if (!span_anchor) kid(para, "a");
    }
    TreeNode* footer = kid(body, "div", {{"id", "footer"}});
    kid(kid(footer, "p"), "a");
    kid(kid(footer, "p"), "a");
    return page;
}

inline void mark_nodes(TreeNode* root, const DomTree& frozen, const std::string& xpath,
                       std::vector<TreeNode*>& flat_nodes) {
    std::vector<TreeNode*> nodes, parents;
    flatten_builder(root, nullptr, nodes, parents);
    flat_nodes = nodes;
    auto selected = eval_xpath(frozen, parse_xpath(xpath));
    int k = 0;
    for (const NodeRef& n : selected)
        nodes[(size_t)n.id()]->marker = "m" + std::to_string(k++);
}

// Smallest pleasant rational strictly above `lo` and at most `hi`; prefers a
// two-decimal grid point near the midpoint.
inline Rational threshold_between(const Rational& lo, const Rational& hi) {
    Rational mid = (lo + hi) * Rational(1, 2);
    long long cents = (mid * Rational(100)).num() / (mid * Rational(100)).den();
    Rational t(cents, 100);
    const Rational step(1, 100);
    while (t <= lo) t += step;
    if (t > hi) t = mid;
    return t;
}

struct CorpusCaseSpec {
    std::string name;
    std::string kind;
    std::unique_ptr<TreeNode> page;
    std::string xpath;
    MatchOptions options;
    MutationSpec mutation;
    bool gap_threshold = false;   // pick threshold between the two algorithms' scores
};

inline void write_corpus_case(const std::filesystem::path& dir, CorpusCaseSpec spec) {
    namespace fs = std::filesystem;
    fs::path case_dir = dir / spec.name;
    fs::create_directories(case_dir);

    DomTree original = DomTree::freeze(*spec.page);
    std::vector<TreeNode*> flat;
    mark_nodes(spec.page.get(), original, spec.xpath, flat);
    original = DomTree::freeze(*spec.page);   // now carrying markers

    Signature sig = sign(original, parse_xpath(spec.xpath), spec.options, "original.html");
    DomTree mutated = mutate(original, spec.mutation);

    if (spec.gap_threshold) {
        // per-case threshold documented in the signature; chosen so the
        // clustered score clears it while the normalized simple score does not
        Rational lo(0), hi(1);
        bool saw_mutated = false;
        for (DomTree::NodeId id = 0; (size_t)id < mutated.size(); ++id) {
            NodeRef node = mutated.node(id);
            if (node.marker().empty()) continue;
            Rational best_simple(0), best_clustered(0);
            for (const auto& snap : sig.snapshots) {
                MatchOptions o = sig.options;
                Rational s = normalized_simple_similarity(snap.root(), node, o);
                Rational c = clustered_tree_match(snap.root(), node, o);
                if (s > best_simple) best_simple = s;
                if (c > best_clustered) best_clustered = c;
            }
            if (best_simple == Rational(1)) continue;   // untouched exemplar
            saw_mutated = true;
            if (best_simple > lo) lo = best_simple;
            if (best_clustered < hi) hi = best_clustered;
        }
        if (saw_mutated && lo < hi) sig.options.threshold = threshold_between(lo, hi);
    }

    save_signature(sig, (case_dir / "signature.json").string());
    std::ofstream(case_dir / "original.html", std::ios::binary) << to_html(original);
    std::ofstream(case_dir / "mutated.html", std::ios::binary) << to_html(mutated);

    nlohmann::ordered_json ej;
    ej["kind"] = spec.kind;
    ej["markers"] = collect_markers(mutated);
    std::ofstream(case_dir / "expected.json", std::ios::binary) << ej.dump(2) << "\n";
}

inline MutationOp op_of(MutationKind kind, std::string locus) {
    MutationOp op;
    op.kind = kind;
    op.locus = std::move(locus);
    return op;
}

}  // namespace detail

// Writes the bundled synthetic drift corpus: 56 deterministic cases spanning
// the supported mutation kinds (table-to-div conversions, row insertions,
// deep leaf/branch deletions, attribute churn, moves), tagged by change
// class. Gap cases document a per-case threshold lying between the two
// algorithms' scores, which is what separates their recall.
inline std::vector<std::string> generate_default_corpus(const std::string& out_dir) {
    namespace fs = std::filesystem;
    using detail::CorpusCaseSpec;
    using detail::op_of;
    fs::create_directories(out_dir);

    std::vector<std::string> names;
    int index = 0;
    auto emit = [&](CorpusCaseSpec spec) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%02d", index++);
        spec.name = "case_" + std::string(buf) + "_" + spec.name;
        names.push_back(spec.name);
        detail::write_corpus_case(out_dir, std::move(spec));
    };

    const std::string table_single = "/html[1]/body[1]/div[2]/table[1]/tr[2]/td[1]";
    const std::string table_multi = "/html[1]/body[1]/div[2]/table[1]/tr[2]/td";
    const std::string table_locus = "/html[1]/body[1]/div[2]/table[1]";
    const std::string card_xpath = "/html[1]/body[1]/main[1]/section[1]/div[1]";
    const std::string section_locus = "/html[1]/body[1]/main[1]/section[1]";
    const std::string items_xpath = "/html[1]/body[1]/div[2]/ul[1]/li";
    const std::string items_ul = "/html[1]/body[1]/div[2]/ul[1]";

    // unchanged pages: the stored XPath still works, adaptation short-circuits
    for (int v = 0; v < 3; ++v) {
        CorpusCaseSpec c;
        c.kind = "unchanged";
        c.name = "unchanged_single";
        c.page = detail::table_page(4 + v);
        c.xpath = table_single;
        emit(std::move(c));
    }
    for (int v = 0; v < 3; ++v) {
        CorpusCaseSpec c;
        c.kind = "unchanged";
        c.name = "unchanged_multi";
        c.page = detail::table_page(4 + v);
        c.xpath = table_multi;
        emit(std::move(c));
    }

    // minor structural drift around an intact element: the absolute path
    // breaks, the subtree itself survives verbatim
    for (int v = 0; v < 2; ++v) {
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "retag_table_div";
            c.page = detail::table_page(4 + v);
            c.xpath = table_single;
            auto op = op_of(MutationKind::wrap_element, table_locus);
            op.tag = "div";
            c.mutation.ops.push_back(op);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "retag_table_ul";
            c.page = detail::table_page(5 + v);
            c.xpath = table_single;
            auto retag = op_of(MutationKind::wrap_element, table_locus);
            retag.tag = "ul";
            c.mutation.ops.push_back(retag);
            auto churn = op_of(MutationKind::attribute_change, "/html[1]/body[1]/div[2]");
            churn.attr_name = "class";
            churn.attr_value = "grid";
            c.mutation.ops.push_back(churn);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "relabel_table_seeded";
            c.page = detail::table_page(4 + v);
            c.xpath = table_single;
            c.mutation.seed = 11 + (uint64_t)v;
            c.mutation.ops.push_back(op_of(MutationKind::relabel_within_class, table_locus));
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "move_table_footer";
            c.page = detail::table_page(4 + v);
            c.xpath = table_single;
            auto op = op_of(MutationKind::move_subtree, table_locus);
            op.dest = "/html[1]/body[1]/div[3]";
            c.mutation.ops.push_back(op);
            emit(std::move(c));
        }
    }

    // recall gap: a few deep deletions inside a crowded sublevel; the
    // normalized simple score drops below the documented threshold, the
    // clustered score does not
    for (int list_items : {6, 8, 10}) {
        for (int cut : {2, 3}) {
            {
                CorpusCaseSpec c;
                c.kind = "minor";
                c.name = "gap_branches_l" + std::to_string(list_items) + "_k" + std::to_string(cut);
                c.page = detail::card_page(list_items);
                c.xpath = card_xpath;
                c.gap_threshold = true;
                for (int k = 0; k < cut; ++k)
                    c.mutation.ops.push_back(op_of(
                        MutationKind::delete_branch,
                        card_xpath + "/ul[1]/li[" + std::to_string(list_items - k) + "]"));
                auto retag = op_of(MutationKind::wrap_element, section_locus);
                retag.tag = "div";
                c.mutation.ops.push_back(retag);
                emit(std::move(c));
            }
            {
                CorpusCaseSpec c;
                c.kind = "minor";
                c.name = "gap_leaves_l" + std::to_string(list_items) + "_k" + std::to_string(cut);
                c.page = detail::card_page(list_items);
                c.xpath = card_xpath;
                c.gap_threshold = true;
                for (int k = 0; k < cut; ++k)
                    c.mutation.ops.push_back(op_of(MutationKind::delete_leaf,
                                                   card_xpath + "/ul[1]/li[" +
                                                       std::to_string(list_items - k) + "]/a[1]"));
                // also thin the nav list so the whole page drifts a little
                c.mutation.ops.push_back(op_of(
                    MutationKind::delete_branch, "/html[1]/body[1]/div[1]/nav[1]/ul[1]/li[4]"));
                auto retag = op_of(MutationKind::wrap_element, section_locus);
                retag.tag = "div";
                c.mutation.ops.push_back(retag);
                emit(std::move(c));
            }
        }
    }

    // page edits that leave the stored XPath working: adaptation must not run
    for (int v = 0; v < 2; ++v) {
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "insert_div_before_table";
            c.page = detail::table_page(4 + v);
            c.xpath = table_single;
            auto op = op_of(MutationKind::insert_sibling, table_locus);
            op.tag = "div";
            op.position = "before";
            c.mutation.ops.push_back(op);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "insert_row_after";
            c.page = detail::table_page(4 + v);
            c.xpath = table_single;
            auto op = op_of(MutationKind::insert_sibling, table_locus + "/tr[3]");
            op.clone = true;
            op.position = "after";
            c.mutation.ops.push_back(op);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "href_churn";
            c.page = detail::table_page(4 + v);
            c.xpath = table_single;
            auto op = op_of(MutationKind::attribute_change,
                            table_locus + "/tr[2]/td[1]/div[1]/a[1]");
            op.attr_name = "href";
            op.attr_value = "/moved/row2";
            c.mutation.ops.push_back(op);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "class_token_added";
            c.page = detail::table_page(4 + v);
            c.xpath = table_multi;
            auto op = op_of(MutationKind::attribute_change, "/html[1]/body[1]/div[2]");
            op.attr_name = "class";
            op.attr_value = "wide grid";
            c.mutation.ops.push_back(op);
            emit(std::move(c));
        }
    }

    // deep restructuring: the element survives but nothing scores above the
    // threshold, so both algorithms must report the miss
    for (int v = 0; v < 2; ++v) {
        {
            CorpusCaseSpec c;
            c.kind = "deep";
            c.name = "deep_restructure";
            c.page = detail::card_page(8 + v);
            c.xpath = card_xpath;
            auto h = op_of(MutationKind::wrap_element, card_xpath + "/h2[1]");
            h.tag = "h4";
            c.mutation.ops.push_back(h);
            c.mutation.ops.push_back(op_of(MutationKind::delete_branch, card_xpath + "/ul[1]"));
            auto p = op_of(MutationKind::wrap_element, card_xpath + "/p[1]");
            p.tag = "footer";
            c.mutation.ops.push_back(p);
            auto retag = op_of(MutationKind::wrap_element, section_locus);
            retag.tag = "div";
            c.mutation.ops.push_back(retag);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "deep";
            c.name = "deep_rewrite";
            c.page = detail::card_page(6 + v);
            c.xpath = card_xpath;
            c.mutation.ops.push_back(op_of(MutationKind::delete_branch, card_xpath + "/ul[1]"));
            c.mutation.ops.push_back(op_of(MutationKind::delete_branch, card_xpath + "/p[1]"));
            auto h = op_of(MutationKind::wrap_element, card_xpath + "/h2[1]");
            h.tag = "h3";
            c.mutation.ops.push_back(h);
            auto retag = op_of(MutationKind::wrap_element, section_locus);
            retag.tag = "div";
            c.mutation.ops.push_back(retag);
            emit(std::move(c));
        }
    }
    {
        // the signed element is gone entirely; correct extraction is nothing
        CorpusCaseSpec c;
        c.kind = "deep";
        c.name = "element_deleted";
        c.page = detail::card_page(8);
        c.xpath = card_xpath;
        c.mutation.ops.push_back(op_of(MutationKind::delete_branch, card_xpath));
        emit(std::move(c));
    }

    // stale-XPath traps: the original path still matches, but the wrong row
    for (int v = 0; v < 2; ++v) {
        CorpusCaseSpec c;
        c.kind = "trap";
        c.name = "row_inserted_before";
        c.page = detail::table_page(4 + v);
        c.xpath = table_single;
        auto op = op_of(MutationKind::insert_sibling, table_locus + "/tr[1]");
        op.clone = true;
        op.position = "before";
        c.mutation.ops.push_back(op);
        emit(std::move(c));
    }
    {
        CorpusCaseSpec c;
        c.kind = "trap";
        c.name = "row_inserted_before_multi";
        c.page = detail::table_page(4);
        c.xpath = table_multi;
        auto op = op_of(MutationKind::insert_sibling, table_locus + "/tr[1]");
        op.clone = true;
        op.position = "before";
        c.mutation.ops.push_back(op);
        emit(std::move(c));
    }

    // comparable-tag conversions: list markup rebuilt as divs, matched via
    // tag classes plus a class-attribute check
    for (int v = 0; v < 2; ++v) {
        MatchOptions comparable;
        comparable.attr_keys = {"class"};
        comparable.tag_classes = default_tag_classes();
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "items_all_divs";
            c.page = detail::items_page("item", 1 + v, true);
            c.xpath = items_xpath;
            c.options = comparable;
            auto li = op_of(MutationKind::wrap_element, items_xpath);
            li.tag = "div";
            c.mutation.ops.push_back(li);
            auto ul = op_of(MutationKind::wrap_element, items_ul);
            ul.tag = "div";
            c.mutation.ops.push_back(ul);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "items_list_to_ol";
            c.page = detail::items_page("item", 2 + v, true);
            c.xpath = items_xpath;
            c.options = comparable;
            auto ul = op_of(MutationKind::wrap_element, items_ul);
            ul.tag = "ol";
            c.mutation.ops.push_back(ul);
            emit(std::move(c));
        }
        {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "items_divs_in_ul";
            c.page = detail::items_page("item", 1 + v, true);
            c.xpath = items_xpath;
            c.options = comparable;
            auto li = op_of(MutationKind::wrap_element, items_xpath);
            li.tag = "div";
            c.mutation.ops.push_back(li);
            emit(std::move(c));
        }
    }

    // multi-select recall gap: two of six items lose deep leaves
    for (int spans : {7, 8, 9, 10}) {
        for (int cut : {2, 3}) {
            CorpusCaseSpec c;
            c.kind = "minor";
            c.name = "gap_multi_s" + std::to_string(spans) + "_k" + std::to_string(cut);
            c.page = detail::items_page("row", spans, false);
            c.xpath = items_xpath;
            c.gap_threshold = true;
            for (int item : {2, 5}) {
                for (int k = 0; k < cut; ++k) {
                    c.mutation.ops.push_back(
                        op_of(MutationKind::delete_leaf,
                              items_ul + "/li[" + std::to_string(item) + "]/div[1]/span[" +
                                  std::to_string(spans - k) + "]"));
                }
            }
            auto ul = op_of(MutationKind::wrap_element, items_ul);
            ul.tag = "ol";
            c.mutation.ops.push_back(ul);
            emit(std::move(c));
        }
    }

    return names;
}

}  // namespace treemend
