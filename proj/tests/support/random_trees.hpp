#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "treemend/dom.hpp"
#include "treemend/html.hpp"

namespace testsupport {

// Random labeled ordered tree: up to max_nodes nodes, single-letter tags
// drawn from an alphabet of `labels` letters. Each new node attaches to a
// uniformly chosen existing node.
inline std::unique_ptr<treemend::TreeNode> random_tree(std::mt19937_64& rng, int max_nodes,
                                                       int labels) {
    auto pick_tag = [&] { return std::string(1, char('a' + rng() % (uint64_t)labels)); };
    int n = 1 + (int)(rng() % (uint64_t)max_nodes);
    auto root = std::make_unique<treemend::TreeNode>(pick_tag());
    std::vector<treemend::TreeNode*> all{root.get()};
    for (int i = 1; i < n; ++i) {
        treemend::TreeNode* parent = all[rng() % all.size()];
        all.push_back(parent->add_child(pick_tag()));
    }
    return root;
}

inline treemend::DomTree random_dom(std::mt19937_64& rng, int max_nodes, int labels) {
    return treemend::DomTree::freeze(*random_tree(rng, max_nodes, labels));
}

// Random page-shaped tree rooted at html with web-ish tags, for the
// adaptation and xpath property tests. Child tags that would trigger the
// parser's implicit-close repair under their parent are not generated, so
// serialize/parse is the identity on these pages.
inline treemend::DomTree random_page(std::mt19937_64& rng, int max_nodes) {
    static const char* tags[] = {"div", "span", "p", "ul", "li", "table", "tr", "td", "a"};
    auto root = std::make_unique<treemend::TreeNode>("html");
    std::vector<treemend::TreeNode*> all{root.get()};
    int n = 2 + (int)(rng() % (uint64_t)max_nodes);
    for (int i = 1; i < n; ++i) {
        treemend::TreeNode* parent = all[rng() % all.size()];
        std::string tag = tags[rng() % 9];
        while (treemend::detail::implicitly_closes(parent->label.tag, tag))
            tag = tags[rng() % 9];
        all.push_back(parent->add_child(tag));
    }
    return treemend::DomTree::freeze(*root);
}

}  // namespace testsupport
