#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "treemend/dom.hpp"
#include "treemend/xpath.hpp"

namespace treemend {

struct SignatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The stored XPath selected nothing, so there is nothing to snapshot.
struct CannotSignError : SignatureError {
    using SignatureError::SignatureError;
};

enum class SignatureMode { single, multi };

inline constexpr int kSignatureVersion = 1;

// Persisted wrapper state: the original XPath plus structural snapshots of
// the elements it extracted. The source page itself is not stored, so
// signature size is bounded by the snapshot subtrees.
struct Signature {
    int version = kSignatureVersion;
    std::string original_xpath;
    SignatureMode mode = SignatureMode::single;
    std::vector<DomTree> snapshots;
    MatchOptions options;
    std::optional<std::string> created_from;

    friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature sign(const DomTree& page, const XPathExpr& xpath, const MatchOptions& opts,
                      std::optional<std::string> created_from = std::nullopt) {
    std::vector<NodeRef> nodes = eval_xpath(page, xpath);
    if (nodes.empty())
        throw CannotSignError("sign: xpath '" + xpath.str() + "' selects nothing");
    Signature sig;
    sig.original_xpath = xpath.str();
    sig.mode = (nodes.size() > 1 || !xpath.steps.back().index) ? SignatureMode::multi
                                                               : SignatureMode::single;
    for (const NodeRef& n : nodes) sig.snapshots.push_back(subtree_copy(n));
    sig.options = opts;
    sig.created_from = std::move(created_from);
    return sig;
}

namespace detail {

inline nlohmann::ordered_json node_to_json(const NodeRef& n) {
    nlohmann::ordered_json j;
    j["tag"] = n.tag();
    if (!n.label().attrs.empty()) j["attrs"] = n.label().attrs;
    if (n.is_text() && !n.text().empty()) j["text"] = n.text();
    if (n.degree() > 0) {
        auto& children = j["children"] = nlohmann::ordered_json::array();
        for (int i = 0; i < n.degree(); ++i) children.push_back(node_to_json(n.child(i)));
    }
    return j;
}

inline std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw SignatureError("signature: " + where + " is not an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "tag" && it.key() != "attrs" && it.key() != "text" &&
            it.key() != "children")
            throw SignatureError("signature: unknown field '" + it.key() + "' in " + where);
    }
    if (!j.contains("tag") || !j["tag"].is_string() || j["tag"].get<std::string>().empty())
        throw SignatureError("signature: missing or empty tag in " + where);
    auto node = std::make_unique<TreeNode>(lower(j["tag"].get<std::string>()));
    if (j.contains("attrs")) {
        if (!j["attrs"].is_object())
            throw SignatureError("signature: attrs is not an object in " + where);
        for (auto it = j["attrs"].begin(); it != j["attrs"].end(); ++it) {
            if (!is_retained_attr(it.key()))
                throw SignatureError("signature: attribute '" + it.key() +
                                     "' is not retained in " + where);
            if (!it.value().is_string())
                throw SignatureError("signature: attribute '" + it.key() +
                                     "' is not a string in " + where);
            node->label.attrs[it.key()] = it.value().get<std::string>();
        }
    }
    if (j.contains("text")) {
        if (!j["text"].is_string())
            throw SignatureError("signature: text is not a string in " + where);
        node->text = j["text"].get<std::string>();
    }
    if (j.contains("children")) {
        if (!j["children"].is_array())
            throw SignatureError("signature: children is not an array in " + where);
        size_t k = 0;
        for (const auto& c : j["children"])
            node->children.push_back(
                node_from_json(c, where + ".children[" + std::to_string(k++) + "]"));
    }
    return node;
}

inline nlohmann::ordered_json options_to_json(const MatchOptions& o) {
    nlohmann::ordered_json j;
    j["algorithm"] = std::string(algorithm_name(o.algorithm));
    j["threshold"] = o.threshold.str();
    j["attr_keys"] = o.attr_keys;
    j["tag_classes"] = o.tag_classes;
    j["prune_nested"] = o.prune_nested;
    j["max_size_ratio"] = o.max_size_ratio ? nlohmann::ordered_json(o.max_size_ratio->str())
                                           : nlohmann::ordered_json(nullptr);
    return j;
}

inline Rational parse_ratio_field(const nlohmann::json& v, const std::string& name,
                                  bool unit_range) {
    std::optional<Rational> r;
    if (v.is_string()) r = Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) r = Rational(v.get<long long>());
    if (!r) throw SignatureError("signature: " + name + " is not a rational");
    if (unit_range && (*r < Rational(0) || *r > Rational(1)))
        throw SignatureError("signature: " + name + " outside [0,1]");
    return *r;
}

inline MatchOptions options_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SignatureError("signature: options is not an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "algorithm" && k != "threshold" && k != "attr_keys" && k != "tag_classes" &&
            k != "prune_nested" && k != "max_size_ratio")
            throw SignatureError("signature: unknown field 'options." + k + "'");
    }
    MatchOptions o;
    if (j.contains("algorithm")) {
        std::optional<Algorithm> a;
        if (j["algorithm"].is_string()) a = algorithm_from_name(j["algorithm"].get<std::string>());
        if (!a) throw SignatureError("signature: unknown algorithm");
        o.algorithm = *a;
    }
    if (j.contains("threshold")) o.threshold = parse_ratio_field(j["threshold"], "threshold", true);
    if (j.contains("attr_keys")) {
        if (!j["attr_keys"].is_array())
            throw SignatureError("signature: attr_keys is not an array");
        for (const auto& k : j["attr_keys"]) {
            std::string key = k.is_string() ? k.get<std::string>() : "";
            if (key != "id" && key != "class" && key != "name")
                throw SignatureError("signature: attr_keys entry must be id, class or name");
            o.attr_keys.push_back(key);
        }
    }
    if (j.contains("tag_classes")) {
        if (!j["tag_classes"].is_array())
            throw SignatureError("signature: tag_classes is not an array");
        for (const auto& cls : j["tag_classes"]) {
            if (!cls.is_array()) throw SignatureError("signature: tag class is not an array");
            std::vector<std::string> tags;
            for (const auto& t : cls) {
                if (!t.is_string() || t.get<std::string>().empty())
                    throw SignatureError("signature: tag class entry is not a tag name");
                tags.push_back(lower(t.get<std::string>()));
            }
            o.tag_classes.push_back(std::move(tags));
        }
    }
    if (j.contains("prune_nested")) {
        if (!j["prune_nested"].is_boolean())
            throw SignatureError("signature: prune_nested is not a boolean");
        o.prune_nested = j["prune_nested"].get<bool>();
    }
    if (j.contains("max_size_ratio") && !j["max_size_ratio"].is_null()) {
        Rational r = parse_ratio_field(j["max_size_ratio"], "max_size_ratio", false);
        if (r < Rational(1)) throw SignatureError("signature: max_size_ratio below 1");
        o.max_size_ratio = r;
    }
    return o;
}

}  // namespace detail

inline nlohmann::ordered_json signature_to_json(const Signature& sig) {
    nlohmann::ordered_json j;
    j["version"] = sig.version;
    j["original_xpath"] = sig.original_xpath;
    j["mode"] = sig.mode == SignatureMode::single ? "single" : "multi";
    auto& snaps = j["snapshots"] = nlohmann::ordered_json::array();
    for (const auto& s : sig.snapshots) snaps.push_back(detail::node_to_json(s.root()));
    j["options"] = detail::options_to_json(sig.options);
    if (sig.created_from) j["created_from"] = *sig.created_from;
    return j;
}

inline void save_signature(const Signature& sig, std::ostream& out) {
    out << signature_to_json(sig).dump(2) << "\n";
    if (!out) throw SignatureError("signature: write failed");
}

inline void save_signature(const Signature& sig, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SignatureError("signature: cannot write '" + path + "'");
    save_signature(sig, out);
}

inline Signature load_signature(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SignatureError(std::string("signature: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SignatureError("signature: root is not an object");
    // version gate comes first: future formats must fail here, not on fields
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw SignatureError("signature: missing version");
    int version = j["version"].get<int>();
    if (version != kSignatureVersion)
        throw SignatureError("signature: unknown version " + std::to_string(version));
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "version" && k != "original_xpath" && k != "mode" && k != "snapshots" &&
            k != "options" && k != "created_from")
            throw SignatureError("signature: unknown field '" + k + "'");
    }
    Signature sig;
    sig.version = version;
    if (!j.contains("original_xpath") || !j["original_xpath"].is_string())
        throw SignatureError("signature: missing original_xpath");
    sig.original_xpath = j["original_xpath"].get<std::string>();
    try {
        parse_xpath(sig.original_xpath);
    } catch (const XPathError& e) {
        throw SignatureError(std::string("signature: bad original_xpath: ") + e.what());
    }
    if (!j.contains("mode") || !j["mode"].is_string())
        throw SignatureError("signature: missing mode");
    std::string mode = j["mode"].get<std::string>();
    if (mode != "single" && mode != "multi")
        throw SignatureError("signature: unknown mode '" + mode + "'");
    sig.mode = mode == "single" ? SignatureMode::single : SignatureMode::multi;
    if (!j.contains("snapshots") || !j["snapshots"].is_array() || j["snapshots"].empty())
        throw SignatureError("signature: snapshots must be a non-empty array");
    size_t k = 0;
    for (const auto& s : j["snapshots"]) {
        auto node = detail::node_from_json(s, "snapshots[" + std::to_string(k++) + "]");
        sig.snapshots.push_back(DomTree::freeze(*node));
    }
    if (sig.mode == SignatureMode::single && sig.snapshots.size() != 1)
        throw SignatureError("signature: single mode requires exactly one snapshot");
    if (j.contains("options")) sig.options = detail::options_from_json(j["options"]);
    if (j.contains("created_from")) {
        if (!j["created_from"].is_string())
            throw SignatureError("signature: created_from is not a string");
        sig.created_from = j["created_from"].get<std::string>();
    }
    return sig;
}

inline Signature load_signature(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SignatureError("signature: cannot read '" + path + "'");
    return load_signature(in);
}

}  // namespace treemend
