// Command-line front end for the wrapper life-cycle: sign a working XPath,
// adapt it after the page changes, score tree pairs, mutate fixtures and run
// the evaluation harness.
//
// Exit codes: 0 success; 1 usage or I/O error; 2 empty outcome (the XPath
// selects nothing when signing, or no candidate clears the threshold when
// adapting).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "treemend/treemend.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitEmpty = 2;

treemend::Rational parse_ratio_arg(const std::string& text, const std::string& flag) {
    auto r = treemend::Rational::parse(text);
    if (!r || *r < treemend::Rational(0) || *r > treemend::Rational(1))
        throw CLI::ValidationError(flag, "expected a rational in [0,1] like 0.85 or 17/20");
    return *r;
}

std::vector<std::string> parse_attr_list(const std::string& text) {
    std::vector<std::string> keys;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        if (item != "id" && item != "class" && item != "name")
            throw CLI::ValidationError("--attrs", "entries must be id, class or name");
        keys.push_back(item);
    }
    return keys;
}

std::optional<treemend::Rational> env_threshold() {
    const char* raw = std::getenv("TREEMEND_THRESHOLD");
    if (!raw) return std::nullopt;
    auto r = treemend::Rational::parse(raw);
    if (!r || *r < treemend::Rational(0) || *r > treemend::Rational(1)) {
        std::cerr << "warning: ignoring invalid TREEMEND_THRESHOLD '" << raw << "'\n";
        return std::nullopt;
    }
    return r;
}

void print_score(const treemend::Rational& score) {
    if (score.is_integer())
        std::cout << score.str() << "\n";
    else
        std::cout << score.str() << " (" << score.decimal_str() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"treemend - wrapper repair by tree matching"};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "verbose diagnostics on stderr");

    // ---- sign ----
    auto* sign_cmd = app.add_subcommand("sign", "snapshot the elements an XPath extracts");
    std::string sign_page, sign_xpath, sign_out, sign_threshold, sign_attrs;
    bool sign_comparable = false;
    sign_cmd->add_option("--page", sign_page, "HTML file")->required();
    sign_cmd->add_option("--xpath", sign_xpath, "XPath to sign")->required();
    sign_cmd->add_option("--out", sign_out, "signature file to write")->required();
    sign_cmd->add_option("--threshold", sign_threshold, "similarity threshold (default 0.85)");
    sign_cmd->add_option("--attrs", sign_attrs, "comma list of attributes to fold into labels");
    sign_cmd->add_flag("--comparable-tags", sign_comparable, "enable tag equivalence classes");

    // ---- adapt ----
    auto* adapt_cmd = app.add_subcommand("adapt", "repair a signed XPath on a changed page");
    std::string adapt_page, adapt_sig, adapt_threshold, adapt_algorithm, adapt_out;
    bool adapt_explain = false;
    adapt_cmd->add_option("--page", adapt_page, "HTML file")->required();
    adapt_cmd->add_option("--signature", adapt_sig, "signature file")->required();
    adapt_cmd->add_option("--threshold", adapt_threshold, "override the stored threshold");
    adapt_cmd->add_option("--algorithm", adapt_algorithm, "simple or clustered")
        ->check(CLI::IsMember({"simple", "clustered"}));
    adapt_cmd->add_flag("--explain", adapt_explain, "dump W/M matrix traces for the results");
    adapt_cmd->add_option("--out", adapt_out, "report file to write")->required();

    // ---- match ----
    auto* match_cmd = app.add_subcommand("match", "score the similarity of two subtrees");
    std::string m_page_a, m_xpath_a, m_page_b, m_xpath_b, m_algorithm = "clustered", m_attrs;
    bool m_comparable = false;
    match_cmd->add_option("--page-a", m_page_a, "first HTML file")->required();
    match_cmd->add_option("--xpath-a", m_xpath_a, "subtree root in page A")->required();
    match_cmd->add_option("--page-b", m_page_b, "second HTML file")->required();
    match_cmd->add_option("--xpath-b", m_xpath_b, "subtree root in page B")->required();
    match_cmd->add_option("--algorithm", m_algorithm, "simple, clustered or simple-normalized")
        ->check(CLI::IsMember({"simple", "clustered", "simple-normalized"}));
    match_cmd->add_option("--attrs", m_attrs, "comma list of attributes to fold into labels");
    match_cmd->add_flag("--comparable-tags", m_comparable, "enable tag equivalence classes");

    // ---- mutate ----
    auto* mutate_cmd = app.add_subcommand("mutate", "apply a drift spec to a page");
    std::string mu_page, mu_spec, mu_out;
    std::optional<uint64_t> mu_seed;
    mutate_cmd->add_option("--page", mu_page, "HTML file")->required();
    mutate_cmd->add_option("--spec", mu_spec, "mutation spec (JSON)")->required();
    mutate_cmd->add_option("--seed", mu_seed, "override the spec's seed");
    mutate_cmd->add_option("--out", mu_out, "mutated HTML file to write")->required();

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "run a drift corpus and report tp/fp/fn metrics");
    std::string ev_corpus, ev_algorithm = "both", ev_out;
    eval_cmd->add_option("--corpus", ev_corpus, "corpus directory")->required();
    eval_cmd->add_option("--algorithm", ev_algorithm, "simple, clustered or both")
        ->check(CLI::IsMember({"simple", "clustered", "both"}));
    eval_cmd->add_option("--out", ev_out, "also write the table to this file");

    // ---- gen-corpus ----
    auto* gen_cmd = app.add_subcommand("gen-corpus", "write the bundled synthetic drift corpus");
    std::string gen_out;
    gen_cmd->add_option("--out", gen_out, "directory to populate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (*sign_cmd) {
            treemend::MatchOptions opts;
            if (auto env = env_threshold()) opts.threshold = *env;
            if (!sign_threshold.empty())
                opts.threshold = parse_ratio_arg(sign_threshold, "--threshold");
            if (!sign_attrs.empty()) opts.attr_keys = parse_attr_list(sign_attrs);
            if (sign_comparable) opts.tag_classes = treemend::default_tag_classes();

            treemend::DomTree page = treemend::parse_html_file(sign_page);
            treemend::XPathExpr xpath = treemend::parse_xpath(sign_xpath);
            treemend::Signature sig;
            try {
                sig = treemend::sign(page, xpath, opts, sign_page);
            } catch (const treemend::CannotSignError& e) {
                std::cerr << e.what() << "\n";
                return kExitEmpty;
            }
            treemend::save_signature(sig, sign_out);
            std::cout << "signed " << sig.snapshots.size() << " element(s) from " << sign_xpath
                      << " -> " << sign_out << "\n";
            return kExitOk;
        }

        if (*adapt_cmd) {
            treemend::DomTree page = treemend::parse_html_file(adapt_page);
            treemend::Signature sig = treemend::load_signature(adapt_sig);
            treemend::MatchOptions opts = sig.options;
            if (auto env = env_threshold()) opts.threshold = *env;
            if (!adapt_threshold.empty())
                opts.threshold = parse_ratio_arg(adapt_threshold, "--threshold");
            if (!adapt_algorithm.empty())
                opts.algorithm = *treemend::algorithm_from_name(adapt_algorithm);

            treemend::AdaptationReport report = treemend::adapt(page, sig, opts);
            std::ofstream out(adapt_out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write '" + adapt_out + "'");
            out << treemend::report_to_json(report).dump(2) << "\n";

            std::cout << "status: " << treemend::adapt_status_name(report.status) << "\n";
            for (const auto& r : report.results) {
                std::cout << "  " << r.xpath.str();
                if (r.score) std::cout << "  score " << r.score->str() << " ("
                                       << r.score->decimal_str() << ")";
                std::cout << "\n";
            }
            if (report.generalized_xpath && report.generalized_xpath->unified)
                std::cout << "  generalized: " << report.generalized_xpath->unified->str()
                          << (report.generalized_xpath->over_selects ? "  (over-selects)" : "")
                          << "\n";
            if (adapt_explain && report.status == treemend::AdaptStatus::adapted) {
                for (const auto& r : report.results) {
                    const treemend::DomTree& snap = sig.snapshots[r.snapshot_index.value_or(0)];
                    auto trace = treemend::explain_match(snap.root(), r.node, opts);
                    std::cout << treemend::trace_to_text(trace, snap, *r.node.tree());
                }
            }
            if (report.status == treemend::AdaptStatus::no_match) {
                if (verbosity > 0) {
                    for (const auto& nm : report.near_misses)
                        std::cerr << "near miss: " << nm.xpath.str() << " score "
                                  << nm.score.str() << " (" << nm.score.decimal_str() << ")\n";
                }
                return kExitEmpty;
            }
            return kExitOk;
        }

        if (*match_cmd) {
            treemend::MatchOptions opts;
            if (!m_attrs.empty()) opts.attr_keys = parse_attr_list(m_attrs);
            if (m_comparable) opts.tag_classes = treemend::default_tag_classes();

            treemend::DomTree page_a = treemend::parse_html_file(m_page_a);
            treemend::DomTree page_b = treemend::parse_html_file(m_page_b);
            auto nodes_a = treemend::eval_xpath(page_a, treemend::parse_xpath(m_xpath_a));
            auto nodes_b = treemend::eval_xpath(page_b, treemend::parse_xpath(m_xpath_b));
            if (nodes_a.size() != 1 || nodes_b.size() != 1) {
                std::cerr << "match: each xpath must select exactly one node (got "
                          << nodes_a.size() << " and " << nodes_b.size() << ")\n";
                return kExitError;
            }
            if (m_algorithm == "simple") {
                std::cout << treemend::simple_tree_match(nodes_a[0], nodes_b[0], opts) << "\n";
            } else if (m_algorithm == "simple-normalized") {
                print_score(treemend::normalized_simple_similarity(nodes_a[0], nodes_b[0], opts));
            } else {
                print_score(treemend::clustered_tree_match(nodes_a[0], nodes_b[0], opts));
            }
            return kExitOk;
        }

        if (*mutate_cmd) {
            treemend::DomTree page = treemend::parse_html_file(mu_page);
            treemend::MutationSpec spec = treemend::load_mutation_spec(mu_spec);
            if (mu_seed) spec.seed = *mu_seed;
            treemend::DomTree mutated = treemend::mutate(page, spec);
            std::ofstream out(mu_out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write '" + mu_out + "'");
            out << treemend::to_html(mutated);
            std::cout << "mutated " << mu_page << " -> " << mu_out << " (" << spec.ops.size()
                      << " ops)\n";
            return kExitOk;
        }

        if (*eval_cmd) {
            std::vector<treemend::Algorithm> algos;
            if (ev_algorithm == "simple")
                algos = {treemend::Algorithm::simple};
            else if (ev_algorithm == "clustered")
                algos = {treemend::Algorithm::clustered};
            else
                algos = {treemend::Algorithm::simple, treemend::Algorithm::clustered};

            if (!std::filesystem::is_directory(ev_corpus)) {
                std::cerr << "eval: '" << ev_corpus << "' is not a directory\n";
                return kExitError;
            }
            treemend::CorpusRunResult result = treemend::run_corpus(ev_corpus, algos);
            if (result.cases.empty()) {
                std::cerr << "eval: no cases found in '" << ev_corpus << "'\n";
                return kExitError;
            }
            std::string table = treemend::render_corpus_table(result, algos);
            std::cout << table;
            if (!ev_out.empty()) {
                std::ofstream out(ev_out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write '" + ev_out + "'");
                out << table;
            }
            return kExitOk;
        }

        if (*gen_cmd) {
            auto names = treemend::generate_default_corpus(gen_out);
            std::cout << "wrote " << names.size() << " cases to " << gen_out << "\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
