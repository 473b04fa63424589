#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "treemend/corpus.hpp"
#include "treemend/eval.hpp"

using namespace treemend;
namespace fs = std::filesystem;

namespace {

DomTree fig1_page() {
    return parse_html(
        "<html><head></head><body><table>"
        "<tr><td>.</td></tr>"
        "<tr><td>.</td><td>.</td><td>.</td></tr>"
        "<tr><td>.</td><td>.</td></tr>"
        "</table></body></html>");
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("metric arithmetic reproduces the totals rows") {
    EvalCounts clustered{1454, 12, 42};
    CHECK(clustered.precision()->percent_str() == "99.18%");
    CHECK(clustered.recall()->percent_str() == "97.19%");
    CHECK(clustered.f_measure()->percent_str() == "98.18%");
    CHECK(*clustered.f_measure() == Rational(2908, 2962));

    EvalCounts simple{1356, 92, 140};
    CHECK(simple.precision()->percent_str() == "93.65%");
    CHECK(simple.recall()->percent_str() == "90.64%");
    // exact value: 2*1356 / (2*1356 + 92 + 140) = 2712/2944 = 92.1196%
    CHECK(*simple.f_measure() == Rational(2712, 2944));
    CHECK(simple.f_measure()->percent_str() == "92.12%");

    EvalCounts empty{0, 0, 0};
    CHECK(!empty.precision().has_value());
    CHECK(!empty.recall().has_value());
    CHECK(!empty.f_measure().has_value());
}

TEST_CASE("score_run counts marker hits and misses") {
    std::set<std::string> expected{"m0", "m1", "m2"};
    EvalCounts perfect = score_run(expected, {"m0", "m1", "m2"});
    CHECK(perfect.tp == 3);
    CHECK(perfect.fp == 0);
    CHECK(perfect.fn == 0);
    CHECK(*perfect.precision() == Rational(1));
    CHECK(*perfect.recall() == Rational(1));
    CHECK(*perfect.f_measure() == Rational(1));

    EvalCounts mixed = score_run(expected, {"m0", "", "mX", "m0"});
    CHECK(mixed.tp == 1);    // m0 once; the duplicate counts as a false positive
    CHECK(mixed.fp == 3);    // unmarked node, unknown marker, duplicate
    CHECK(mixed.fn == 2);

    EvalCounts missed = score_run(expected, {});
    CHECK(missed.tp == 0);
    CHECK(missed.fp == 0);
    CHECK(missed.fn == 3);
}

TEST_CASE("f-measure lies between precision and recall") {
    std::mt19937_64 rng(88);
    for (int i = 0; i < 500; ++i) {
        EvalCounts e{(long long)(rng() % 50), (long long)(rng() % 50), (long long)(rng() % 50)};
        auto p = e.precision();
        auto r = e.recall();
        auto f = e.f_measure();
        if (!p || !r || !f) continue;
        CHECK(*f >= std::min(*p, *r));
        CHECK(*f <= std::max(*p, *r));
    }
}

TEST_CASE("empty mutation spec reproduces the serialized tree") {
    DomTree page = fig1_page();
    MutationSpec empty;
    DomTree out = mutate(page, empty);
    CHECK(to_html(out) == to_html(page));
    CHECK(out == page);
}

TEST_CASE("retagging the table keeps the shape") {
    DomTree page = fig1_page();
    MutationSpec spec;
    MutationOp op;
    op.kind = MutationKind::wrap_element;
    op.locus = "/html[1]/body[1]/table[1]";
    op.tag = "div";
    spec.ops.push_back(op);
    DomTree out = mutate(page, spec);
    CHECK(out.size() == page.size());
    auto divs = eval_xpath(out, "/html[1]/body[1]/div[1]");
    REQUIRE(divs.size() == 1);
    CHECK(degree(divs[0]) == 3);
    CHECK(eval_xpath(out, "/html[1]/body[1]/table[1]").empty());
}

TEST_CASE("row insertion changes the table degree and shifts the old xpath") {
    DomTree page = fig1_page();
    MutationSpec spec;
    MutationOp op;
    op.kind = MutationKind::insert_sibling;
    op.locus = "/html[1]/body[1]/table[1]/tr[1]";
    op.clone = true;
    op.position = "before";
    spec.ops.push_back(op);
    DomTree out = mutate(page, spec);
    auto table = eval_xpath(out, "/html[1]/body[1]/table[1]");
    REQUIRE(table.size() == 1);
    CHECK(degree(table[0]) == 4);   // was 3
    // the multi-select path now lands on the shifted row: one td, not three
    auto selected = eval_xpath(out, "/html[1]/body[1]/table[1]/tr[2]/td");
    CHECK(selected.size() == 1);
}

TEST_CASE("mutation operations cover deletes, moves and attributes") {
    DomTree page = parse_html(
        "<html><body><div id=\"a\"><p></p><span></span></div><div id=\"b\"></div>"
        "</body></html>");
    MutationSpec spec;
    MutationOp del;
    del.kind = MutationKind::delete_leaf;
    del.locus = "/html[1]/body[1]/div[1]/span[1]";
    spec.ops.push_back(del);
    MutationOp mv;
    mv.kind = MutationKind::move_subtree;
    mv.locus = "/html[1]/body[1]/div[1]/p[1]";
    mv.dest = "/html[1]/body[1]/div[2]";
    spec.ops.push_back(mv);
    MutationOp attr;
    attr.kind = MutationKind::attribute_change;
    attr.locus = "/html[1]/body[1]/div[2]";
    attr.attr_name = "class";
    attr.attr_value = "landing";
    spec.ops.push_back(attr);
    DomTree out = mutate(page, spec);
    CHECK(eval_xpath(out, "/html[1]/body[1]/div[1]/span[1]").empty());
    CHECK(eval_xpath(out, "/html[1]/body[1]/div[1]/p[1]").empty());
    auto moved = eval_xpath(out, "/html[1]/body[1]/div[2]/p[1]");
    CHECK(moved.size() == 1);
    NodeRef b = eval_xpath(out, "/html[1]/body[1]/div[2]").at(0);
    CHECK(b.label().attrs.at("class") == "landing");

    MutationSpec bad;
    MutationOp nothing;
    nothing.kind = MutationKind::delete_branch;
    nothing.locus = "/html[1]/body[1]/article[1]";
    bad.ops.push_back(nothing);
    CHECK_THROWS_WITH_AS(mutate(page, bad), doctest::Contains("resolves to nothing"),
                         MutationError);

    MutationSpec not_leaf;
    MutationOp leaf_op;
    leaf_op.kind = MutationKind::delete_leaf;
    leaf_op.locus = "/html[1]/body[1]/div[1]";
    not_leaf.ops.push_back(leaf_op);
    CHECK_THROWS_WITH_AS(mutate(page, not_leaf), doctest::Contains("not a leaf"), MutationError);
}

TEST_CASE("markers ride through mutations and vanish with deletions") {
    DomTree page = parse_html(
        "<html><body><table>"
        "<tr><td data-tm-oracle=\"m0\"><a></a></td></tr>"
        "<tr><td data-tm-oracle=\"m1\"></td></tr>"
        "</table></body></html>");
    MutationSpec spec;
    MutationOp retag;
    retag.kind = MutationKind::wrap_element;
    retag.locus = "/html[1]/body[1]/table[1]";
    retag.tag = "div";
    spec.ops.push_back(retag);
    MutationOp del;
    del.kind = MutationKind::delete_branch;
    del.locus = "/html[1]/body[1]/div[1]/tr[2]";
    spec.ops.push_back(del);
    DomTree out = mutate(page, spec);
    CHECK(collect_markers(out) == std::vector<std::string>{"m0"});
    // clones never duplicate markers
    MutationSpec clone_spec;
    MutationOp clone;
    clone.kind = MutationKind::insert_sibling;
    clone.locus = "/html[1]/body[1]/table[1]/tr[1]";
    clone.clone = true;
    clone_spec.ops.push_back(clone);
    DomTree cloned = mutate(page, clone_spec);
    CHECK(collect_markers(cloned) == std::vector<std::string>{"m0", "m1"});
}

TEST_CASE("mutation is deterministic for a fixed seed") {
    DomTree page = fig1_page();
    MutationSpec spec;
    spec.seed = 9;
    MutationOp op;
    op.kind = MutationKind::relabel_within_class;   // no target tag: seeded choice
    op.locus = "/html[1]/body[1]/table[1]";
    spec.ops.push_back(op);
    CHECK(to_html(mutate(page, spec)) == to_html(mutate(page, spec)));
    DomTree out = mutate(page, spec);
    CHECK(eval_xpath(out, "/html[1]/body[1]/table[1]").empty());
}

TEST_CASE("corpus of one unchanged page scores perfectly for both algorithms") {
    TempDir tmp("treemend_test_corpus_unchanged");
    fs::path case_dir = tmp.path / "case_00";
    fs::create_directories(case_dir);

    DomTree page = parse_html(
        "<html><body><table><tr><td data-tm-oracle=\"m0\"><a></a></td></tr></table>"
        "</body></html>");
    Signature sig = sign(page, parse_xpath("/html[1]/body[1]/table[1]/tr[1]/td[1]"), {});
    save_signature(sig, (case_dir / "signature.json").string());
    std::ofstream(case_dir / "original.html") << to_html(page);
    std::ofstream(case_dir / "mutated.html") << to_html(page);
    std::ofstream(case_dir / "expected.json") << "{\"kind\":\"unchanged\",\"markers\":[\"m0\"]}";

    // plus one malformed case: reported and skipped, never fatal
    fs::path broken = tmp.path / "case_01";
    fs::create_directories(broken);
    std::ofstream(broken / "signature.json") << "{\"version\": 1,";
    std::ofstream(broken / "mutated.html") << "<html></html>";
    std::ofstream(broken / "expected.json") << "{\"kind\":\"minor\",\"markers\":[]}";

    auto result = run_corpus(tmp.path.string(), {Algorithm::simple, Algorithm::clustered});
    REQUIRE(result.cases.size() == 2);
    CHECK(result.skipped == 1);
    CHECK(!result.cases[1].error.empty());
    for (Algorithm a : {Algorithm::simple, Algorithm::clustered}) {
        CHECK(*result.totals.at(a).precision() == Rational(1));
        CHECK(*result.totals.at(a).recall() == Rational(1));
    }
    std::string table = render_corpus_table(result, {Algorithm::simple, Algorithm::clustered});
    CHECK(table.find("100.00%") != std::string::npos);
    CHECK(table.find("SKIPPED") != std::string::npos);
}

TEST_CASE("generated corpus shows the clustered advantage") {
    TempDir tmp("treemend_test_corpus_full");
    auto names = generate_default_corpus(tmp.path.string());
    CHECK(names.size() >= 50);

    auto result = run_corpus(tmp.path.string(), {Algorithm::simple, Algorithm::clustered});
    CHECK(result.skipped == 0);
    const EvalCounts& simple = result.totals.at(Algorithm::simple);
    const EvalCounts& clustered = result.totals.at(Algorithm::clustered);
    REQUIRE(simple.tp + simple.fn > 0);
    CHECK(*clustered.f_measure() >= *simple.f_measure());
    CHECK(*clustered.recall() > *simple.recall());

    // deep cases report misses for both algorithms without crashing
    bool saw_deep_fn = false;
    for (const auto& c : result.cases)
        if (c.kind == "deep" && c.counts.count(Algorithm::clustered) &&
            c.counts.at(Algorithm::clustered).fn > 0)
            saw_deep_fn = true;
    CHECK(saw_deep_fn);

    // the minor-mutation subset is where clustered matching must excel
    const auto& minor = result.by_kind.at("minor");
    CHECK(*minor.at(Algorithm::clustered).f_measure() >= Rational(9, 10));
}
