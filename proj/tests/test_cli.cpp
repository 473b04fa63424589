#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treemend/html.hpp"
#include "treemend/signature.hpp"
#include "treemend/xpath.hpp"

#ifndef TREEMEND_CLI_PATH
#define TREEMEND_CLI_PATH "treemend"
#endif
#ifndef TREEMEND_DATA_DIR
#define TREEMEND_DATA_DIR "tests/data"
#endif

namespace fs = std::filesystem;

namespace {

const std::string kCli = TREEMEND_CLI_PATH;
const std::string kData = TREEMEND_DATA_DIR;

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    fs::path out_file = fs::temp_directory_path() / ("treemend_cli_out_" +
                                                     std::to_string(counter++) + ".txt");
    std::string cmd = env_prefix + kCli + " " + args + " > " + out_file.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.out = buf.str();
    fs::remove(out_file);
    return r;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("treemend_cli_" + name);
}

}  // namespace

TEST_CASE("sign writes a signature and honors exit codes") {
    fs::path sig = temp_file("fig1.sig.json");
    auto ok = run_cli("sign --page " + kData + "/fig1.html"
                      " --xpath /html[1]/body[1]/table[1]/tr[1]/td[1] --out " + sig.string());
    CHECK(ok.exit_code == 0);
    CHECK(fs::exists(sig));

    auto dialect = run_cli("sign --page " + kData + "/fig1.html --xpath //td --out " +
                           sig.string());
    CHECK(dialect.exit_code == 1);
    CHECK(dialect.out.find("//") != std::string::npos);

    auto empty = run_cli("sign --page " + kData + "/fig1.html"
                         " --xpath /html[1]/body[1]/article[1] --out " + sig.string());
    CHECK(empty.exit_code == 2);

    auto usage = run_cli("sign --page " + kData + "/fig1.html --no-such-flag");
    CHECK(usage.exit_code == 1);
    fs::remove(sig);
}

TEST_CASE("environment variable supplies the default threshold") {
    fs::path sig = temp_file("env.sig.json");
    auto from_env = run_cli("sign --page " + kData + "/fig1.html"
                            " --xpath /html[1]/body[1]/table[1]/tr[1]/td[1] --out " +
                            sig.string(),
                            "TREEMEND_THRESHOLD=0.5 ");
    CHECK(from_env.exit_code == 0);
    CHECK(treemend::load_signature(sig.string()).options.threshold == treemend::Rational(1, 2));

    auto flag_wins = run_cli("sign --page " + kData + "/fig1.html"
                             " --xpath /html[1]/body[1]/table[1]/tr[1]/td[1]"
                             " --threshold 0.7 --out " + sig.string(),
                             "TREEMEND_THRESHOLD=0.5 ");
    CHECK(flag_wins.exit_code == 0);
    CHECK(treemend::load_signature(sig.string()).options.threshold ==
          treemend::Rational(7, 10));
    fs::remove(sig);
}

TEST_CASE("adapt distinguishes still-valid, adapted and no-match") {
    fs::path sig = temp_file("adapt.sig.json");
    fs::path report = temp_file("adapt.report.json");
    REQUIRE(run_cli("sign --page " + kData + "/adapt_old.html"
                    " --xpath /html[1]/body[1]/table[1]/tr[1]/td[1] --out " + sig.string())
                .exit_code == 0);

    auto unchanged = run_cli("adapt --page " + kData + "/adapt_old.html --signature " +
                             sig.string() + " --out " + report.string());
    CHECK(unchanged.exit_code == 0);
    CHECK(unchanged.out.find("xpath_still_valid") != std::string::npos);

    auto moved = run_cli("adapt --page " + kData + "/adapt_new.html --signature " + sig.string() +
                         " --out " + report.string());
    CHECK(moved.exit_code == 0);
    CHECK(moved.out.find("adapted") != std::string::npos);
    CHECK(moved.out.find("/html[1]/body[1]/table[1]/tr[2]/td[1]") != std::string::npos);
    {
        std::ifstream in(report);
        nlohmann::json j = nlohmann::json::parse(in);
        CHECK(j["status"] == "adapted");
        CHECK(j["results"][0]["xpath"] == "/html[1]/body[1]/table[1]/tr[2]/td[1]");
        CHECK(j["results"][0]["score"]["fraction"] == "1");
    }

    auto explained = run_cli("adapt --page " + kData + "/adapt_new.html --signature " +
                             sig.string() + " --explain --out " + report.string());
    CHECK(explained.exit_code == 0);
    CHECK(explained.out.find("M (") != std::string::npos);

    fs::path miss_page = temp_file("miss.html");
    std::ofstream(miss_page) << "<html><body><table><tr><th></th></tr>"
                                "<tr><td><p></p></td></tr></table></body></html>";
    auto missed = run_cli("adapt --page " + miss_page.string() + " --signature " + sig.string() +
                          " --out " + report.string());
    CHECK(missed.exit_code == 2);
    fs::remove(sig);
    fs::remove(report);
    fs::remove(miss_page);
}

TEST_CASE("match prints the worked-example scores") {
    std::string pages = " --page-a " + kData + "/fig2a.html --xpath-a /html[1]/a[1]" +
                        " --page-b " + kData + "/fig2b.html --xpath-b /html[1]/a[1]";
    auto clustered = run_cli("match" + pages + " --algorithm clustered");
    CHECK(clustered.exit_code == 0);
    CHECK(clustered.out == "3/8 (0.375)\n");

    auto simple = run_cli("match" + pages + " --algorithm simple");
    CHECK(simple.exit_code == 0);
    CHECK(simple.out == "7\n");

    auto normalized = run_cli("match" + pages + " --algorithm simple-normalized");
    CHECK(normalized.exit_code == 0);
    CHECK(normalized.out == "1/2 (0.5)\n");

    auto identity = run_cli("match --page-a " + kData + "/fig2a.html --xpath-a /html[1]/a[1]" +
                            " --page-b " + kData + "/fig2a.html --xpath-b /html[1]/a[1]" +
                            " --algorithm clustered");
    CHECK(identity.exit_code == 0);
    CHECK(identity.out == "1\n");
}

TEST_CASE("mutate writes deterministic bytes") {
    fs::path out1 = temp_file("mut1.html");
    fs::path out2 = temp_file("mut2.html");
    auto first = run_cli("mutate --page " + kData + "/fig1.html --spec " + kData +
                         "/empty_spec.json --seed 0 --out " + out1.string());
    CHECK(first.exit_code == 0);
    auto second = run_cli("mutate --page " + kData + "/fig1.html --spec " + kData +
                          "/empty_spec.json --seed 0 --out " + out2.string());
    CHECK(second.exit_code == 0);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    CHECK(slurp(out1) == slurp(out2));
    // an empty spec emits exactly the canonical serialization of the page
    CHECK(slurp(out1) == treemend::to_html(treemend::parse_html_file(kData + "/fig1.html")));

    fs::path inserted = temp_file("mut3.html");
    auto rows = run_cli("mutate --page " + kData + "/fig1.html --spec " + kData +
                        "/row_insert.json --out " + inserted.string());
    CHECK(rows.exit_code == 0);
    treemend::DomTree t = treemend::parse_html_file(inserted.string());
    CHECK(treemend::degree(treemend::eval_xpath(t, "/html[1]/body[1]/table[1]").at(0)) == 4);
    fs::remove(out1);
    fs::remove(out2);
    fs::remove(inserted);
}

TEST_CASE("eval runs a corpus end to end") {
    fs::path corpus = fs::temp_directory_path() / "treemend_cli_corpus";
    fs::remove_all(corpus);

    auto missing = run_cli("eval --corpus " + corpus.string() + " --algorithm both");
    CHECK(missing.exit_code == 1);

    fs::create_directories(corpus);
    auto none = run_cli("eval --corpus " + corpus.string() + " --algorithm both");
    CHECK(none.exit_code == 1);
    CHECK(none.out.find("no cases") != std::string::npos);

    auto gen = run_cli("gen-corpus --out " + corpus.string());
    CHECK(gen.exit_code == 0);

    auto eval = run_cli("eval --corpus " + corpus.string() + " --algorithm both");
    CHECK(eval.exit_code == 0);
    CHECK(eval.out.find("f-measure") != std::string::npos);
    CHECK(eval.out.find("case_00_unchanged_single") != std::string::npos);
    fs::remove_all(corpus);
}
