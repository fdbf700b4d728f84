#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sys/stat.h>

#include "mergemine/errors.hpp"
#include "mergemine/refactoring.hpp"
#include "support/tmpdir.hpp"

using namespace mergemine;
using namespace mergemine::refactoring;
using testsupport::TmpDir;

namespace {

std::string sha_of(char c) { return std::string(40, c); }

std::string record_line(const std::string& commit, const std::string& type,
                        const std::string& descr = "d") {
    return "{\"commit\":\"" + commit + "\",\"type\":\"" + type +
           "\",\"description\":\"" + descr + "\"}";
}

// Writes an executable shell stub acting as the external detector.
std::string write_stub(const TmpDir& dir, const std::string& name,
                       const std::string& body) {
    std::string path = dir.sub(name);
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body;
    out.close();
    chmod(path.c_str(), 0755);
    return path;
}

}  // namespace

TEST_CASE("taxonomy holds exactly the 33 supported types") {
    CHECK(taxonomy().size() == 33);
    CHECK(in_taxonomy("Extract Method"));
    CHECK(in_taxonomy("Replace Variable with Attribute"));
    CHECK(in_taxonomy("Change Return Type"));
    CHECK_FALSE(in_taxonomy("Extract And Move Method"));
    CHECK_FALSE(in_taxonomy("extract method"));
    // No duplicates.
    std::set<std::string> unique(taxonomy().begin(), taxonomy().end());
    CHECK(unique.size() == 33);
}

TEST_CASE("empty stream parses to nothing") {
    ParseResult r = parse_refactoring_records(std::string{});
    CHECK(r.records.empty());
    CHECK(r.rejected.empty());
}

TEST_CASE("out-of-taxonomy types are rejected with line numbers") {
    std::string input = record_line(sha_of('a'), "Extract Method") + "\n" +
                        record_line(sha_of('b'), "Rename Class") + "\n" +
                        record_line(sha_of('c'), "Extract And Move Method") +
                        "\n";
    ParseResult r = parse_refactoring_records(input);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].type == "Extract Method");
    CHECK(r.records[1].type == "Rename Class");
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].line_number == 3);
    CHECK(r.rejected[0].reason.find("out-of-taxonomy") != std::string::npos);
}

TEST_CASE("malformed shas and JSON are rejected, never dropped silently") {
    std::string input = record_line("xyz", "Extract Method") + "\n" +
                        "this is not json\n" +
                        record_line(sha_of('d'), "Move Class") + "\n";
    ParseResult r = parse_refactoring_records(input);
    REQUIRE(r.records.size() == 1);
    REQUIRE(r.rejected.size() == 2);
    CHECK(r.rejected[0].line_number == 1);
    CHECK(r.rejected[0].reason.find("malformed sha") != std::string::npos);
    CHECK(r.rejected[1].line_number == 2);
    // accepted + rejected = nonempty input lines
    CHECK(r.records.size() + r.rejected.size() == 3);
}

TEST_CASE("invalid UTF-8 raises an input error naming the byte offset") {
    std::string input = record_line(sha_of('a'), "Extract Method") + "\n";
    std::size_t offset = input.size() + 4;  // {, ", c, o precede the bad byte
    input += "{\"co\xFF\" : 1}\n";
    try {
        parse_refactoring_records(input);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        std::string msg = e.what();
        CHECK(msg.find(std::to_string(offset)) != std::string::npos);
    }
}

TEST_CASE("record parse order matches input order") {
    std::string input;
    std::vector<std::string> types = {"Extract Method", "Inline Method",
                                      "Move Class", "Rename Method"};
    for (const auto& t : types) input += record_line(sha_of('e'), t) + "\n";
    ParseResult r = parse_refactoring_records(input);
    REQUIRE(r.records.size() == types.size());
    for (std::size_t i = 0; i < types.size(); ++i)
        CHECK(r.records[i].type == types[i]);
}

TEST_CASE("detector stub: success path parses records") {
    TmpDir dir;
    std::string stub = write_stub(
        dir, "detector-ok",
        "echo '" + record_line(sha_of('a'), "Extract Method") + "'\n" +
            "echo '" + record_line(sha_of('a'), "Rename Class") + "'\n");
    DetectorConfig config;
    config.cmd_template = stub + " -c {repo} {commit} -json";
    config.timeout_seconds = 30;

    auto [parsed, log] = run_external_detector(config, "/tmp/repo", sha_of('a'));
    CHECK(log.status == DetectorStatus::Ok);
    CHECK(log.commit == sha_of('a'));
    REQUIRE(parsed.records.size() == 2);
    CHECK(parsed.records[0].type == "Extract Method");
}

TEST_CASE("detector stub: command template substitution") {
    DetectorConfig config;
    config.cmd_template = "miner -c {repo} {commit} -json";
    auto argv = render_detector_command(config, "/work/x", sha_of('b'));
    REQUIRE(argv.size() == 5);
    CHECK(argv[0] == "miner");
    CHECK(argv[2] == "/work/x");
    CHECK(argv[3] == sha_of('b'));
}

TEST_CASE("detector stub: sleeping past the budget times out") {
    TmpDir dir;
    std::string stub = write_stub(dir, "detector-slow",
                                  "echo started\nsleep 30\necho done\n");
    DetectorConfig config;
    config.cmd_template = stub + " {commit}";
    config.timeout_seconds = 1;

    auto [parsed, log] = run_external_detector(config, "/tmp/repo", sha_of('c'));
    CHECK(log.status == DetectorStatus::Timeout);
    CHECK(parsed.records.empty());
    CHECK(log.elapsed_ms >= 1000);
}

TEST_CASE("detector stub: nonzero exit captures stderr") {
    TmpDir dir;
    std::string stub =
        write_stub(dir, "detector-bad", "echo boom >&2\nexit 3\n");
    DetectorConfig config;
    config.cmd_template = stub + " {commit}";

    auto [parsed, log] = run_external_detector(config, "/tmp/repo", sha_of('d'));
    CHECK(log.status == DetectorStatus::DetectorError);
    CHECK(parsed.records.empty());
    CHECK(log.stderr_tail.find("boom") != std::string::npos);
}

TEST_CASE("detector stub: undecodable stdout becomes a DetectorError") {
    TmpDir dir;
    std::string stub =
        write_stub(dir, "detector-garbage", "printf '\\377\\376 junk\\n'\n");
    DetectorConfig config;
    config.cmd_template = stub + " {commit}";

    auto [parsed, log] = run_external_detector(config, "/tmp/repo", sha_of('f'));
    CHECK(log.status == DetectorStatus::DetectorError);
    CHECK(parsed.records.empty());
    CHECK(log.stderr_tail.find("UTF-8") != std::string::npos);
}

TEST_CASE("missing detector binary is a configuration error") {
    DetectorConfig config;
    config.cmd_template = "/nonexistent/refactoring-miner {commit}";
    CHECK_THROWS_AS(run_external_detector(config, "/tmp/repo", sha_of('e')),
                    ConfigError);
}

TEST_CASE("branch counting honors the attribution sets") {
    git::BranchAttribution attr;
    attr.merge_sha = sha_of('f');
    attr.b1_commits = {sha_of('1')};
    attr.b2_commits = {sha_of('2')};

    SUBCASE("no records count zero") {
        BranchCounts c = count_branch_refactorings(attr, {});
        CHECK(c.b1 == 0);
        CHECK(c.b2 == 0);
        CHECK(c.total == 0);
    }

    SUBCASE("records split 3/2 with base noise ignored") {
        std::vector<RefactoringRecord> records;
        for (int i = 0; i < 3; ++i)
            records.push_back({sha_of('1'), "Extract Method", "r"});
        for (int i = 0; i < 2; ++i)
            records.push_back({sha_of('2'), "Move Class", "r"});
        records.push_back({sha_of('9'), "Rename Method", "on base"});
        BranchCounts c = count_branch_refactorings(attr, records);
        CHECK(c.b1 == 3);
        CHECK(c.b2 == 2);
        CHECK(c.total == 5);
    }

    SUBCASE("records on the merge commit itself are excluded") {
        std::vector<RefactoringRecord> records = {
            {attr.merge_sha, "Extract Method", "on the merge"}};
        BranchCounts c = count_branch_refactorings(attr, records);
        CHECK(c.total == 0);
    }

    SUBCASE("counting is permutation invariant and total = b1 + b2") {
        std::mt19937 rng(17);
        std::vector<RefactoringRecord> records;
        for (int i = 0; i < 20; ++i) {
            char owner = "129"[i % 3];
            records.push_back({sha_of(owner), "Extract Method",
                               std::to_string(i)});
        }
        BranchCounts base_counts = count_branch_refactorings(attr, records);
        CHECK(base_counts.total == base_counts.b1 + base_counts.b2);
        for (int trial = 0; trial < 10; ++trial) {
            std::shuffle(records.begin(), records.end(), rng);
            BranchCounts c = count_branch_refactorings(attr, records);
            CHECK(c.b1 == base_counts.b1);
            CHECK(c.b2 == base_counts.b2);
            CHECK(c.total == c.b1 + c.b2);
        }
    }
}
