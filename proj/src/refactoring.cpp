#include "mergemine/refactoring.hpp"

#include <json.hpp>

#include <istream>
#include <sstream>
#include <unordered_set>

#include "mergemine/errors.hpp"
#include "mergemine/proc.hpp"
#include "mergemine/util.hpp"

namespace mergemine::refactoring {

using nlohmann::json;

const std::array<std::string, 33>& taxonomy() {
    static const std::array<std::string, 33> names = {
        // Fowler catalog.
        "Change Return Type", "Extract Attribute", "Extract Class",
        "Extract Interface", "Extract Method", "Extract Subclass",
        "Extract Superclass", "Extract Variable", "Inline Method",
        "Inline Variable", "Merge Attribute", "Move Attribute", "Move Class",
        "Move Method", "Pull Up Attribute", "Pull Up Method",
        "Push Down Attribute", "Push Down Method", "Rename Attribute",
        "Rename Class", "Rename Method", "Rename Parameter", "Rename Variable",
        "Split Attribute", "Split Parameter", "Split Variable",
        // Later additions.
        "Change Parameter Type", "Change Variable Type", "Merge Parameter",
        "Merge Variable", "Parameterize Variable", "Replace Attribute",
        "Replace Variable with Attribute"};
    return names;
}

bool in_taxonomy(const std::string& name) {
    static const std::unordered_set<std::string> set(taxonomy().begin(),
                                                     taxonomy().end());
    return set.count(name) != 0;
}

ParseResult parse_refactoring_records(const std::string& bytes) {
    if (auto bad = find_invalid_utf8(bytes))
        throw InputError("refactoring stream is not UTF-8 at byte offset " +
                         std::to_string(*bad));

    ParseResult result;
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(bytes)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        auto reject = [&](const std::string& reason) {
            result.rejected.push_back({line_no, reason, std::string(line)});
        };

        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            reject("malformed JSON");
            continue;
        }
        if (!j.contains("commit") || !j["commit"].is_string() ||
            !j.contains("type") || !j["type"].is_string()) {
            reject("missing commit/type field");
            continue;
        }
        RefactoringRecord r;
        r.commit = j["commit"].get<std::string>();
        r.type = j["type"].get<std::string>();
        r.description = j.value("description", "");
        if (!is_hex_sha(r.commit)) {
            reject("malformed sha: " + r.commit);
            continue;
        }
        if (!in_taxonomy(r.type)) {
            reject("out-of-taxonomy type: " + r.type);
            continue;
        }
        result.records.push_back(std::move(r));
    }
    return result;
}

ParseResult parse_refactoring_records(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_refactoring_records(ss.str());
}

const char* to_string(DetectorStatus s) {
    switch (s) {
        case DetectorStatus::Ok: return "Ok";
        case DetectorStatus::Timeout: return "Timeout";
        case DetectorStatus::DetectorError: return "DetectorError";
    }
    return "?";
}

std::vector<std::string> render_detector_command(const DetectorConfig& config,
                                                 const std::string& repo_path,
                                                 const std::string& commit) {
    std::vector<std::string> argv;
    std::istringstream in(config.cmd_template);
    std::string token;
    while (in >> token) {
        std::size_t pos;
        while ((pos = token.find("{repo}")) != std::string::npos)
            token.replace(pos, 6, repo_path);
        while ((pos = token.find("{commit}")) != std::string::npos)
            token.replace(pos, 8, commit);
        argv.push_back(token);
    }
    if (argv.empty())
        throw ConfigError("detector command template is empty");
    return argv;
}

std::pair<ParseResult, DetectorRunLog> run_external_detector(
    const DetectorConfig& config, const std::string& repo_path,
    const std::string& commit) {
    std::vector<std::string> argv =
        render_detector_command(config, repo_path, commit);

    ProcOptions opts;
    opts.timeout_ms = config.timeout_seconds * 1000;
    ProcResult res = run_process(argv, opts);

    DetectorRunLog log;
    log.commit = commit;
    log.elapsed_ms = res.elapsed_ms;
    if (res.err.size() > 4096)
        log.stderr_tail = res.err.substr(res.err.size() - 4096);
    else
        log.stderr_tail = res.err;

    if (res.timed_out) {
        log.status = DetectorStatus::Timeout;
        return {ParseResult{}, log};
    }
    if (res.exit_code != 0 || res.signaled) {
        log.status = DetectorStatus::DetectorError;
        return {ParseResult{}, log};
    }
    try {
        ParseResult parsed = parse_refactoring_records(res.out);
        log.status = DetectorStatus::Ok;
        return {std::move(parsed), log};
    } catch (const InputError& e) {
        // Undecodable detector output condemns the invocation, not the run.
        log.status = DetectorStatus::DetectorError;
        log.stderr_tail = e.what();
        return {ParseResult{}, log};
    }
}

BranchCounts count_branch_refactorings(
    const git::BranchAttribution& attribution,
    const std::vector<RefactoringRecord>& records) {
    BranchCounts counts;
    for (const auto& r : records) {
        if (attribution.b1_commits.count(r.commit))
            ++counts.b1;
        else if (attribution.b2_commits.count(r.commit))
            ++counts.b2;
    }
    counts.total = counts.b1 + counts.b2;
    return counts;
}

std::string record_to_json_line(const RefactoringRecord& r) {
    json j = {{"commit", r.commit}, {"type", r.type},
              {"description", r.description}};
    return j.dump();
}

}  // namespace mergemine::refactoring
