#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

#include "mergemine/git_history.hpp"

namespace mergemine::refactoring {

// The closed 33-name taxonomy: 26 catalog refactorings plus 7 later
// additions. Detector output naming anything else is counted but excluded
// from analysis.
const std::array<std::string, 33>& taxonomy();
bool in_taxonomy(const std::string& name);

struct RefactoringRecord {
    std::string commit;  // 40-hex sha
    std::string type;
    std::string description;

    bool operator==(const RefactoringRecord&) const = default;
};

struct RejectedLine {
    std::size_t line_number = 0;  // 1-based
    std::string reason;
    std::string raw;
};

struct ParseResult {
    std::vector<RefactoringRecord> records;
    std::vector<RejectedLine> rejected;
};

// Parses newline-delimited JSON records ({"commit","type","description"}).
// Valid records come back in input order; malformed lines and
// out-of-taxonomy types land in the rejection list with line numbers.
// Throws InputError naming the byte offset when the stream is not UTF-8.
ParseResult parse_refactoring_records(std::istream& in);
ParseResult parse_refactoring_records(const std::string& bytes);

enum class DetectorStatus { Ok, Timeout, DetectorError };
const char* to_string(DetectorStatus s);

struct DetectorRunLog {
    std::string commit;
    DetectorStatus status = DetectorStatus::Ok;
    std::int64_t elapsed_ms = 0;
    std::string stderr_tail;
};

struct DetectorConfig {
    // Command template; {repo} and {commit} are substituted.
    std::string cmd_template = "RefactoringMiner -c {repo} {commit} -json";
    std::int64_t timeout_seconds = 300;
};

std::vector<std::string> render_detector_command(const DetectorConfig& config,
                                                 const std::string& repo_path,
                                                 const std::string& commit);

// Runs the external detector for one commit, parsing its stdout. A timeout
// terminates the process and yields status Timeout with no records; the
// commit is skipped, never fatal. A missing detector binary raises
// ConfigError; a nonzero detector exit yields DetectorError with captured
// stderr.
std::pair<ParseResult, DetectorRunLog> run_external_detector(
    const DetectorConfig& config, const std::string& repo_path,
    const std::string& commit);

// Per-branch refactoring counts for one valid merge; total is always
// b1 + b2. Records on commits outside both branch sets contribute nothing.
struct BranchCounts {
    std::int64_t b1 = 0;
    std::int64_t b2 = 0;
    std::int64_t total = 0;
};

BranchCounts count_branch_refactorings(
    const git::BranchAttribution& attribution,
    const std::vector<RefactoringRecord>& records);

std::string record_to_json_line(const RefactoringRecord& r);

}  // namespace mergemine::refactoring
