#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mergemine/git_history.hpp"

namespace mergemine::effort {

enum class ActionKind { Add, Remove };

// One added or removed line of code. line_text is the exact byte content of
// the line without its trailing newline; no whitespace normalization.
struct Action {
    ActionKind kind = ActionKind::Add;
    std::string file_path;
    std::string line_text;

    auto operator<=>(const Action&) const = default;
};

// Multiset of line actions, the carrier of the effort algebra.
// Entries always have multiplicity >= 1.
class ActionMultiset {
   public:
    void add(Action action, std::int64_t count = 1);
    std::int64_t count(const Action& action) const;
    std::int64_t cardinality() const;
    bool empty() const { return counts_.empty(); }
    std::size_t distinct_size() const { return counts_.size(); }

    const std::map<Action, std::int64_t>& entries() const { return counts_; }

    bool operator==(const ActionMultiset&) const = default;

   private:
    std::map<Action, std::int64_t> counts_;
};

// Pointwise multiplicity addition.
ActionMultiset multiset_sum(const ActionMultiset& a, const ActionMultiset& b);

// Pointwise saturating subtraction: result(k) = max(0, a(k) - b(k)).
ActionMultiset multiset_minus(const ActionMultiset& a, const ActionMultiset& b);

enum class EffortMode { MergeMinusBranches, Symmetric };

const char* to_string(EffortMode mode);
EffortMode effort_mode_from_string(const std::string& s);

struct DiffOptions {
    // When false, Action.file_path is left empty, giving the path-free
    // variant for sensitivity analysis.
    bool include_paths = true;
    // Files larger than this are skipped (line actions are undefined on
    // huge or binary content).
    std::int64_t max_file_bytes = 10 * 1024 * 1024;
};

struct SkippedFile {
    std::string path;
    std::string reason;  // "binary" or "too-large"
};

// Line actions between the trees of two commits. Rename detection is
// disabled by construction: a moved file shows up as removals at the old
// path plus additions at the new one. Binary and oversized files are
// skipped and reported.
ActionMultiset diff_actions(const git::GitRepo& repo,
                            const std::string& from_commit,
                            const std::string& to_commit,
                            const DiffOptions& opts = {},
                            std::vector<SkippedFile>* skipped = nullptr);

struct EffortResult {
    std::string merge_sha;
    std::string project;
    std::int64_t actions_merge_size = 0;
    std::int64_t actions_branches_size = 0;
    std::int64_t effort = 0;
    EffortMode mode = EffortMode::MergeMinusBranches;
};

// The effort metric over one valid merge scenario:
//   actions_merge    = diff(base, merge)
//   actions_branches = diff(base, parent1) + diff(base, parent2)
//   MergeMinusBranches: effort = |actions_merge \ actions_branches|
//   Symmetric: adds |actions_branches \ actions_merge| on top, surfacing
//   branch work discarded during conflict resolution.
EffortResult merge_effort(const git::GitRepo& repo,
                          const git::MergeScenario& scenario, EffortMode mode,
                          const DiffOptions& opts = {});

std::string effort_to_json_line(const EffortResult& r);

}  // namespace mergemine::effort
