#pragma once

#include <cstdint>
#include <ctime>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mergemine::git {

// Thin wrapper over the git executable for one on-disk repository
// (bare or worktree). All object reads go through subprocess calls.
class GitRepo {
   public:
    explicit GitRepo(std::string path, std::string project = "");

    const std::string& path() const { return path_; }
    const std::string& project() const { return project_; }

    // Head of the default branch. Throws RepoError if the path is not a
    // readable repository, ConfigError if HEAD resolves to no commit.
    std::string head_sha() const;

    struct TreeEntry {
        std::string path;
        std::string oid;
        unsigned mode = 0;
    };
    // Recursive blob listing of a commit's tree (no trees, no submodules).
    std::vector<TreeEntry> ls_tree(const std::string& commit) const;

    // Batch blob fetch; returns oid -> raw bytes.
    std::map<std::string, std::string> read_blobs(
        const std::vector<std::string>& oids) const;

    std::string run_git(const std::vector<std::string>& args) const;

   private:
    std::string path_;
    std::string project_;
};

struct CommitRef {
    std::string sha;
    std::vector<std::string> parents;
    std::time_t author_time = 0;
    std::string project;

    bool operator==(const CommitRef&) const = default;
};

enum class Validity { Valid, NoFastForward, Octopus, NoCommonAncestor };

const char* to_string(Validity v);
Validity validity_from_string(const std::string& s);

struct MergeScenario {
    CommitRef merge;
    std::string parent1;
    std::string parent2;
    std::optional<std::string> base;
    Validity validity = Validity::Valid;
    // True when several best common ancestors existed and the tie-break
    // picked one; downstream analysis can exclude such criss-cross merges.
    bool ambiguous_base = false;

    bool operator==(const MergeScenario&) const = default;
};

struct BranchAttribution {
    std::string merge_sha;
    std::set<std::string> b1_commits;
    std::set<std::string> b2_commits;
};

// In-memory commit DAG of everything reachable from the default branch head.
class CommitGraph {
   public:
    static CommitGraph load(const GitRepo& repo);

    std::size_t size() const { return commits_.size(); }
    bool contains(const std::string& sha) const;
    const CommitRef& at(const std::string& sha) const;

    // Reachability sets include the starting commit itself.
    std::vector<bool> reachable_from(const std::string& sha) const;
    bool is_ancestor(const std::string& maybe_ancestor,
                     const std::string& descendant) const;

    struct BaseResult {
        std::optional<std::string> base;
        bool ambiguous = false;
    };
    // Best common ancestor of the two commits. With several candidates the
    // lexicographically smallest sha wins and the result is flagged
    // ambiguous. Throws InputError on unknown shas.
    BaseResult merge_base(const std::string& parent1,
                          const std::string& parent2) const;

    // Commits in deterministic topological order (ancestors first, ties by
    // sha), as indices into commits().
    const std::vector<CommitRef>& commits() const { return commits_; }
    const std::vector<std::size_t>& topo_order() const { return topo_order_; }

    std::size_t index_of(const std::string& sha) const;

   private:
    std::vector<CommitRef> commits_;
    std::vector<std::vector<std::size_t>> parent_idx_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::size_t> topo_order_;
};

Validity classify_merge(const CommitGraph& graph, const MergeScenario& scenario);

// One scenario per commit with two or more parents, reachable from the
// default branch head, in topological-then-sha order.
std::vector<MergeScenario> enumerate_merges(const GitRepo& repo);
std::vector<MergeScenario> enumerate_merges(const CommitGraph& graph);

// Splits the commits of a valid merge between its two branches:
//   b1 = ancestors(parent1) minus ancestors(base)
//   b2 = ancestors(parent2) minus ancestors(base) minus b1
// Commits reachable from both parents beyond the base land in b1 only, so
// the two sets never overlap. Throws ContractError on non-valid scenarios.
BranchAttribution attribute_branch_commits(const CommitGraph& graph,
                                           const MergeScenario& scenario);

std::string scenario_to_json_line(const MergeScenario& s);
MergeScenario scenario_from_json_line(const std::string& line);

}  // namespace mergemine::git
