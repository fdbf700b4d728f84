#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mergemine/git_history.hpp"
#include "mergemine/refactoring.hpp"
#include "mergemine/rules.hpp"

struct sqlite3;

namespace mergemine::store {

// Single-file relational store with the four-table mining schema:
// commits, merge_commits, refactorings, merge_branch_refactorings.
// All writes are upserts keyed by natural keys, so persisting the same
// entities twice is a no-op. Single writer at a time; readers may share.
class Store {
   public:
    explicit Store(const std::string& path);
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    void begin();
    void commit();
    void rollback();

    void upsert_commit(const git::CommitRef& commit);
    // merge_effort must be present exactly when the scenario is Valid.
    void upsert_merge(const git::MergeScenario& scenario,
                      std::optional<std::int64_t> merge_effort);
    // seq disambiguates identical (commit, type, description) detections.
    void upsert_refactoring(const refactoring::RefactoringRecord& record,
                            std::int64_t seq);
    void upsert_branch_membership(const std::string& merge_sha,
                                  const std::string& commit_sha, int branch);

    std::int64_t count_rows(const std::string& table) const;

    std::vector<git::CommitRef> load_commits() const;
    std::vector<refactoring::RefactoringRecord> load_refactorings() const;

    struct StoredMerge {
        git::MergeScenario scenario;
        std::optional<std::int64_t> merge_effort;
    };
    std::vector<StoredMerge> load_merges() const;

    // Rebuilds the per-merge feature rows from the stored tables (valid
    // merges only), ordered by project then merge sha.
    std::vector<rules::MergeFeatureRow> feature_rows() const;

   private:
    void exec(const std::string& sql);
    sqlite3* db_ = nullptr;
};

struct StoredCounts {
    std::int64_t commits = 0;
    std::int64_t merge_commits = 0;
    std::int64_t refactorings = 0;
    std::int64_t branch_memberships = 0;
};

// Persists one run's entities in a single transaction; returns table counts
// afterwards. Throws IntegrityError (naming the offending row) on
// constraint violations.
StoredCounts persist(
    Store& store, const std::vector<git::CommitRef>& commits,
    const std::vector<std::pair<git::MergeScenario,
                                std::optional<std::int64_t>>>& merges,
    const std::vector<refactoring::RefactoringRecord>& refactorings,
    const std::vector<git::BranchAttribution>& attributions);

}  // namespace mergemine::store
