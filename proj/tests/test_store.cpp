#include <doctest.h>

#include "mergemine/errors.hpp"
#include "mergemine/store.hpp"
#include "support/tmpdir.hpp"

using namespace mergemine;
using namespace mergemine::store;
using testsupport::TmpDir;

namespace {

git::CommitRef commit_ref(char c, const std::string& project = "demo") {
    git::CommitRef r;
    r.sha = std::string(40, c);
    r.author_time = 1600000000 + c;
    r.project = project;
    return r;
}

git::MergeScenario valid_merge(char merge, char p1, char p2, char base) {
    git::MergeScenario s;
    s.merge = commit_ref(merge);
    s.merge.parents = {std::string(40, p1), std::string(40, p2)};
    s.parent1 = std::string(40, p1);
    s.parent2 = std::string(40, p2);
    s.base = std::string(40, base);
    s.validity = git::Validity::Valid;
    return s;
}

}  // namespace

TEST_CASE("persisting the same entities twice leaves counts unchanged") {
    TmpDir dir;
    Store db(dir.sub("run.sqlite"));

    std::vector<git::CommitRef> commits = {commit_ref('a'), commit_ref('b'),
                                           commit_ref('c'), commit_ref('d')};
    git::MergeScenario merge = valid_merge('d', 'b', 'c', 'a');
    std::vector<refactoring::RefactoringRecord> refactorings = {
        {std::string(40, 'b'), "Extract Method", "x"},
        {std::string(40, 'b'), "Extract Method", "x"},  // duplicate detection
        {std::string(40, 'c'), "Move Class", "y"},
    };
    git::BranchAttribution attr;
    attr.merge_sha = merge.merge.sha;
    attr.b1_commits = {std::string(40, 'b')};
    attr.b2_commits = {std::string(40, 'c')};

    StoredCounts first =
        persist(db, commits, {{merge, 5}}, refactorings, {attr});
    CHECK(first.commits == 4);
    CHECK(first.merge_commits == 1);
    CHECK(first.refactorings == 3);
    CHECK(first.branch_memberships == 2);

    StoredCounts second =
        persist(db, commits, {{merge, 5}}, refactorings, {attr});
    CHECK(second.commits == first.commits);
    CHECK(second.merge_commits == first.merge_commits);
    CHECK(second.refactorings == first.refactorings);
    CHECK(second.branch_memberships == first.branch_memberships);
}

TEST_CASE("merge row referencing a missing commit is an integrity error") {
    TmpDir dir;
    Store db(dir.sub("run.sqlite"));
    git::MergeScenario merge = valid_merge('d', 'b', 'c', 'a');
    CHECK_THROWS_AS(persist(db, {}, {{merge, 5}}, {}, {}), IntegrityError);
}

TEST_CASE("valid merges require an effort value and others forbid it") {
    TmpDir dir;
    Store db(dir.sub("run.sqlite"));
    std::vector<git::CommitRef> commits = {commit_ref('a'), commit_ref('b'),
                                           commit_ref('c'), commit_ref('d')};
    git::MergeScenario valid = valid_merge('d', 'b', 'c', 'a');
    CHECK_THROWS_AS(persist(db, commits, {{valid, std::nullopt}}, {}, {}),
                    IntegrityError);

    git::MergeScenario noff = valid_merge('d', 'b', 'c', 'a');
    noff.validity = git::Validity::NoFastForward;
    CHECK_THROWS_AS(persist(db, commits, {{noff, 7}}, {}, {}), IntegrityError);
    StoredCounts counts = persist(db, commits, {{noff, std::nullopt}}, {}, {});
    CHECK(counts.merge_commits == 1);
}

TEST_CASE("store round-trip reproduces in-memory values") {
    TmpDir dir;
    Store db(dir.sub("run.sqlite"));

    std::vector<git::CommitRef> commits = {commit_ref('a'), commit_ref('b'),
                                           commit_ref('c'), commit_ref('d'),
                                           commit_ref('e')};
    git::MergeScenario merge = valid_merge('d', 'b', 'c', 'a');
    git::MergeScenario octo = valid_merge('e', 'b', 'c', 'a');
    octo.merge.parents = {std::string(40, 'b'), std::string(40, 'c'),
                          std::string(40, 'a')};
    octo.validity = git::Validity::Octopus;
    octo.base.reset();

    std::vector<refactoring::RefactoringRecord> refactorings = {
        {std::string(40, 'b'), "Extract Method", "one"},
        {std::string(40, 'c'), "Move Class", "two"},
        {std::string(40, 'c'), "Rename Method", "three"},
    };
    git::BranchAttribution attr;
    attr.merge_sha = merge.merge.sha;
    attr.b1_commits = {std::string(40, 'b')};
    attr.b2_commits = {std::string(40, 'c')};

    persist(db, commits, {{merge, 9}, {octo, std::nullopt}}, refactorings,
            {attr});

    auto merges = db.load_merges();
    REQUIRE(merges.size() == 2);
    CHECK(merges[0].scenario.merge.sha == merge.merge.sha);
    CHECK(merges[0].merge_effort == 9);
    CHECK(merges[0].scenario.validity == git::Validity::Valid);
    CHECK(merges[1].scenario.validity == git::Validity::Octopus);
    CHECK_FALSE(merges[1].merge_effort.has_value());

    auto stored_refacs = db.load_refactorings();
    REQUIRE(stored_refacs.size() == 3);
    CHECK(stored_refacs[0].type == "Extract Method");

    auto commits_back = db.load_commits();
    CHECK(commits_back.size() == 5);
    CHECK(commits_back[0].project == "demo");

    auto rows = db.feature_rows();
    REQUIRE(rows.size() == 1);  // only the Valid merge
    CHECK(rows[0].merge_sha == merge.merge.sha);
    CHECK(rows[0].b1 == 1);
    CHECK(rows[0].b2 == 2);
    CHECK(rows[0].refactorings == 3);
    CHECK(rows[0].effort == 9);
}

TEST_CASE("branch column accepts only 1 and 2") {
    TmpDir dir;
    Store db(dir.sub("run.sqlite"));
    std::vector<git::CommitRef> commits = {commit_ref('a'), commit_ref('b'),
                                           commit_ref('c'), commit_ref('d')};
    git::MergeScenario merge = valid_merge('d', 'b', 'c', 'a');
    persist(db, commits, {{merge, 0}}, {}, {});
    CHECK_THROWS_AS(
        db.upsert_branch_membership(merge.merge.sha, std::string(40, 'b'), 3),
        IntegrityError);
}
