#include "mergemine/store.hpp"

#include <sqlite3.h>

#include <map>

#include "mergemine/errors.hpp"

namespace mergemine::store {
namespace {

const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS commits (
    sha     TEXT PRIMARY KEY,
    date    INTEGER NOT NULL,
    project TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS merge_commits (
    sha            TEXT PRIMARY KEY REFERENCES commits(sha),
    parent1        TEXT NOT NULL,
    parent2        TEXT NOT NULL,
    base           TEXT,
    validity       TEXT NOT NULL,
    ambiguous_base INTEGER NOT NULL DEFAULT 0,
    merge_effort   INTEGER,
    CHECK ((validity = 'Valid') = (merge_effort IS NOT NULL))
);
CREATE TABLE IF NOT EXISTS refactorings (
    commit_sha  TEXT NOT NULL,
    type        TEXT NOT NULL,
    description TEXT NOT NULL,
    seq         INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (commit_sha, type, description, seq)
);
CREATE TABLE IF NOT EXISTS merge_branch_refactorings (
    merge_sha  TEXT NOT NULL REFERENCES merge_commits(sha),
    commit_sha TEXT NOT NULL,
    branch     INTEGER NOT NULL CHECK (branch IN (1, 2)),
    PRIMARY KEY (merge_sha, commit_sha)
);
)sql";

// Prepared-statement RAII wrapper.
class Stmt {
   public:
    Stmt(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
            throw Error(std::string("sqlite prepare failed: ") +
                        sqlite3_errmsg(db));
    }
    ~Stmt() { sqlite3_finalize(stmt_); }

    Stmt& bind(int idx, const std::string& v) {
        sqlite3_bind_text(stmt_, idx, v.c_str(), -1, SQLITE_TRANSIENT);
        return *this;
    }
    Stmt& bind(int idx, std::int64_t v) {
        sqlite3_bind_int64(stmt_, idx, v);
        return *this;
    }
    Stmt& bind_null(int idx) {
        sqlite3_bind_null(stmt_, idx);
        return *this;
    }

    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        std::string msg = sqlite3_errmsg(db_);
        if (rc == SQLITE_CONSTRAINT)
            throw IntegrityError("store constraint violation: " + msg);
        throw Error("sqlite step failed: " + msg);
    }
    void run() {
        while (step()) {
        }
    }

    std::string column_text(int i) const {
        const unsigned char* t = sqlite3_column_text(stmt_, i);
        return t ? reinterpret_cast<const char*>(t) : "";
    }
    std::int64_t column_int64(int i) const {
        return sqlite3_column_int64(stmt_, i);
    }
    bool column_is_null(int i) const {
        return sqlite3_column_type(stmt_, i) == SQLITE_NULL;
    }

   private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

Store::Store(const std::string& path) {
    if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw InputError("cannot open store " + path + ": " + msg);
    }
    exec("PRAGMA foreign_keys = ON;");
    exec(kSchema);
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown sqlite error";
        sqlite3_free(err);
        if (msg.find("constraint") != std::string::npos ||
            msg.find("CHECK") != std::string::npos ||
            msg.find("FOREIGN KEY") != std::string::npos)
            throw IntegrityError("store constraint violation: " + msg);
        throw Error("sqlite exec failed: " + msg);
    }
}

void Store::begin() { exec("BEGIN IMMEDIATE;"); }
void Store::commit() { exec("COMMIT;"); }
void Store::rollback() { exec("ROLLBACK;"); }

void Store::upsert_commit(const git::CommitRef& commit) {
    Stmt s(db_,
           "INSERT INTO commits (sha, date, project) VALUES (?1, ?2, ?3) "
           "ON CONFLICT(sha) DO UPDATE SET date = ?2, project = ?3;");
    s.bind(1, commit.sha)
        .bind(2, static_cast<std::int64_t>(commit.author_time))
        .bind(3, commit.project);
    try {
        s.run();
    } catch (const IntegrityError& e) {
        throw IntegrityError(std::string(e.what()) + " (commit " + commit.sha +
                             ")");
    }
}

void Store::upsert_merge(const git::MergeScenario& scenario,
                         std::optional<std::int64_t> merge_effort) {
    Stmt s(db_,
           "INSERT INTO merge_commits (sha, parent1, parent2, base, validity, "
           "ambiguous_base, merge_effort) VALUES (?1,?2,?3,?4,?5,?6,?7) "
           "ON CONFLICT(sha) DO UPDATE SET parent1=?2, parent2=?3, base=?4, "
           "validity=?5, ambiguous_base=?6, merge_effort=?7;");
    s.bind(1, scenario.merge.sha).bind(2, scenario.parent1).bind(3, scenario.parent2);
    if (scenario.base)
        s.bind(4, *scenario.base);
    else
        s.bind_null(4);
    s.bind(5, std::string(git::to_string(scenario.validity)));
    s.bind(6, static_cast<std::int64_t>(scenario.ambiguous_base ? 1 : 0));
    if (merge_effort)
        s.bind(7, *merge_effort);
    else
        s.bind_null(7);
    try {
        s.run();
    } catch (const IntegrityError& e) {
        throw IntegrityError(std::string(e.what()) + " (merge " +
                             scenario.merge.sha + ")");
    }
}

void Store::upsert_refactoring(const refactoring::RefactoringRecord& record,
                               std::int64_t seq) {
    Stmt s(db_,
           "INSERT OR REPLACE INTO refactorings (commit_sha, type, "
           "description, seq) VALUES (?1, ?2, ?3, ?4);");
    s.bind(1, record.commit).bind(2, record.type).bind(3, record.description)
        .bind(4, seq);
    s.run();
}

void Store::upsert_branch_membership(const std::string& merge_sha,
                                     const std::string& commit_sha, int branch) {
    Stmt s(db_,
           "INSERT INTO merge_branch_refactorings (merge_sha, commit_sha, "
           "branch) VALUES (?1, ?2, ?3) "
           "ON CONFLICT(merge_sha, commit_sha) DO UPDATE SET branch = ?3;");
    s.bind(1, merge_sha).bind(2, commit_sha)
        .bind(3, static_cast<std::int64_t>(branch));
    try {
        s.run();
    } catch (const IntegrityError& e) {
        throw IntegrityError(std::string(e.what()) + " (merge " + merge_sha +
                             ", commit " + commit_sha + ")");
    }
}

std::int64_t Store::count_rows(const std::string& table) const {
    Stmt s(db_, ("SELECT COUNT(*) FROM " + table + ";").c_str());
    s.step();
    return s.column_int64(0);
}

std::vector<git::CommitRef> Store::load_commits() const {
    Stmt s(db_, "SELECT sha, date, project FROM commits ORDER BY sha;");
    std::vector<git::CommitRef> out;
    while (s.step()) {
        git::CommitRef c;
        c.sha = s.column_text(0);
        c.author_time = static_cast<std::time_t>(s.column_int64(1));
        c.project = s.column_text(2);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<refactoring::RefactoringRecord> Store::load_refactorings() const {
    Stmt s(db_,
           "SELECT commit_sha, type, description FROM refactorings "
           "ORDER BY commit_sha, type, description, seq;");
    std::vector<refactoring::RefactoringRecord> out;
    while (s.step())
        out.push_back({s.column_text(0), s.column_text(1), s.column_text(2)});
    return out;
}

std::vector<Store::StoredMerge> Store::load_merges() const {
    Stmt s(db_,
           "SELECT m.sha, m.parent1, m.parent2, m.base, m.validity, "
           "m.ambiguous_base, m.merge_effort, c.date, c.project "
           "FROM merge_commits m JOIN commits c ON c.sha = m.sha "
           "ORDER BY m.sha;");
    std::vector<StoredMerge> out;
    while (s.step()) {
        StoredMerge m;
        m.scenario.merge.sha = s.column_text(0);
        m.scenario.parent1 = s.column_text(1);
        m.scenario.parent2 = s.column_text(2);
        if (!s.column_is_null(3)) m.scenario.base = s.column_text(3);
        m.scenario.validity = git::validity_from_string(s.column_text(4));
        m.scenario.ambiguous_base = s.column_int64(5) != 0;
        if (!s.column_is_null(6)) m.merge_effort = s.column_int64(6);
        m.scenario.merge.author_time = static_cast<std::time_t>(s.column_int64(7));
        m.scenario.merge.project = s.column_text(8);
        m.scenario.merge.parents = {m.scenario.parent1, m.scenario.parent2};
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<rules::MergeFeatureRow> Store::feature_rows() const {
    Stmt s(db_,
           "SELECT m.sha, c.project, m.merge_effort, "
           "  (SELECT COUNT(*) FROM merge_branch_refactorings mb "
           "   JOIN refactorings r ON r.commit_sha = mb.commit_sha "
           "   WHERE mb.merge_sha = m.sha AND mb.branch = 1), "
           "  (SELECT COUNT(*) FROM merge_branch_refactorings mb "
           "   JOIN refactorings r ON r.commit_sha = mb.commit_sha "
           "   WHERE mb.merge_sha = m.sha AND mb.branch = 2) "
           "FROM merge_commits m JOIN commits c ON c.sha = m.sha "
           "WHERE m.validity = 'Valid' ORDER BY c.project, m.sha;");
    std::vector<rules::MergeFeatureRow> rows;
    while (s.step()) {
        rules::MergeFeatureRow r;
        r.merge_sha = s.column_text(0);
        r.project = s.column_text(1);
        r.effort = s.column_int64(2);
        r.b1 = s.column_int64(3);
        r.b2 = s.column_int64(4);
        r.refactorings = r.b1 + r.b2;
        rows.push_back(std::move(r));
    }
    return rows;
}

StoredCounts persist(
    Store& store, const std::vector<git::CommitRef>& commits,
    const std::vector<std::pair<git::MergeScenario,
                                std::optional<std::int64_t>>>& merges,
    const std::vector<refactoring::RefactoringRecord>& refactorings,
    const std::vector<git::BranchAttribution>& attributions) {
    store.begin();
    try {
        for (const auto& c : commits) store.upsert_commit(c);
        for (const auto& [scenario, effort] : merges)
            store.upsert_merge(scenario, effort);

        std::map<std::tuple<std::string, std::string, std::string>,
                 std::int64_t> seen;
        for (const auto& r : refactorings) {
            std::int64_t seq = seen[{r.commit, r.type, r.description}]++;
            store.upsert_refactoring(r, seq);
        }
        for (const auto& attr : attributions) {
            for (const auto& sha : attr.b1_commits)
                store.upsert_branch_membership(attr.merge_sha, sha, 1);
            for (const auto& sha : attr.b2_commits)
                store.upsert_branch_membership(attr.merge_sha, sha, 2);
        }
        store.commit();
    } catch (...) {
        try {
            store.rollback();
        } catch (...) {
        }
        throw;
    }
    return StoredCounts{
        store.count_rows("commits"),
        store.count_rows("merge_commits"),
        store.count_rows("refactorings"),
        store.count_rows("merge_branch_refactorings"),
    };
}

}  // namespace mergemine::store
