#pragma once

#include <cstdint>
#include <ctime>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mergemine::corpus {

struct RepoMeta {
    std::string owner_and_name;
    std::int64_t stars = 0;
    bool is_fork = false;
    bool is_archived = false;
    std::time_t last_push = 0;
    std::int64_t contributors = 0;
    std::int64_t default_branch_commits = 0;
    std::string primary_language;

    bool operator==(const RepoMeta&) const = default;
};

struct CorpusFilter {
    std::int64_t min_stars = 5000;
    std::int64_t min_contributors = 10;
    std::int64_t min_commits = 5000;
    std::string language = "Java";
    std::int64_t max_push_age_days = 90;
    std::set<std::string> deny_list;
};

// Quartile convention used throughout: the "exclusive" method with linear
// interpolation between closest ranks. For sorted x[1..n] the p-quantile sits
// at position h = (n + 1) * p, clamped to [1, n]:
//   q = x[floor(h)] + (h - floor(h)) * (x[floor(h) + 1] - x[floor(h)])
struct FenceStats {
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double upper_fence = 0.0;  // q3 + 1.5 * iqr
};

// --- GitHub GraphQL client -------------------------------------------------

// The one query used for repository metadata. $q is the search string built
// from the filter, $after the pagination cursor.
extern const char* kRepoSearchQuery;

std::string build_search_string(const CorpusFilter& filter,
                                std::time_t snapshot_time);

struct GraphQLEndpoint {
    std::string host = "api.github.com";
    int port = 443;
    bool tls = true;
    std::string path = "/graphql";
};

// Searches GitHub for public, non-fork, non-archived repositories meeting the
// star and push-recency criteria. Paginates until exhausted; result sorted by
// owner_and_name. Throws CredentialError / RateLimitError / TransportError.
std::vector<RepoMeta> fetch_candidate_repos(const CorpusFilter& filter,
                                            const std::string& auth_token,
                                            std::time_t snapshot_time,
                                            const GraphQLEndpoint& endpoint = {});

// Offline variant of fetch_candidate_repos: replays a recorded fixture stream
// (one RepoMeta JSON object per line) through the same client-side predicate
// and ordering. snapshot_time anchors the push-recency window.
std::vector<RepoMeta> replay_candidate_repos(std::istream& fixture,
                                             const CorpusFilter& filter,
                                             std::time_t snapshot_time);

// Predicate shared by the live and replay paths.
bool passes_candidate_criteria(const RepoMeta& repo, const CorpusFilter& filter,
                               std::time_t snapshot_time);

// --- Pure selection steps --------------------------------------------------

// Keeps repos with contributors/commits above the thresholds, matching
// primary language, and not on the deny list. Order preserved; idempotent.
std::vector<RepoMeta> apply_metadata_filters(const std::vector<RepoMeta>& repos,
                                             const CorpusFilter& filter);

// Throws InputError on empty input.
FenceStats tukey_fences(const std::vector<std::int64_t>& values);

// Drops repos with valid-merge count above the upper fence, then repos with
// count below q1. Both fences come from one pass over the full input
// distribution (the cuts do not recompute quartiles in between).
std::vector<RepoMeta> select_corpus(
    const std::vector<std::pair<RepoMeta, std::int64_t>>& repos_with_counts);

// --- Fixture I/O -----------------------------------------------------------

std::string to_ndjson_line(const RepoMeta& repo);
RepoMeta repo_from_json_line(const std::string& line);

void write_fixture(std::ostream& out, const std::vector<RepoMeta>& repos);
std::vector<RepoMeta> read_fixture(std::istream& in);

}  // namespace mergemine::corpus
