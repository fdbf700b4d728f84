#include "mergemine/corpus.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>

#include "mergemine/errors.hpp"
#include "mergemine/util.hpp"

namespace mergemine::corpus {

using nlohmann::json;

const char* kRepoSearchQuery = R"(
query($q: String!, $after: String) {
  search(query: $q, type: REPOSITORY, first: 100, after: $after) {
    pageInfo { hasNextPage endCursor }
    nodes {
      ... on Repository {
        nameWithOwner
        stargazerCount
        isFork
        isArchived
        pushedAt
        mentionableUsers { totalCount }
        defaultBranchRef { target { ... on Commit { history { totalCount } } } }
        primaryLanguage { name }
      }
    }
  }
}
)";

std::string build_search_string(const CorpusFilter& filter,
                                std::time_t snapshot_time) {
    std::time_t cutoff = snapshot_time - filter.max_push_age_days * 86400;
    std::string date = format_iso8601_utc(cutoff).substr(0, 10);
    return "is:public fork:false archived:false stars:>=" +
           std::to_string(filter.min_stars) + " pushed:>=" + date;
}

bool passes_candidate_criteria(const RepoMeta& repo, const CorpusFilter& filter,
                               std::time_t snapshot_time) {
    if (repo.is_fork || repo.is_archived) return false;
    if (repo.stars < filter.min_stars) return false;
    std::time_t cutoff = snapshot_time - filter.max_push_age_days * 86400;
    return repo.last_push >= cutoff;
}

namespace {

RepoMeta repo_from_graphql_node(const json& node) {
    RepoMeta r;
    r.owner_and_name = node.at("nameWithOwner").get<std::string>();
    r.stars = node.at("stargazerCount").get<std::int64_t>();
    r.is_fork = node.at("isFork").get<bool>();
    r.is_archived = node.at("isArchived").get<bool>();
    if (node.contains("pushedAt") && node["pushedAt"].is_string()) {
        auto t = parse_iso8601_utc(node["pushedAt"].get<std::string>());
        r.last_push = t.value_or(0);
    }
    if (node.contains("mentionableUsers") && node["mentionableUsers"].is_object())
        r.contributors = node["mentionableUsers"].value("totalCount", 0);
    if (node.contains("defaultBranchRef") && node["defaultBranchRef"].is_object())
        r.default_branch_commits = node["defaultBranchRef"]["target"]["history"]
                                       .value("totalCount", 0);
    if (node.contains("primaryLanguage") && node["primaryLanguage"].is_object())
        r.primary_language = node["primaryLanguage"].value("name", "");
    return r;
}

void sort_by_name(std::vector<RepoMeta>& repos) {
    std::sort(repos.begin(), repos.end(),
              [](const RepoMeta& a, const RepoMeta& b) {
                  return a.owner_and_name < b.owner_and_name;
              });
}

}  // namespace

std::vector<RepoMeta> fetch_candidate_repos(const CorpusFilter& filter,
                                            const std::string& auth_token,
                                            std::time_t snapshot_time,
                                            const GraphQLEndpoint& endpoint) {
    if (auth_token.empty())
        throw CredentialError("GitHub token missing (set GH_TOKEN)");

    std::unique_ptr<httplib::SSLClient> tls_client;
    std::unique_ptr<httplib::Client> plain_client;
    if (endpoint.tls)
        tls_client = std::make_unique<httplib::SSLClient>(endpoint.host,
                                                          endpoint.port);
    else
        plain_client = std::make_unique<httplib::Client>(endpoint.host,
                                                         endpoint.port);
    auto post = [&](const std::string& body) {
        httplib::Headers headers = {
            {"Authorization", "bearer " + auth_token},
            {"User-Agent", "mergemine"},
        };
        return endpoint.tls ? tls_client->Post(endpoint.path, headers, body,
                                               "application/json")
                            : plain_client->Post(endpoint.path, headers, body,
                                                 "application/json");
    };
    if (tls_client) {
        tls_client->set_connection_timeout(30);
        tls_client->set_read_timeout(60);
    } else {
        plain_client->set_connection_timeout(30);
        plain_client->set_read_timeout(60);
    }

    std::vector<RepoMeta> repos;
    std::string cursor;
    bool has_next = true;
    while (has_next) {
        json variables = {{"q", build_search_string(filter, snapshot_time)}};
        if (cursor.empty())
            variables["after"] = nullptr;
        else
            variables["after"] = cursor;
        json body = {{"query", kRepoSearchQuery}, {"variables", variables}};

        auto res = post(body.dump());
        if (!res)
            throw TransportError("network failure talking to " + endpoint.host);
        if (res->status == 401)
            throw CredentialError("GitHub rejected the token (HTTP 401)");
        if (res->status == 403 || res->status == 429) {
            std::time_t reset = 0;
            if (res->has_header("X-RateLimit-Reset"))
                reset = static_cast<std::time_t>(
                    std::stoll(res->get_header_value("X-RateLimit-Reset")));
            throw RateLimitError("GitHub rate limit hit", reset);
        }
        if (res->status != 200)
            throw TransportError("unexpected HTTP status " +
                                 std::to_string(res->status));

        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded())
            throw TransportError("malformed GraphQL response");
        if (reply.contains("errors")) {
            for (const auto& e : reply["errors"]) {
                if (e.value("type", "") == "RATE_LIMITED")
                    throw RateLimitError("GitHub rate limit hit", 0);
            }
            throw TransportError("GraphQL error: " + reply["errors"].dump());
        }

        const json& search = reply.at("data").at("search");
        for (const auto& node : search.at("nodes")) {
            if (!node.is_object() || node.empty()) continue;
            RepoMeta r = repo_from_graphql_node(node);
            if (passes_candidate_criteria(r, filter, snapshot_time))
                repos.push_back(std::move(r));
        }
        has_next = search.at("pageInfo").value("hasNextPage", false);
        cursor = search.at("pageInfo").value("endCursor", "");
        if (has_next && cursor.empty()) break;
    }
    sort_by_name(repos);
    return repos;
}

std::vector<RepoMeta> replay_candidate_repos(std::istream& fixture,
                                             const CorpusFilter& filter,
                                             std::time_t snapshot_time) {
    std::vector<RepoMeta> repos;
    for (const RepoMeta& r : read_fixture(fixture))
        if (passes_candidate_criteria(r, filter, snapshot_time))
            repos.push_back(r);
    sort_by_name(repos);
    return repos;
}

std::vector<RepoMeta> apply_metadata_filters(const std::vector<RepoMeta>& repos,
                                             const CorpusFilter& filter) {
    std::vector<RepoMeta> kept;
    kept.reserve(repos.size());
    for (const RepoMeta& r : repos) {
        if (r.contributors < filter.min_contributors) continue;
        if (r.default_branch_commits < filter.min_commits) continue;
        if (r.primary_language != filter.language) continue;
        if (filter.deny_list.count(r.owner_and_name)) continue;
        kept.push_back(r);
    }
    return kept;
}

namespace {

// Exclusive-method quantile (see FenceStats comment in the header).
double quantile_exclusive(const std::vector<std::int64_t>& sorted, double p) {
    const auto n = sorted.size();
    double h = (static_cast<double>(n) + 1.0) * p;
    if (h < 1.0) h = 1.0;
    if (h > static_cast<double>(n)) h = static_cast<double>(n);
    auto lo = static_cast<std::size_t>(std::floor(h));
    double frac = h - static_cast<double>(lo);
    double x_lo = static_cast<double>(sorted[lo - 1]);
    if (frac == 0.0 || lo == n) return x_lo;
    double x_hi = static_cast<double>(sorted[lo]);
    return x_lo + frac * (x_hi - x_lo);
}

}  // namespace

FenceStats tukey_fences(const std::vector<std::int64_t>& values) {
    if (values.empty())
        throw InputError("tukey_fences: empty value list");
    std::vector<std::int64_t> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    FenceStats s;
    s.q1 = quantile_exclusive(sorted, 0.25);
    s.q3 = quantile_exclusive(sorted, 0.75);
    s.iqr = s.q3 - s.q1;
    s.upper_fence = s.q3 + 1.5 * s.iqr;
    return s;
}

std::vector<RepoMeta> select_corpus(
    const std::vector<std::pair<RepoMeta, std::int64_t>>& repos_with_counts) {
    if (repos_with_counts.empty()) return {};
    std::vector<std::int64_t> counts;
    counts.reserve(repos_with_counts.size());
    for (const auto& [repo, count] : repos_with_counts) counts.push_back(count);
    FenceStats fences = tukey_fences(counts);

    std::vector<RepoMeta> survivors;
    for (const auto& [repo, count] : repos_with_counts) {
        if (static_cast<double>(count) > fences.upper_fence) continue;
        if (static_cast<double>(count) < fences.q1) continue;
        survivors.push_back(repo);
    }
    return survivors;
}

std::string to_ndjson_line(const RepoMeta& repo) {
    json j = {
        {"owner_and_name", repo.owner_and_name},
        {"stars", repo.stars},
        {"is_fork", repo.is_fork},
        {"is_archived", repo.is_archived},
        {"last_push", format_iso8601_utc(repo.last_push)},
        {"contributors", repo.contributors},
        {"default_branch_commits", repo.default_branch_commits},
        {"primary_language", repo.primary_language},
    };
    return j.dump();
}

RepoMeta repo_from_json_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("malformed repo fixture line: " + line);
    RepoMeta r;
    try {
        r.owner_and_name = j.at("owner_and_name").get<std::string>();
        r.stars = j.at("stars").get<std::int64_t>();
        r.is_fork = j.at("is_fork").get<bool>();
        r.is_archived = j.at("is_archived").get<bool>();
        auto t = parse_iso8601_utc(j.at("last_push").get<std::string>());
        if (!t) throw InputError("bad last_push timestamp");
        r.last_push = *t;
        r.contributors = j.at("contributors").get<std::int64_t>();
        r.default_branch_commits = j.at("default_branch_commits").get<std::int64_t>();
        r.primary_language = j.at("primary_language").get<std::string>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed repo fixture line: ") + e.what());
    }
    if (r.owner_and_name.empty())
        throw InputError("repo fixture line with empty owner_and_name");
    if (r.stars < 0 || r.contributors < 0 || r.default_branch_commits < 0)
        throw InputError("repo fixture line with negative counter: " +
                         r.owner_and_name);
    return r;
}

void write_fixture(std::ostream& out, const std::vector<RepoMeta>& repos) {
    for (const RepoMeta& r : repos) out << to_ndjson_line(r) << '\n';
}

std::vector<RepoMeta> read_fixture(std::istream& in) {
    std::vector<RepoMeta> repos;
    std::set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        RepoMeta r = repo_from_json_line(line);
        if (!seen.insert(r.owner_and_name).second)
            throw InputError("duplicate repo in fixture snapshot: " +
                             r.owner_and_name);
        repos.push_back(std::move(r));
    }
    return repos;
}

}  // namespace mergemine::corpus
