#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

#include "mergemine/corpus.hpp"
#include "mergemine/errors.hpp"
#include "mergemine/util.hpp"

using namespace mergemine;
using namespace mergemine::corpus;
using nlohmann::json;

namespace {

json repo_node(const std::string& name, std::int64_t stars, bool fork,
               const std::string& language = "Java",
               const std::string& pushed = "2021-09-19T00:00:00Z") {
    return json{
        {"nameWithOwner", name},
        {"stargazerCount", stars},
        {"isFork", fork},
        {"isArchived", false},
        {"pushedAt", pushed},
        {"mentionableUsers", {{"totalCount", 42}}},
        {"defaultBranchRef",
         {{"target", {{"history", {{"totalCount", 9000}}}}}}},
        {"primaryLanguage", {{"name", language}}},
    };
}

// Local stand-in for the GraphQL endpoint.
class FakeGitHub {
   public:
    FakeGitHub() {
        server_.Post("/graphql", [this](const httplib::Request& req,
                                        httplib::Response& res) {
            handle(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this]() { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeGitHub() {
        server_.stop();
        thread_.join();
    }

    int port() const { return port_; }
    int requests() const { return requests_; }

    int status_override = 0;
    std::string body_override;

   private:
    void handle(const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        if (status_override != 0) {
            res.status = status_override;
            if (status_override == 403)
                res.set_header("X-RateLimit-Reset", "1700000000");
            res.set_content("{}", "application/json");
            return;
        }
        if (!body_override.empty()) {
            res.set_content(body_override, "application/json");
            return;
        }
        json body = json::parse(req.body);
        bool first_page = body["variables"]["after"].is_null();
        json nodes = json::array();
        json page_info;
        if (first_page) {
            nodes.push_back(repo_node("zed/page-one", 9000, false));
            nodes.push_back(repo_node("aaa/fork", 9000, true));
            page_info = {{"hasNextPage", true}, {"endCursor", "cursor-1"}};
        } else {
            CHECK(body["variables"]["after"].get<std::string>() == "cursor-1");
            nodes.push_back(repo_node("abc/page-two", 7000, false));
            nodes.push_back(repo_node("low/stars", 100, false));
            page_info = {{"hasNextPage", false}, {"endCursor", ""}};
        }
        json reply = {
            {"data", {{"search", {{"pageInfo", page_info}, {"nodes", nodes}}}}}};
        res.set_content(reply.dump(), "application/json");
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
};

GraphQLEndpoint local_endpoint(const FakeGitHub& gh) {
    GraphQLEndpoint ep;
    ep.host = "127.0.0.1";
    ep.port = gh.port();
    ep.tls = false;
    return ep;
}

const std::time_t kSnapshot = *parse_iso8601_utc("2021-09-20T00:00:00Z");

}  // namespace

TEST_CASE("client paginates, filters, and sorts") {
    FakeGitHub gh;
    CorpusFilter filter;
    auto repos =
        fetch_candidate_repos(filter, "token", kSnapshot, local_endpoint(gh));
    CHECK(gh.requests() == 2);
    // The fork and the under-starred repo are dropped; the rest sorted.
    REQUIRE(repos.size() == 2);
    CHECK(repos[0].owner_and_name == "abc/page-two");
    CHECK(repos[1].owner_and_name == "zed/page-one");
    CHECK(repos[0].contributors == 42);
    CHECK(repos[0].default_branch_commits == 9000);
    CHECK(repos[0].primary_language == "Java");
}

TEST_CASE("HTTP 401 is a credential error") {
    FakeGitHub gh;
    gh.status_override = 401;
    CHECK_THROWS_AS(fetch_candidate_repos(CorpusFilter{}, "token", kSnapshot,
                                          local_endpoint(gh)),
                    CredentialError);
}

TEST_CASE("HTTP 403 carries the rate-limit reset time") {
    FakeGitHub gh;
    gh.status_override = 403;
    try {
        fetch_candidate_repos(CorpusFilter{}, "token", kSnapshot,
                              local_endpoint(gh));
        FAIL("expected RateLimitError");
    } catch (const RateLimitError& e) {
        CHECK(e.reset_at == 1700000000);
    }
}

TEST_CASE("GraphQL RATE_LIMITED errors map to RateLimitError") {
    FakeGitHub gh;
    gh.body_override =
        R"({"errors": [{"type": "RATE_LIMITED", "message": "slow down"}]})";
    CHECK_THROWS_AS(fetch_candidate_repos(CorpusFilter{}, "token", kSnapshot,
                                          local_endpoint(gh)),
                    RateLimitError);
}

TEST_CASE("malformed responses are transport errors") {
    FakeGitHub gh;
    gh.body_override = "not json at all";
    CHECK_THROWS_AS(fetch_candidate_repos(CorpusFilter{}, "token", kSnapshot,
                                          local_endpoint(gh)),
                    TransportError);
}

TEST_CASE("unreachable endpoint is a transport error") {
    GraphQLEndpoint ep;
    ep.host = "127.0.0.1";
    ep.port = 9;  // discard port, nothing listens
    ep.tls = false;
    CHECK_THROWS_AS(
        fetch_candidate_repos(CorpusFilter{}, "token", kSnapshot, ep),
        TransportError);
}
