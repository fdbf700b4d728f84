#include "mergemine/git_history.hpp"

#include <json.hpp>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <queue>

#include "mergemine/errors.hpp"
#include "mergemine/proc.hpp"
#include "mergemine/util.hpp"

namespace mergemine::git {

using nlohmann::json;

GitRepo::GitRepo(std::string path, std::string project)
    : path_(std::move(path)), project_(std::move(project)) {
    if (project_.empty()) {
        auto name = std::filesystem::path(path_).filename().string();
        if (name == ".git" || name.empty())
            name = std::filesystem::path(path_).parent_path().filename().string();
        project_ = name.empty() ? path_ : name;
    }
}

std::string GitRepo::run_git(const std::vector<std::string>& args) const {
    std::vector<std::string> argv = {"git", "-C", path_};
    argv.insert(argv.end(), args.begin(), args.end());
    ProcResult res = run_process(argv);
    if (res.exit_code != 0)
        throw RepoError("git " + (args.empty() ? "" : args[0]) + " failed in " +
                        path_ + ": " + res.err);
    return res.out;
}

std::string GitRepo::head_sha() const {
    {
        std::vector<std::string> argv = {"git", "-C", path_, "rev-parse",
                                         "--git-dir"};
        ProcResult res = run_process(argv);
        if (res.exit_code != 0)
            throw RepoError("not a readable git repository: " + path_);
    }
    std::vector<std::string> argv = {"git", "-C",       path_,
                                     "rev-parse", "--verify", "HEAD^{commit}"};
    ProcResult res = run_process(argv);
    if (res.exit_code != 0)
        throw ConfigError("repository has no default branch head: " + path_);
    std::string sha = res.out;
    while (!sha.empty() && (sha.back() == '\n' || sha.back() == '\r'))
        sha.pop_back();
    if (!is_hex_sha(sha))
        throw RepoError("unexpected rev-parse output in " + path_);
    return sha;
}

std::vector<GitRepo::TreeEntry> GitRepo::ls_tree(const std::string& commit) const {
    std::string out = run_git({"ls-tree", "-r", "-z", commit});
    std::vector<TreeEntry> entries;
    std::size_t pos = 0;
    while (pos < out.size()) {
        std::size_t end = out.find('\0', pos);
        if (end == std::string::npos) break;
        std::string_view rec(out.data() + pos, end - pos);
        pos = end + 1;
        // "<mode> <type> <oid>\t<path>"
        std::size_t sp1 = rec.find(' ');
        std::size_t sp2 = rec.find(' ', sp1 + 1);
        std::size_t tab = rec.find('\t', sp2 + 1);
        if (sp1 == std::string_view::npos || sp2 == std::string_view::npos ||
            tab == std::string_view::npos)
            throw RepoError("unparseable ls-tree record in " + path_);
        std::string_view type = rec.substr(sp1 + 1, sp2 - sp1 - 1);
        if (type != "blob") continue;  // skips submodule gitlinks
        TreeEntry e;
        e.mode = static_cast<unsigned>(
            std::stoul(std::string(rec.substr(0, sp1)), nullptr, 8));
        e.oid = std::string(rec.substr(sp2 + 1, tab - sp2 - 1));
        e.path = std::string(rec.substr(tab + 1));
        entries.push_back(std::move(e));
    }
    return entries;
}

std::map<std::string, std::string> GitRepo::read_blobs(
    const std::vector<std::string>& oids) const {
    std::map<std::string, std::string> blobs;
    if (oids.empty()) return blobs;

    // Requests go through a temp file so cat-file --batch cannot deadlock on
    // pipe backpressure however large the response gets.
    std::string reqs;
    for (const auto& oid : oids) {
        reqs += oid;
        reqs += '\n';
    }
    auto req_path = std::filesystem::temp_directory_path() /
                    ("mergemine-batch-" + std::to_string(getpid()) + "-" +
                     sha256_hex(reqs).substr(0, 16));
    write_file(req_path.string(), reqs);

    ProcOptions opts;
    opts.stdin_file = req_path.string();
    ProcResult res =
        run_process({"git", "-C", path_, "cat-file", "--batch"}, opts);
    std::filesystem::remove(req_path);
    if (res.exit_code != 0)
        throw RepoError("git cat-file --batch failed in " + path_ + ": " +
                        res.err);

    const std::string& out = res.out;
    std::size_t pos = 0;
    while (pos < out.size()) {
        std::size_t nl = out.find('\n', pos);
        if (nl == std::string::npos) break;
        std::string header = out.substr(pos, nl - pos);
        pos = nl + 1;
        std::size_t sp1 = header.find(' ');
        if (sp1 == std::string::npos)
            throw RepoError("unparseable cat-file header: " + header);
        std::string oid = header.substr(0, sp1);
        if (header.find(" missing") != std::string::npos)
            throw RepoError("object missing from " + path_ + ": " + oid);
        std::size_t sp2 = header.rfind(' ');
        std::size_t size = std::stoull(header.substr(sp2 + 1));
        if (pos + size > out.size())
            throw RepoError("truncated cat-file output in " + path_);
        blobs[oid] = out.substr(pos, size);
        pos += size + 1;  // trailing newline after each object
    }
    for (const auto& oid : oids)
        if (!blobs.count(oid))
            throw RepoError("blob not returned by cat-file: " + oid);
    return blobs;
}

const char* to_string(Validity v) {
    switch (v) {
        case Validity::Valid: return "Valid";
        case Validity::NoFastForward: return "NoFastForward";
        case Validity::Octopus: return "Octopus";
        case Validity::NoCommonAncestor: return "NoCommonAncestor";
    }
    return "?";
}

Validity validity_from_string(const std::string& s) {
    if (s == "Valid") return Validity::Valid;
    if (s == "NoFastForward") return Validity::NoFastForward;
    if (s == "Octopus") return Validity::Octopus;
    if (s == "NoCommonAncestor") return Validity::NoCommonAncestor;
    throw InputError("unknown validity: " + s);
}

CommitGraph CommitGraph::load(const GitRepo& repo) {
    std::string head = repo.head_sha();
    std::string out = repo.run_git({"log", "--format=%H %P %at", head, "--"});

    CommitGraph g;
    for (std::string_view line : split_lines(out)) {
        if (line.empty()) continue;
        std::vector<std::string> tokens;
        std::size_t p = 0;
        while (p < line.size()) {
            std::size_t sp = line.find(' ', p);
            if (sp == std::string_view::npos) sp = line.size();
            if (sp > p) tokens.emplace_back(line.substr(p, sp - p));
            p = sp + 1;
        }
        if (tokens.size() < 2)
            throw RepoError("unparseable log line: " + std::string(line));
        CommitRef c;
        c.sha = tokens.front();
        c.author_time = static_cast<std::time_t>(std::stoll(tokens.back()));
        c.parents.assign(tokens.begin() + 1, tokens.end() - 1);
        c.project = repo.project();
        if (!is_hex_sha(c.sha))
            throw RepoError("bad sha in log output: " + c.sha);
        g.index_[c.sha] = g.commits_.size();
        g.commits_.push_back(std::move(c));
    }

    g.parent_idx_.resize(g.commits_.size());
    for (std::size_t i = 0; i < g.commits_.size(); ++i) {
        for (const auto& p : g.commits_[i].parents) {
            auto it = g.index_.find(p);
            // Parents outside the reachable set cannot occur when walking
            // from a single head, but shallow clones truncate history.
            if (it != g.index_.end()) g.parent_idx_[i].push_back(it->second);
        }
    }

    // Kahn topological sort, ancestors first, ties broken by smallest sha.
    std::vector<std::size_t> pending(g.commits_.size(), 0);
    std::vector<std::vector<std::size_t>> children(g.commits_.size());
    for (std::size_t i = 0; i < g.commits_.size(); ++i) {
        pending[i] = g.parent_idx_[i].size();
        for (std::size_t p : g.parent_idx_[i]) children[p].push_back(i);
    }
    auto cmp = [&](std::size_t a, std::size_t b) {
        return g.commits_[a].sha > g.commits_[b].sha;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)>
        ready(cmp);
    for (std::size_t i = 0; i < g.commits_.size(); ++i)
        if (pending[i] == 0) ready.push(i);
    while (!ready.empty()) {
        std::size_t i = ready.top();
        ready.pop();
        g.topo_order_.push_back(i);
        for (std::size_t c : children[i])
            if (--pending[c] == 0) ready.push(c);
    }
    if (g.topo_order_.size() != g.commits_.size())
        throw RepoError("commit graph has a cycle (corrupt repository?)");
    return g;
}

bool CommitGraph::contains(const std::string& sha) const {
    return index_.count(sha) != 0;
}

std::size_t CommitGraph::index_of(const std::string& sha) const {
    auto it = index_.find(sha);
    if (it == index_.end()) throw InputError("unknown commit: " + sha);
    return it->second;
}

const CommitRef& CommitGraph::at(const std::string& sha) const {
    return commits_[index_of(sha)];
}

std::vector<bool> CommitGraph::reachable_from(const std::string& sha) const {
    std::vector<bool> seen(commits_.size(), false);
    std::vector<std::size_t> stack = {index_of(sha)};
    seen[stack[0]] = true;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t p : parent_idx_[i]) {
            if (!seen[p]) {
                seen[p] = true;
                stack.push_back(p);
            }
        }
    }
    return seen;
}

bool CommitGraph::is_ancestor(const std::string& maybe_ancestor,
                              const std::string& descendant) const {
    std::size_t target = index_of(maybe_ancestor);
    std::vector<bool> seen(commits_.size(), false);
    std::vector<std::size_t> stack = {index_of(descendant)};
    seen[stack[0]] = true;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        if (i == target) return true;
        for (std::size_t p : parent_idx_[i]) {
            if (!seen[p]) {
                seen[p] = true;
                stack.push_back(p);
            }
        }
    }
    return false;
}

CommitGraph::BaseResult CommitGraph::merge_base(const std::string& parent1,
                                                const std::string& parent2) const {
    std::vector<bool> anc1 = reachable_from(parent1);
    std::vector<bool> anc2 = reachable_from(parent2);

    std::vector<std::size_t> common;
    for (std::size_t i = 0; i < commits_.size(); ++i)
        if (anc1[i] && anc2[i]) common.push_back(i);
    if (common.empty()) return {};

    // A best common ancestor is a common ancestor that is not a proper
    // ancestor of another one. One walk from all common commits through
    // parent edges marks everything dominated.
    std::vector<bool> dominated(commits_.size(), false);
    std::vector<bool> visited(commits_.size(), false);
    std::vector<std::size_t> stack;
    for (std::size_t c : common)
        for (std::size_t p : parent_idx_[c])
            if (!dominated[p]) {
                dominated[p] = true;
                stack.push_back(p);
            }
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        if (visited[i]) continue;
        visited[i] = true;
        for (std::size_t p : parent_idx_[i])
            if (!dominated[p]) {
                dominated[p] = true;
                stack.push_back(p);
            }
    }

    std::vector<std::string> best;
    for (std::size_t c : common)
        if (!dominated[c]) best.push_back(commits_[c].sha);
    if (best.empty()) return {};
    auto smallest = *std::min_element(best.begin(), best.end());
    return {smallest, best.size() > 1};
}

Validity classify_merge(const CommitGraph& graph, const MergeScenario& scenario) {
    if (scenario.merge.parents.size() > 2) return Validity::Octopus;
    if (graph.is_ancestor(scenario.parent1, scenario.parent2) ||
        graph.is_ancestor(scenario.parent2, scenario.parent1))
        return Validity::NoFastForward;
    if (!scenario.base) return Validity::NoCommonAncestor;
    return Validity::Valid;
}

std::vector<MergeScenario> enumerate_merges(const CommitGraph& graph) {
    std::vector<MergeScenario> scenarios;
    for (std::size_t idx : graph.topo_order()) {
        const CommitRef& c = graph.commits()[idx];
        if (c.parents.size() < 2) continue;
        MergeScenario s;
        s.merge = c;
        s.parent1 = c.parents[0];
        s.parent2 = c.parents[1];
        if (c.parents.size() > 2) {
            s.validity = Validity::Octopus;
        } else {
            auto base = graph.merge_base(s.parent1, s.parent2);
            s.base = base.base;
            s.ambiguous_base = base.ambiguous;
            s.validity = classify_merge(graph, s);
        }
        scenarios.push_back(std::move(s));
    }
    return scenarios;
}

std::vector<MergeScenario> enumerate_merges(const GitRepo& repo) {
    return enumerate_merges(CommitGraph::load(repo));
}

BranchAttribution attribute_branch_commits(const CommitGraph& graph,
                                           const MergeScenario& scenario) {
    if (scenario.validity != Validity::Valid)
        throw ContractError("attribute_branch_commits requires a Valid scenario");
    std::vector<bool> anc1 = graph.reachable_from(scenario.parent1);
    std::vector<bool> anc2 = graph.reachable_from(scenario.parent2);
    std::vector<bool> ancb = graph.reachable_from(*scenario.base);

    BranchAttribution attr;
    attr.merge_sha = scenario.merge.sha;
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const std::string& sha = graph.commits()[i].sha;
        if (sha == scenario.merge.sha) continue;
        if (anc1[i] && !ancb[i]) {
            attr.b1_commits.insert(sha);
        } else if (anc2[i] && !ancb[i]) {
            attr.b2_commits.insert(sha);
        }
    }
    return attr;
}

std::string scenario_to_json_line(const MergeScenario& s) {
    json j = {
        {"project", s.merge.project},
        {"sha", s.merge.sha},
        {"parents", s.merge.parents},
        {"author_time", format_iso8601_utc(s.merge.author_time)},
        {"parent1", s.parent1},
        {"parent2", s.parent2},
        {"base", s.base ? json(*s.base) : json(nullptr)},
        {"validity", to_string(s.validity)},
        {"ambiguous_base", s.ambiguous_base},
    };
    return j.dump();
}

MergeScenario scenario_from_json_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("malformed scenario line: " + line);
    MergeScenario s;
    try {
        s.merge.project = j.at("project").get<std::string>();
        s.merge.sha = j.at("sha").get<std::string>();
        s.merge.parents = j.at("parents").get<std::vector<std::string>>();
        auto t = parse_iso8601_utc(j.at("author_time").get<std::string>());
        if (!t) throw InputError("bad author_time");
        s.merge.author_time = *t;
        s.parent1 = j.at("parent1").get<std::string>();
        s.parent2 = j.at("parent2").get<std::string>();
        if (!j.at("base").is_null()) s.base = j.at("base").get<std::string>();
        s.validity = validity_from_string(j.at("validity").get<std::string>());
        s.ambiguous_base = j.value("ambiguous_base", false);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed scenario line: ") + e.what());
    }
    return s;
}

}  // namespace mergemine::git
