#include "mergemine/effort.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

#include "mergemine/diff.hpp"
#include "mergemine/errors.hpp"
#include "mergemine/util.hpp"

namespace mergemine::effort {

using nlohmann::json;

void ActionMultiset::add(Action action, std::int64_t count) {
    if (count <= 0) return;
    counts_[std::move(action)] += count;
}

std::int64_t ActionMultiset::count(const Action& action) const {
    auto it = counts_.find(action);
    return it == counts_.end() ? 0 : it->second;
}

std::int64_t ActionMultiset::cardinality() const {
    std::int64_t total = 0;
    for (const auto& [action, n] : counts_) total += n;
    return total;
}

ActionMultiset multiset_sum(const ActionMultiset& a, const ActionMultiset& b) {
    ActionMultiset out = a;
    for (const auto& [action, n] : b.entries()) out.add(action, n);
    return out;
}

ActionMultiset multiset_minus(const ActionMultiset& a, const ActionMultiset& b) {
    ActionMultiset out;
    for (const auto& [action, n] : a.entries()) {
        std::int64_t left = n - b.count(action);
        if (left > 0) out.add(action, left);
    }
    return out;
}

const char* to_string(EffortMode mode) {
    return mode == EffortMode::MergeMinusBranches ? "merge-minus-branches"
                                                  : "symmetric";
}

EffortMode effort_mode_from_string(const std::string& s) {
    if (s == "merge-minus-branches") return EffortMode::MergeMinusBranches;
    if (s == "symmetric") return EffortMode::Symmetric;
    throw ConfigError("unknown effort mode: " + s);
}

namespace {

bool looks_binary(std::string_view bytes) {
    std::size_t probe = std::min<std::size_t>(bytes.size(), 8000);
    return bytes.substr(0, probe).find('\0') != std::string_view::npos;
}

void accumulate_file_diff(ActionMultiset& out, const std::string& path,
                          std::string_view from_bytes, std::string_view to_bytes,
                          bool include_paths) {
    std::vector<std::string_view> from_lines = split_lines(from_bytes);
    std::vector<std::string_view> to_lines = split_lines(to_bytes);
    diff::LineEdits edits = diff::line_diff(from_lines, to_lines);
    const std::string& key = include_paths ? path : std::string();
    for (std::size_t i : edits.removed)
        out.add({ActionKind::Remove, key, std::string(from_lines[i])});
    for (std::size_t j : edits.added)
        out.add({ActionKind::Add, key, std::string(to_lines[j])});
}

}  // namespace

ActionMultiset diff_actions(const git::GitRepo& repo,
                            const std::string& from_commit,
                            const std::string& to_commit,
                            const DiffOptions& opts,
                            std::vector<SkippedFile>* skipped) {
    std::map<std::string, std::string> from_oids, to_oids;
    for (const auto& e : repo.ls_tree(from_commit)) from_oids[e.path] = e.oid;
    for (const auto& e : repo.ls_tree(to_commit)) to_oids[e.path] = e.oid;

    // Paths whose blob differs between the two trees.
    std::vector<std::pair<std::string, std::pair<std::string, std::string>>>
        changed;  // path -> (from oid or "", to oid or "")
    std::set<std::string> wanted_oids;
    for (const auto& [path, oid] : from_oids) {
        auto it = to_oids.find(path);
        if (it != to_oids.end() && it->second == oid) continue;
        changed.push_back({path, {oid, it == to_oids.end() ? "" : it->second}});
    }
    for (const auto& [path, oid] : to_oids) {
        if (!from_oids.count(path)) changed.push_back({path, {"", oid}});
    }
    std::sort(changed.begin(), changed.end());
    for (const auto& [path, oids] : changed) {
        if (!oids.first.empty()) wanted_oids.insert(oids.first);
        if (!oids.second.empty()) wanted_oids.insert(oids.second);
    }

    std::map<std::string, std::string> blobs = repo.read_blobs(
        std::vector<std::string>(wanted_oids.begin(), wanted_oids.end()));

    ActionMultiset actions;
    for (const auto& [path, oids] : changed) {
        static const std::string kEmpty;
        const std::string& from_bytes =
            oids.first.empty() ? kEmpty : blobs.at(oids.first);
        const std::string& to_bytes =
            oids.second.empty() ? kEmpty : blobs.at(oids.second);
        if (looks_binary(from_bytes) || looks_binary(to_bytes)) {
            if (skipped) skipped->push_back({path, "binary"});
            continue;
        }
        if (static_cast<std::int64_t>(from_bytes.size()) > opts.max_file_bytes ||
            static_cast<std::int64_t>(to_bytes.size()) > opts.max_file_bytes) {
            if (skipped) skipped->push_back({path, "too-large"});
            continue;
        }
        accumulate_file_diff(actions, path, from_bytes, to_bytes,
                             opts.include_paths);
    }
    return actions;
}

EffortResult merge_effort(const git::GitRepo& repo,
                          const git::MergeScenario& scenario, EffortMode mode,
                          const DiffOptions& opts) {
    if (scenario.validity != git::Validity::Valid)
        throw ContractError("merge_effort requires a Valid scenario");

    const std::string& base = *scenario.base;
    ActionMultiset actions_merge =
        diff_actions(repo, base, scenario.merge.sha, opts);
    ActionMultiset actions_branches =
        multiset_sum(diff_actions(repo, base, scenario.parent1, opts),
                     diff_actions(repo, base, scenario.parent2, opts));

    EffortResult r;
    r.merge_sha = scenario.merge.sha;
    r.project = scenario.merge.project;
    r.mode = mode;
    r.actions_merge_size = actions_merge.cardinality();
    r.actions_branches_size = actions_branches.cardinality();
    r.effort = multiset_minus(actions_merge, actions_branches).cardinality();
    if (mode == EffortMode::Symmetric)
        r.effort += multiset_minus(actions_branches, actions_merge).cardinality();
    return r;
}

std::string effort_to_json_line(const EffortResult& r) {
    json j = {
        {"project", r.project},
        {"merge_sha", r.merge_sha},
        {"effort", r.effort},
        {"mode", to_string(r.mode)},
        {"actions_merge_size", r.actions_merge_size},
        {"actions_branches_size", r.actions_branches_size},
    };
    return j.dump();
}

}  // namespace mergemine::effort
