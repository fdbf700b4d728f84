#include "mergemine/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mergemine/errors.hpp"
#include "mergemine/store.hpp"
#include "mergemine/util.hpp"

namespace mergemine::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

Config config_from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("config file is not a JSON object");

    Config c;
    try {
        if (j.contains("corpus")) {
            const json& s = j["corpus"];
            c.corpus_filter.min_stars = s.value("min_stars", c.corpus_filter.min_stars);
            c.corpus_filter.min_contributors =
                s.value("min_contributors", c.corpus_filter.min_contributors);
            c.corpus_filter.min_commits =
                s.value("min_commits", c.corpus_filter.min_commits);
            c.corpus_filter.language = s.value("language", c.corpus_filter.language);
            c.corpus_filter.max_push_age_days =
                s.value("max_push_age_days", c.corpus_filter.max_push_age_days);
            if (s.contains("deny_list"))
                for (const auto& d : s["deny_list"])
                    c.corpus_filter.deny_list.insert(d.get<std::string>());
            if (s.contains("snapshot_time")) {
                auto t = parse_iso8601_utc(s["snapshot_time"].get<std::string>());
                if (!t) throw ConfigError("bad corpus.snapshot_time");
                c.snapshot_time = *t;
            }
        }
        if (j.contains("detector")) {
            const json& s = j["detector"];
            c.detector.cmd_template = s.value("cmd", c.detector.cmd_template);
            c.detector.timeout_seconds =
                s.value("timeout_secs", c.detector.timeout_seconds);
            c.detector_workers = s.value("workers", c.detector_workers);
        }
        if (j.contains("effort")) {
            const json& s = j["effort"];
            if (s.contains("mode"))
                c.mode = effort::effort_mode_from_string(s["mode"].get<std::string>());
            c.diff.max_file_bytes = s.value("max_file_bytes", c.diff.max_file_bytes);
            c.diff.include_paths = s.value("include_paths", c.diff.include_paths);
        }
        if (j.contains("mining")) {
            const json& s = j["mining"];
            c.mining.min_support = s.value("min_support", c.mining.min_support);
            c.mining.min_confidence =
                s.value("min_confidence", c.mining.min_confidence);
            c.mining.direction_ratio =
                s.value("direction_ratio", c.mining.direction_ratio);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    if (c.corpus_filter.min_stars < 0 || c.corpus_filter.min_contributors < 0 ||
        c.corpus_filter.min_commits < 0 || c.corpus_filter.max_push_age_days < 0)
        throw ConfigError("corpus thresholds must be non-negative");
    if (c.detector.timeout_seconds <= 0)
        throw ConfigError("detector timeout must be positive");
    if (c.detector_workers < 1) throw ConfigError("detector workers must be >= 1");
    if (!(c.mining.min_support > 0.0) || c.mining.min_support > 1.0)
        throw ConfigError("mining.min_support must be in (0, 1]");
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_canonical_json(const Config& c) {
    json deny = json::array();
    for (const auto& d : c.corpus_filter.deny_list) deny.push_back(d);
    json j = {
        {"corpus",
         {{"min_stars", c.corpus_filter.min_stars},
          {"min_contributors", c.corpus_filter.min_contributors},
          {"min_commits", c.corpus_filter.min_commits},
          {"language", c.corpus_filter.language},
          {"max_push_age_days", c.corpus_filter.max_push_age_days},
          {"deny_list", deny},
          {"snapshot_time",
           c.snapshot_time ? json(format_iso8601_utc(*c.snapshot_time))
                           : json(nullptr)}}},
        {"detector",
         {{"cmd", c.detector.cmd_template},
          {"timeout_secs", c.detector.timeout_seconds},
          {"workers", c.detector_workers}}},
        {"effort",
         {{"mode", effort::to_string(c.mode)},
          {"max_file_bytes", c.diff.max_file_bytes},
          {"include_paths", c.diff.include_paths}}},
        {"mining",
         {{"min_support", c.mining.min_support},
          {"min_confidence", c.mining.min_confidence},
          {"direction_ratio", c.mining.direction_ratio}}},
        {"tool_version", kToolVersion},
    };
    return j.dump();
}

std::string config_hash(const Config& config) {
    return sha256_hex(config_to_canonical_json(config));
}

namespace {

// Runs the detector for every commit, bounded by the worker count.
// Output order matches the input commit order regardless of scheduling.
void detect_all(const refactoring::DetectorConfig& detector, int workers,
                const std::string& repo_path,
                const std::vector<std::string>& commits,
                std::vector<refactoring::RefactoringRecord>& records,
                std::vector<refactoring::DetectorRunLog>& logs) {
    std::vector<std::pair<refactoring::ParseResult, refactoring::DetectorRunLog>>
        results(commits.size());
    std::mutex next_mutex;
    std::size_t next = 0;
    std::exception_ptr failure;

    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (failure || next >= commits.size()) return;
                i = next++;
            }
            try {
                results[i] =
                    refactoring::run_external_detector(detector, repo_path,
                                                       commits[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(next_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    int n = std::max(1, std::min<int>(workers, static_cast<int>(commits.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    for (auto& [parsed, log] : results) {
        for (auto& r : parsed.records) records.push_back(std::move(r));
        logs.push_back(std::move(log));
    }
}

struct RecordsOutcome {
    std::vector<refactoring::RefactoringRecord> records;
    std::vector<refactoring::DetectorRunLog> logs;
    std::int64_t rejected_lines = 0;
};

// Records either parsed from a file or detected over the union of branch
// commits of the valid merges.
RecordsOutcome gather_records(
    const git::GitRepo& repo, const RecordsSource& source, const Config& config,
    const std::vector<git::BranchAttribution>& attributions) {
    RecordsOutcome out;
    if (source.kind == RecordsSourceKind::File) {
        refactoring::ParseResult parsed =
            refactoring::parse_refactoring_records(read_file(source.path));
        out.records = std::move(parsed.records);
        out.rejected_lines = static_cast<std::int64_t>(parsed.rejected.size());
    } else if (source.kind == RecordsSourceKind::Detector) {
        std::set<std::string> commit_set;
        for (const auto& attr : attributions) {
            commit_set.insert(attr.b1_commits.begin(), attr.b1_commits.end());
            commit_set.insert(attr.b2_commits.begin(), attr.b2_commits.end());
        }
        std::vector<std::string> commits(commit_set.begin(), commit_set.end());
        detect_all(config.detector, config.detector_workers, repo.path(),
                   commits, out.records, out.logs);
    }
    return out;
}

std::string records_outcome_to_json(const RecordsOutcome& out) {
    json records = json::array();
    for (const auto& r : out.records)
        records.push_back(json::parse(refactoring::record_to_json_line(r)));
    json logs = json::array();
    for (const auto& l : out.logs)
        logs.push_back({{"commit", l.commit},
                        {"status", refactoring::to_string(l.status)},
                        {"elapsed_ms", l.elapsed_ms}});
    json j = {{"records", records},
              {"logs", logs},
              {"rejected_lines", out.rejected_lines}};
    return j.dump() + "\n";
}

RecordsOutcome records_outcome_from_json(const std::string& text) {
    json j = json::parse(text);
    RecordsOutcome out;
    for (const auto& r : j.at("records"))
        out.records.push_back({r.at("commit").get<std::string>(),
                               r.at("type").get<std::string>(),
                               r.value("description", "")});
    for (const auto& l : j.at("logs")) {
        refactoring::DetectorRunLog log;
        log.commit = l.at("commit").get<std::string>();
        std::string st = l.at("status").get<std::string>();
        log.status = st == "Ok" ? refactoring::DetectorStatus::Ok
                     : st == "Timeout"
                         ? refactoring::DetectorStatus::Timeout
                         : refactoring::DetectorStatus::DetectorError;
        log.elapsed_ms = l.at("elapsed_ms").get<std::int64_t>();
        out.logs.push_back(std::move(log));
    }
    out.rejected_lines = j.value("rejected_lines", 0);
    return out;
}

std::map<std::string, std::int64_t> compute_efforts(
    const git::GitRepo& repo, const std::vector<git::MergeScenario>& scenarios,
    const Config& config) {
    std::map<std::string, std::int64_t> by_sha;
    for (const auto& s : scenarios) {
        if (s.validity != git::Validity::Valid) continue;
        by_sha[s.merge.sha] =
            effort::merge_effort(repo, s, config.mode, config.diff).effort;
    }
    return by_sha;
}

std::string efforts_to_ndjson(const std::map<std::string, std::int64_t>& efforts) {
    std::string out;
    for (const auto& [sha, eff] : efforts) {
        json j = {{"merge_sha", sha}, {"effort", eff}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::map<std::string, std::int64_t> efforts_from_ndjson(const std::string& text) {
    std::map<std::string, std::int64_t> out;
    for (std::string_view line : split_lines(text)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        out[j.at("merge_sha").get<std::string>()] =
            j.at("effort").get<std::int64_t>();
    }
    return out;
}

// Content-addressed stage cache: reuse a stage's output when an identical
// configuration over identical inputs already produced it.
std::string cached_stage(const fs::path& cache_dir, const std::string& stage,
                         const std::string& key,
                         const std::function<std::string()>& compute) {
    fs::path path = cache_dir / (stage + "-" + key.substr(0, 24) + ".json");
    if (fs::exists(path)) return read_file(path.string());
    std::string content = compute();
    fs::create_directories(cache_dir);
    write_file(path.string(), content);
    return content;
}

const std::set<std::string> kRowAttributes = {"b1", "b2", "refactorings",
                                              "effort"};

std::map<rules::Scheme, std::vector<rules::AssociationRule>> mine_all_schemes(
    const std::vector<rules::MergeFeatureRow>& rows, const MiningConfig& mining) {
    std::map<rules::Scheme, std::vector<rules::AssociationRule>> by_scheme;
    for (rules::Scheme scheme :
         {rules::Scheme::Binary, rules::Scheme::Mixed, rules::Scheme::Magnitude}) {
        by_scheme[scheme] =
            rules::mine_rules(rules::discretize_rows(rows, scheme),
                              mining.min_support, mining.min_confidence);
    }
    return by_scheme;
}

struct ScenarioStage {
    std::string head_sha;
    std::vector<git::CommitRef> commits;
    std::vector<git::MergeScenario> scenarios;
    std::vector<git::BranchAttribution> attributions;  // valid merges only
    RunTallies tallies;
};

ScenarioStage enumerate_stage(const git::GitRepo& repo) {
    ScenarioStage stage;
    stage.head_sha = repo.head_sha();
    git::CommitGraph graph = git::CommitGraph::load(repo);
    stage.commits = graph.commits();
    stage.scenarios = git::enumerate_merges(graph);
    for (const auto& s : stage.scenarios) {
        ++stage.tallies.merges_total;
        switch (s.validity) {
            case git::Validity::Valid: ++stage.tallies.valid; break;
            case git::Validity::NoFastForward:
                ++stage.tallies.no_fast_forward;
                break;
            case git::Validity::Octopus: ++stage.tallies.octopus; break;
            case git::Validity::NoCommonAncestor:
                ++stage.tallies.no_common_ancestor;
                break;
        }
        if (s.validity == git::Validity::Valid)
            stage.attributions.push_back(git::attribute_branch_commits(graph, s));
    }
    return stage;
}

void fold_record_tallies(const RecordsOutcome& records, RunTallies& tallies) {
    tallies.rejected_record_lines = records.rejected_lines;
    for (const auto& log : records.logs) {
        if (log.status == refactoring::DetectorStatus::Timeout)
            ++tallies.detector_timeouts;
        else if (log.status == refactoring::DetectorStatus::DetectorError)
            ++tallies.detector_errors;
    }
}

std::vector<rules::MergeFeatureRow> assemble_rows(
    const ScenarioStage& stage, const RecordsOutcome& records,
    const std::map<std::string, std::int64_t>& efforts) {
    std::vector<rules::MergeFeatureRow> rows;
    std::size_t attr_idx = 0;
    for (const auto& s : stage.scenarios) {
        if (s.validity != git::Validity::Valid) continue;
        const git::BranchAttribution& attr = stage.attributions[attr_idx++];
        refactoring::BranchCounts counts =
            refactoring::count_branch_refactorings(attr, records.records);
        rules::MergeFeatureRow row;
        row.project = s.merge.project;
        row.merge_sha = s.merge.sha;
        row.b1 = counts.b1;
        row.b2 = counts.b2;
        row.refactorings = counts.total;
        row.effort = efforts.at(s.merge.sha);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

FeatureRowsResult build_feature_rows(const git::GitRepo& repo,
                                     const RecordsSource& source,
                                     const Config& config) {
    ScenarioStage stage = enumerate_stage(repo);
    RecordsOutcome records =
        gather_records(repo, source, config, stage.attributions);
    std::map<std::string, std::int64_t> efforts =
        compute_efforts(repo, stage.scenarios, config);

    FeatureRowsResult out;
    out.rows = assemble_rows(stage, records, efforts);
    out.tallies = stage.tallies;
    fold_record_tallies(records, out.tallies);
    out.tallies.feature_rows = static_cast<std::int64_t>(out.rows.size());
    out.scenarios = std::move(stage.scenarios);
    out.attributions = std::move(stage.attributions);
    out.records = std::move(records.records);
    out.detector_logs = std::move(records.logs);
    out.commits = std::move(stage.commits);
    out.head_sha = stage.head_sha;
    return out;
}

const char* to_string(FigureGroupId id) {
    switch (id) {
        case FigureGroupId::RQ1Binary: return "RQ1-binary";
        case FigureGroupId::RQ1Parallel: return "RQ1-parallel";
        case FigureGroupId::RQ2Magnitude: return "RQ2-magnitude";
        case FigureGroupId::RQ2Parallel: return "RQ2-parallel";
        case FigureGroupId::RQ3Magnitude: return "RQ3-magnitude";
        case FigureGroupId::RQ3Parallel: return "RQ3-parallel";
    }
    return "?";
}

std::vector<FigureGroupSpec> standard_figure_groups() {
    using rules::Condition;
    const std::vector<std::string> binary_labels = {"false", "true"};
    const std::vector<std::string> magnitude_labels = {
        rules::kLabelZero, rules::kLabelUnits, rules::kLabelDozens,
        rules::kLabelHundreds};
    const std::vector<std::string> parallel_labels = {
        rules::kLabelUnits, rules::kLabelDozens, rules::kLabelHundreds};

    std::vector<FigureGroupSpec> specs;

    FigureGroupSpec rq1{FigureGroupId::RQ1Binary, rules::Scheme::Binary, {}};
    for (const auto& r : binary_labels)
        for (const auto& e : binary_labels)
            rq1.cells.push_back({{Condition{"refactorings", r}},
                                 {Condition{"effort", e}}});
    specs.push_back(std::move(rq1));

    FigureGroupSpec rq1p{FigureGroupId::RQ1Parallel, rules::Scheme::Binary, {}};
    for (const auto& e : binary_labels)
        rq1p.cells.push_back(
            {{Condition{"b1", "true"}, Condition{"b2", "true"}},
             {Condition{"effort", e}}});
    specs.push_back(std::move(rq1p));

    FigureGroupSpec rq2{FigureGroupId::RQ2Magnitude, rules::Scheme::Mixed, {}};
    for (const auto& r : magnitude_labels)
        for (const auto& e : binary_labels)
            rq2.cells.push_back({{Condition{"refactorings", r}},
                                 {Condition{"effort", e}}});
    specs.push_back(std::move(rq2));

    FigureGroupSpec rq2p{FigureGroupId::RQ2Parallel, rules::Scheme::Mixed, {}};
    for (const auto& l : parallel_labels)
        for (const auto& e : binary_labels)
            rq2p.cells.push_back({{Condition{"b1", l}, Condition{"b2", l}},
                                  {Condition{"effort", e}}});
    specs.push_back(std::move(rq2p));

    FigureGroupSpec rq3{FigureGroupId::RQ3Magnitude, rules::Scheme::Magnitude, {}};
    for (const auto& r : magnitude_labels)
        for (const auto& e : magnitude_labels)
            rq3.cells.push_back({{Condition{"refactorings", r}},
                                 {Condition{"effort", e}}});
    specs.push_back(std::move(rq3));

    FigureGroupSpec rq3p{FigureGroupId::RQ3Parallel, rules::Scheme::Magnitude, {}};
    for (const auto& l : parallel_labels)
        for (const auto& e : magnitude_labels)
            rq3p.cells.push_back({{Condition{"b1", l}, Condition{"b2", l}},
                                  {Condition{"effort", e}}});
    specs.push_back(std::move(rq3p));

    return specs;
}

std::vector<FigureReportRow> emit_figure_groups(
    const std::map<rules::Scheme, std::vector<rules::AssociationRule>>&
        rules_by_scheme,
    const std::vector<FigureGroupSpec>& specs,
    const std::set<std::string>& dataset_attributes) {
    std::vector<FigureReportRow> report;
    for (const auto& spec : specs) {
        auto scheme_it = rules_by_scheme.find(spec.scheme);
        if (scheme_it == rules_by_scheme.end())
            throw ConfigError(std::string("no rules mined under scheme ") +
                              rules::to_string(spec.scheme) + " for group " +
                              to_string(spec.id));
        const auto& mined = scheme_it->second;

        for (const auto& cell : spec.cells) {
            for (const auto& conds : {cell.antecedent, cell.consequent})
                for (const auto& c : conds)
                    if (!dataset_attributes.count(c.attribute))
                        throw ConfigError("figure group " +
                                          std::string(to_string(spec.id)) +
                                          " references unknown attribute: " +
                                          c.attribute);
            FigureReportRow row;
            row.group = spec.id;
            row.cell = cell;
            auto match = std::find_if(
                mined.begin(), mined.end(), [&](const rules::AssociationRule& r) {
                    return r.antecedent == cell.antecedent &&
                           r.consequent == cell.consequent;
                });
            if (match == mined.end()) {
                row.below_support = true;
            } else {
                row.rule = *match;
            }
            report.push_back(std::move(row));
        }
    }
    return report;
}

void write_figure_report(std::ostream& out,
                         const std::vector<FigureReportRow>& rows) {
    out << "group,antecedent,consequent,status,support,confidence,lift\n";
    char buf[64];
    for (const auto& r : rows) {
        out << to_string(r.group) << ','
            << rules::conditions_to_string(r.cell.antecedent) << ','
            << rules::conditions_to_string(r.cell.consequent) << ',';
        if (r.below_support) {
            out << "below-support,,,\n";
            continue;
        }
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", r.rule.support(),
                      r.rule.confidence(), r.rule.lift());
        out << "ok," << buf << '\n';
    }
}

std::string manifest_json(const Config& config, const std::string& repo_path,
                          const std::string& project,
                          const std::string& head_sha,
                          const RecordsSource& source, const RunTallies& tallies,
                          const std::map<rules::Scheme, std::size_t>& rule_counts) {
    json rules_counts = json::object();
    for (const auto& [scheme, count] : rule_counts)
        rules_counts[rules::to_string(scheme)] = count;
    const char* source_kind =
        source.kind == RecordsSourceKind::None
            ? "none"
            : (source.kind == RecordsSourceKind::File ? "file" : "detector");
    json j = {
        {"tool_version", kToolVersion},
        {"config_hash", config_hash(config)},
        {"repositories",
         json::array({{{"project", project},
                       {"path", repo_path},
                       {"head", head_sha}}})},
        {"records_source", source_kind},
        {"detector",
         {{"cmd", config.detector.cmd_template},
          {"timeout_secs", config.detector.timeout_seconds},
          {"workers", config.detector_workers}}},
        {"effort",
         {{"mode", effort::to_string(config.mode)},
          {"max_file_bytes", config.diff.max_file_bytes},
          {"include_paths", config.diff.include_paths}}},
        {"thresholds",
         {{"min_support", config.mining.min_support},
          {"min_confidence", config.mining.min_confidence},
          {"direction_ratio", config.mining.direction_ratio}}},
        {"tallies",
         {{"merges_total", tallies.merges_total},
          {"valid", tallies.valid},
          {"no_fast_forward", tallies.no_fast_forward},
          {"octopus", tallies.octopus},
          {"no_common_ancestor", tallies.no_common_ancestor},
          {"feature_rows", tallies.feature_rows},
          {"detector_timeouts", tallies.detector_timeouts},
          {"detector_errors", tallies.detector_errors},
          {"rejected_record_lines", tallies.rejected_record_lines}}},
        {"rules", rules_counts},
    };
    return j.dump(2) + "\n";
}

MineOutcome run_mine(const git::GitRepo& repo, const RecordsSource& source,
                     const Config& config, const std::string& store_path,
                     const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path cache_dir = fs::path(out_dir) / "cache";

    ScenarioStage stage = enumerate_stage(repo);
    const std::string base_key = config_hash(config) + stage.head_sha;

    // Detection and effort are the expensive stages; both are cached.
    RecordsOutcome records;
    if (source.kind == RecordsSourceKind::Detector) {
        std::string cached = cached_stage(
            cache_dir, "detect", sha256_hex(base_key + "detect"), [&]() {
                return records_outcome_to_json(
                    gather_records(repo, source, config, stage.attributions));
            });
        records = records_outcome_from_json(cached);
    } else {
        records = gather_records(repo, source, config, stage.attributions);
    }

    std::string efforts_text = cached_stage(
        cache_dir, "effort", sha256_hex(base_key + "effort"), [&]() {
            return efforts_to_ndjson(compute_efforts(repo, stage.scenarios,
                                                     config));
        });
    std::map<std::string, std::int64_t> efforts = efforts_from_ndjson(efforts_text);

    RunTallies tallies = stage.tallies;
    fold_record_tallies(records, tallies);
    std::vector<rules::MergeFeatureRow> rows = assemble_rows(stage, records,
                                                             efforts);
    tallies.feature_rows = static_cast<std::int64_t>(rows.size());

    {
        std::string rows_ndjson;
        for (const auto& r : rows) {
            rows_ndjson += rules::row_to_json_line(r);
            rows_ndjson += '\n';
        }
        write_file((fs::path(out_dir) / "feature_rows.ndjson").string(),
                   rows_ndjson);
    }
    {
        std::string log_ndjson;
        for (const auto& log : records.logs) {
            json j = {{"commit", log.commit},
                      {"status", refactoring::to_string(log.status)},
                      {"elapsed_ms", log.elapsed_ms}};
            log_ndjson += j.dump();
            log_ndjson += '\n';
        }
        write_file((fs::path(out_dir) / "detector_log.ndjson").string(),
                   log_ndjson);
    }

    // Persist the conceptual model.
    store::Store db(store_path);
    std::vector<std::pair<git::MergeScenario, std::optional<std::int64_t>>>
        merges;
    for (const auto& s : stage.scenarios) {
        std::optional<std::int64_t> eff;
        if (s.validity == git::Validity::Valid) eff = efforts.at(s.merge.sha);
        merges.push_back({s, eff});
    }
    store::persist(db, stage.commits, merges, records.records,
                   stage.attributions);

    MineOutcome outcome;
    outcome.tallies = tallies;

    if (rows.empty()) {
        std::cerr << "notice: no valid merges; rule mining skipped\n";
        for (rules::Scheme scheme : {rules::Scheme::Binary, rules::Scheme::Mixed,
                                     rules::Scheme::Magnitude}) {
            std::ofstream out(fs::path(out_dir) /
                              ("rules_" + std::string(rules::to_string(scheme)) +
                               ".csv"));
            rules::write_rule_table(out, {});
            outcome.rule_counts[scheme] = 0;
        }
        std::ofstream fig(fs::path(out_dir) / "figure_groups.csv");
        write_figure_report(fig, {});
    } else {
        auto by_scheme = mine_all_schemes(rows, config.mining);
        for (const auto& [scheme, mined] : by_scheme) {
            std::ofstream out(fs::path(out_dir) /
                              ("rules_" + std::string(rules::to_string(scheme)) +
                               ".csv"));
            rules::write_rule_table(out, mined);
            outcome.rule_counts[scheme] = mined.size();
        }
        auto report =
            emit_figure_groups(by_scheme, standard_figure_groups(), kRowAttributes);
        std::ofstream fig(fs::path(out_dir) / "figure_groups.csv");
        write_figure_report(fig, report);
    }

    write_file((fs::path(out_dir) / "manifest.json").string(),
               manifest_json(config, repo.path(), repo.project(), stage.head_sha,
                             source, outcome.tallies, outcome.rule_counts));
    return outcome;
}

void run_report(const std::string& store_path, const std::string& figures,
                const Config& config, const std::string& out_dir) {
    if (!fs::exists(store_path))
        throw InputError("store not found: " + store_path);
    fs::create_directories(out_dir);

    store::Store db(store_path);
    std::vector<rules::MergeFeatureRow> rows = db.feature_rows();
    if (rows.empty()) {
        std::cerr << "notice: store holds no valid merges; nothing to report\n";
        std::ofstream fig(fs::path(out_dir) / "figure_groups.csv");
        write_figure_report(fig, {});
        return;
    }

    std::vector<FigureGroupSpec> specs;
    for (const auto& spec : standard_figure_groups()) {
        std::string name = to_string(spec.id);
        if (figures == "all" || name.rfind(figures + "-", 0) == 0)
            specs.push_back(spec);
    }
    if (specs.empty())
        throw ConfigError("unknown figure selection: " + figures);

    auto by_scheme = mine_all_schemes(rows, config.mining);
    for (const auto& [scheme, mined] : by_scheme) {
        std::ofstream out(fs::path(out_dir) /
                          ("rules_" + std::string(rules::to_string(scheme)) +
                           ".csv"));
        rules::write_rule_table(out, mined);
    }
    auto report = emit_figure_groups(by_scheme, specs, kRowAttributes);
    std::ofstream fig(fs::path(out_dir) / "figure_groups.csv");
    write_figure_report(fig, report);
}

}  // namespace mergemine::pipeline
