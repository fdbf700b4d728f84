#include <CLI11.hpp>

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mergemine/corpus.hpp"
#include "mergemine/effort.hpp"
#include "mergemine/errors.hpp"
#include "mergemine/git_history.hpp"
#include "mergemine/pipeline.hpp"
#include "mergemine/refactoring.hpp"
#include "mergemine/rules.hpp"
#include "mergemine/util.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using namespace mergemine;
using nlohmann::json;

namespace {

pipeline::Config load_config_or_default(const std::string& path) {
    if (path.empty()) return pipeline::Config{};
    return pipeline::load_config(path);
}

int cmd_corpus(const std::string& config_path, const std::string& fixtures_dir,
               const std::string& out_path) {
    pipeline::Config config = load_config_or_default(config_path);
    std::time_t snapshot =
        config.snapshot_time ? *config.snapshot_time : std::time(nullptr);

    std::vector<corpus::RepoMeta> candidates;
    fs::path fixture_file = fs::path(fixtures_dir) / "repos.ndjson";
    if (!fixtures_dir.empty() && fs::exists(fixture_file)) {
        std::ifstream in(fixture_file);
        candidates =
            corpus::replay_candidate_repos(in, config.corpus_filter, snapshot);
    } else {
        const char* token = std::getenv("GH_TOKEN");
        candidates = corpus::fetch_candidate_repos(
            config.corpus_filter, token ? token : "", snapshot);
        if (!fixtures_dir.empty()) {
            fs::create_directories(fixtures_dir);
            std::ofstream out(fixture_file);
            corpus::write_fixture(out, candidates);
        }
    }

    std::vector<corpus::RepoMeta> filtered =
        corpus::apply_metadata_filters(candidates, config.corpus_filter);

    // Valid-merge counts, when available, drive the fence cuts.
    fs::path counts_file = fs::path(fixtures_dir) / "merge_counts.json";
    std::vector<corpus::RepoMeta> selected = filtered;
    bool counts_applied = false;
    if (!fixtures_dir.empty() && fs::exists(counts_file)) {
        json counts = json::parse(read_file(counts_file.string()));
        std::vector<std::pair<corpus::RepoMeta, std::int64_t>> with_counts;
        for (const auto& repo : filtered) {
            if (!counts.contains(repo.owner_and_name))
                throw InputError("merge_counts.json lacks a count for " +
                                 repo.owner_and_name);
            with_counts.push_back(
                {repo, counts[repo.owner_and_name].get<std::int64_t>()});
        }
        selected = corpus::select_corpus(with_counts);
        counts_applied = true;
    }

    json out = {
        {"candidates", candidates.size()},
        {"after_metadata_filters", filtered.size()},
        {"merge_count_cuts_applied", counts_applied},
        {"repos", json::array()},
    };
    for (const auto& r : selected)
        out["repos"].push_back(json::parse(corpus::to_ndjson_line(r)));
    write_file(out_path, out.dump(2) + "\n");
    std::cerr << "corpus: " << candidates.size() << " candidates, "
              << filtered.size() << " after metadata filters, "
              << selected.size() << " selected\n";
    return kExitOk;
}

int cmd_effort(const std::string& repo_path, const std::string& mode_name,
               const std::string& out_path, const std::string& config_path,
               const std::string& project, bool ignore_paths) {
    pipeline::Config config = load_config_or_default(config_path);
    if (ignore_paths) config.diff.include_paths = false;
    effort::EffortMode mode = effort::effort_mode_from_string(mode_name);

    git::GitRepo repo(repo_path, project);
    std::string out;
    for (const auto& scenario : git::enumerate_merges(repo)) {
        if (scenario.validity != git::Validity::Valid) continue;
        effort::EffortResult r =
            effort::merge_effort(repo, scenario, mode, config.diff);
        out += effort::effort_to_json_line(r);
        out += '\n';
    }
    write_file(out_path, out);
    return kExitOk;
}

int cmd_refactorings(const std::string& repo_path,
                     const std::string& records_path, bool detect,
                     std::int64_t timeout_secs, const std::string& config_path,
                     const std::string& out_path) {
    pipeline::Config config = load_config_or_default(config_path);
    if (timeout_secs > 0) config.detector.timeout_seconds = timeout_secs;

    refactoring::ParseResult parsed;
    std::vector<refactoring::DetectorRunLog> logs;
    if (!records_path.empty()) {
        parsed = refactoring::parse_refactoring_records(read_file(records_path));
    } else if (detect) {
        git::GitRepo repo(repo_path);
        git::CommitGraph graph = git::CommitGraph::load(repo);
        for (std::size_t idx : graph.topo_order()) {
            const auto& commit = graph.commits()[idx];
            auto [result, log] = refactoring::run_external_detector(
                config.detector, repo.path(), commit.sha);
            for (auto& r : result.records) parsed.records.push_back(std::move(r));
            for (auto& r : result.rejected) parsed.rejected.push_back(std::move(r));
            logs.push_back(log);
        }
    } else {
        throw ConfigError("either --records FILE or --detect is required");
    }

    std::string out;
    for (const auto& r : parsed.records) {
        out += refactoring::record_to_json_line(r);
        out += '\n';
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << out;
    } else {
        write_file(out_path, out);
    }
    std::cerr << "refactorings: " << parsed.records.size() << " accepted, "
              << parsed.rejected.size() << " rejected";
    if (!logs.empty()) {
        std::size_t timeouts = 0;
        for (const auto& l : logs)
            if (l.status == refactoring::DetectorStatus::Timeout) ++timeouts;
        std::cerr << ", " << logs.size() << " detector runs (" << timeouts
                  << " timeouts)";
    }
    std::cerr << "\n";
    for (const auto& rej : parsed.rejected)
        std::cerr << "rejected line " << rej.line_number << ": " << rej.reason
                  << "\n";
    return kExitOk;
}

int cmd_rules(const std::string& rows_path, const std::string& scheme_name,
              double min_support, double min_confidence,
              const std::string& out_path) {
    std::ifstream in(rows_path);
    if (!in) throw InputError("cannot open rows file: " + rows_path);
    std::vector<rules::MergeFeatureRow> rows = rules::read_rows(in);
    rules::Scheme scheme = rules::scheme_from_string(scheme_name);

    std::vector<rules::AssociationRule> mined = rules::mine_rules(
        rules::discretize_rows(rows, scheme), min_support, min_confidence);

    std::ofstream out(out_path);
    if (!out) throw InputError("cannot write " + out_path);
    rules::write_rule_table(out, mined);
    std::cerr << "rules: " << mined.size() << " rules over " << rows.size()
              << " rows\n";
    return kExitOk;
}

int cmd_mine(const std::string& repo_path, const std::string& records_path,
             bool detect, const std::string& mode_name,
             const std::string& store_path, const std::string& out_dir,
             const std::string& config_path, const std::string& project,
             bool ignore_paths) {
    pipeline::Config config = load_config_or_default(config_path);
    if (!mode_name.empty())
        config.mode = effort::effort_mode_from_string(mode_name);
    if (ignore_paths) config.diff.include_paths = false;

    pipeline::RecordsSource source;
    if (!records_path.empty()) {
        source.kind = pipeline::RecordsSourceKind::File;
        source.path = records_path;
    } else if (detect) {
        source.kind = pipeline::RecordsSourceKind::Detector;
    }

    git::GitRepo repo(repo_path, project);
    pipeline::MineOutcome outcome =
        pipeline::run_mine(repo, source, config, store_path, out_dir);
    std::cerr << "mine: " << outcome.tallies.merges_total << " merges ("
              << outcome.tallies.valid << " valid, "
              << outcome.tallies.no_fast_forward << " no-ff, "
              << outcome.tallies.octopus << " octopus, "
              << outcome.tallies.no_common_ancestor << " no-common-ancestor), "
              << outcome.tallies.feature_rows << " feature rows\n";
    return kExitOk;
}

int cmd_report(const std::string& store_path, const std::string& figures,
               const std::string& config_path, const std::string& out_dir) {
    pipeline::Config config = load_config_or_default(config_path);
    pipeline::run_report(store_path, figures, config, out_dir);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mergemine: merge effort and refactoring rule mining"};
    app.require_subcommand(1);

    std::string config_path, fixtures_dir, out_path, repo_path, mode_name;
    std::string records_path, rows_path, scheme_name = "binary";
    std::string store_path, out_dir, figures = "all", project;
    bool detect = false, ignore_paths = false;
    std::int64_t timeout_secs = 0;
    double min_support = 0.0005, min_confidence = 0.0;

    auto* corpus_cmd = app.add_subcommand("corpus", "select the repository corpus");
    corpus_cmd->add_option("--config", config_path, "config file (JSON)");
    corpus_cmd->add_option("--fixtures", fixtures_dir,
                           "fixture directory for offline replay");
    corpus_cmd->add_option("--out", out_path, "output corpus.json")->required();

    auto* effort_cmd =
        app.add_subcommand("effort", "compute per-merge effort records");
    effort_cmd->add_option("--repo", repo_path, "git repository path")
        ->required();
    effort_cmd
        ->add_option("--mode", mode_name,
                     "merge-minus-branches | symmetric")
        ->default_val("merge-minus-branches");
    effort_cmd->add_option("--out", out_path, "output NDJSON file")->required();
    effort_cmd->add_option("--config", config_path, "config file (JSON)");
    effort_cmd->add_option("--project", project, "project label");
    effort_cmd->add_flag("--ignore-paths", ignore_paths,
                         "drop file paths from action identity");

    auto* refac_cmd = app.add_subcommand(
        "refactorings", "ingest or detect refactoring records");
    refac_cmd->add_option("--repo", repo_path, "git repository path");
    refac_cmd->add_option("--records", records_path,
                          "detector output file (NDJSON)");
    refac_cmd->add_flag("--detect", detect, "run the configured detector");
    refac_cmd->add_option("--timeout-secs", timeout_secs,
                          "detector timeout in seconds");
    refac_cmd->add_option("--config", config_path, "config file (JSON)");
    refac_cmd->add_option("--out", out_path, "accepted records output");

    auto* rules_cmd =
        app.add_subcommand("rules", "mine association rules from feature rows");
    rules_cmd->add_option("--rows", rows_path, "feature row NDJSON file")
        ->required();
    rules_cmd
        ->add_option("--scheme", scheme_name, "binary | mixed | magnitude")
        ->default_val("binary");
    rules_cmd->add_option("--min-support", min_support, "minimum support");
    rules_cmd->add_option("--min-confidence", min_confidence,
                          "minimum confidence");
    rules_cmd->add_option("--out", out_path, "rule table CSV")->required();

    auto* mine_cmd = app.add_subcommand("mine", "run the full pipeline");
    mine_cmd->add_option("--repo", repo_path, "git repository path")->required();
    mine_cmd->add_option("--records", records_path,
                         "detector output file (NDJSON)");
    mine_cmd->add_flag("--detect", detect, "run the configured detector");
    mine_cmd->add_option("--mode", mode_name,
                         "merge-minus-branches | symmetric");
    mine_cmd->add_option("--store", store_path, "sqlite store file")->required();
    mine_cmd->add_option("--out", out_dir, "output directory")->required();
    mine_cmd->add_option("--config", config_path, "config file (JSON)");
    mine_cmd->add_option("--project", project, "project label");
    mine_cmd->add_flag("--ignore-paths", ignore_paths,
                       "drop file paths from action identity");

    auto* report_cmd =
        app.add_subcommand("report", "emit figure groups from a store");
    report_cmd->add_option("--store", store_path, "sqlite store file")
        ->required();
    report_cmd->add_option("--figures", figures, "all | RQ1 | RQ2 | RQ3")
        ->default_val("all");
    report_cmd->add_option("--config", config_path, "config file (JSON)");
    report_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (corpus_cmd->parsed())
            return cmd_corpus(config_path, fixtures_dir, out_path);
        if (effort_cmd->parsed())
            return cmd_effort(repo_path, mode_name, out_path, config_path,
                              project, ignore_paths);
        if (refac_cmd->parsed())
            return cmd_refactorings(repo_path, records_path, detect,
                                    timeout_secs, config_path, out_path);
        if (rules_cmd->parsed())
            return cmd_rules(rows_path, scheme_name, min_support,
                             min_confidence, out_path);
        if (mine_cmd->parsed())
            return cmd_mine(repo_path, records_path, detect, mode_name,
                            store_path, out_dir, config_path, project,
                            ignore_paths);
        if (report_cmd->parsed())
            return cmd_report(store_path, figures, config_path, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const RepoError& e) {
        std::cerr << "repository error: " << e.what() << "\n";
        return kExitRepository;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const RateLimitError& e) {
        std::cerr << "rate limited: " << e.what() << " (resets at "
                  << format_iso8601_utc(e.reset_at) << ")\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
