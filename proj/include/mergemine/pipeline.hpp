#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mergemine/corpus.hpp"
#include "mergemine/effort.hpp"
#include "mergemine/git_history.hpp"
#include "mergemine/refactoring.hpp"
#include "mergemine/rules.hpp"

namespace mergemine::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

struct MiningConfig {
    double min_support = 0.0005;
    double min_confidence = 0.0;
    double direction_ratio = 2.0;
};

struct Config {
    corpus::CorpusFilter corpus_filter;
    std::optional<std::time_t> snapshot_time;
    refactoring::DetectorConfig detector;
    int detector_workers = 1;
    effort::EffortMode mode = effort::EffortMode::MergeMinusBranches;
    effort::DiffOptions diff;
    MiningConfig mining;
};

// Reads the sectioned config file (JSON with sections corpus, detector,
// effort, mining); every field above is overridable. Throws ConfigError.
Config load_config(const std::string& path);
Config config_from_json_text(const std::string& text);
std::string config_to_canonical_json(const Config& config);
std::string config_hash(const Config& config);

struct RunTallies {
    std::int64_t merges_total = 0;
    std::int64_t valid = 0;
    std::int64_t no_fast_forward = 0;
    std::int64_t octopus = 0;
    std::int64_t no_common_ancestor = 0;
    std::int64_t feature_rows = 0;
    std::int64_t detector_timeouts = 0;
    std::int64_t detector_errors = 0;
    std::int64_t rejected_record_lines = 0;
};

enum class RecordsSourceKind { None, File, Detector };

struct RecordsSource {
    RecordsSourceKind kind = RecordsSourceKind::None;
    std::string path;  // for File
};

struct FeatureRowsResult {
    std::vector<rules::MergeFeatureRow> rows;
    std::vector<git::MergeScenario> scenarios;
    std::vector<git::BranchAttribution> attributions;  // valid merges only
    std::vector<refactoring::RefactoringRecord> records;
    std::vector<refactoring::DetectorRunLog> detector_logs;
    std::vector<git::CommitRef> commits;
    std::string head_sha;
    RunTallies tallies;
};

// One feature row per valid merge; non-valid scenarios are excluded but
// tallied. Detector timeouts skip the commit, never the run.
FeatureRowsResult build_feature_rows(const git::GitRepo& repo,
                                     const RecordsSource& source,
                                     const Config& config);

// --- Figure groups ----------------------------------------------------------

enum class FigureGroupId {
    RQ1Binary,
    RQ1Parallel,
    RQ2Magnitude,
    RQ2Parallel,
    RQ3Magnitude,
    RQ3Parallel,
};

const char* to_string(FigureGroupId id);

struct FigureCell {
    std::vector<rules::Condition> antecedent;
    std::vector<rules::Condition> consequent;
};

struct FigureGroupSpec {
    FigureGroupId id;
    rules::Scheme scheme;
    std::vector<FigureCell> cells;
};

// The six standard report groups (RQ1/RQ2/RQ3, plain and parallel-branch).
std::vector<FigureGroupSpec> standard_figure_groups();

struct FigureReportRow {
    FigureGroupId group;
    FigureCell cell;
    bool below_support = false;  // no mined rule cleared min support
    rules::AssociationRule rule;  // valid when !below_support
};

// Looks each spec cell up in the rules mined under that spec's scheme.
// Cells without a mined rule come back as explicit below-support markers.
// Throws ConfigError when a spec's scheme has no mined rule set or a spec
// references an attribute absent from the dataset.
std::vector<FigureReportRow> emit_figure_groups(
    const std::map<rules::Scheme, std::vector<rules::AssociationRule>>&
        rules_by_scheme,
    const std::vector<FigureGroupSpec>& specs,
    const std::set<std::string>& dataset_attributes);

void write_figure_report(std::ostream& out,
                         const std::vector<FigureReportRow>& rows);

// --- Full runs ---------------------------------------------------------------

struct MineOutcome {
    RunTallies tallies;
    std::map<rules::Scheme, std::size_t> rule_counts;
};

// corpus -> merges -> effort -> refactoring counts -> feature rows -> rules
// -> figure groups, persisting to store_path and writing
// feature_rows.ndjson, rules_<scheme>.csv, figure_groups.csv, detector_log.ndjson
// and manifest.json under out_dir. Expensive stages are cached under
// out_dir/cache keyed by the config hash and head sha.
MineOutcome run_mine(const git::GitRepo& repo, const RecordsSource& source,
                     const Config& config, const std::string& store_path,
                     const std::string& out_dir);

// Rebuilds rows from the store and re-emits rule tables and the selected
// figure groups ("all", "RQ1", "RQ2", "RQ3").
void run_report(const std::string& store_path, const std::string& figures,
                const Config& config, const std::string& out_dir);

std::string manifest_json(const Config& config, const std::string& repo_path,
                          const std::string& project,
                          const std::string& head_sha,
                          const RecordsSource& source, const RunTallies& tallies,
                          const std::map<rules::Scheme, std::size_t>& rule_counts);

}  // namespace mergemine::pipeline
