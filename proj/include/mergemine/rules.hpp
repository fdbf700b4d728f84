#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mergemine::rules {

struct MergeFeatureRow {
    std::string project;
    std::string merge_sha;
    std::int64_t b1 = 0;
    std::int64_t b2 = 0;
    std::int64_t refactorings = 0;  // always b1 + b2
    std::int64_t effort = 0;

    bool operator==(const MergeFeatureRow&) const = default;
};

std::string row_to_json_line(const MergeFeatureRow& row);
MergeFeatureRow row_from_json_line(const std::string& line);
std::vector<MergeFeatureRow> read_rows(std::istream& in);

// "false" iff n == 0.
std::string discretize_binary(std::int64_t n);

// 0 -> "0", 1..9 -> "u", 10..99 -> "d", >= 100 -> ">=100".
// The four labels partition the non-negative integers.
std::string discretize_magnitude(std::int64_t n);

extern const char* kLabelZero;
extern const char* kLabelUnits;
extern const char* kLabelDozens;
extern const char* kLabelHundreds;

// Which discretizer each attribute gets. The three presets match the three
// standard analyses: occurrence only, count ranges with binary effort, and
// count ranges throughout.
enum class Scheme {
    Binary,     // every attribute true/false
    Mixed,      // refactoring counts in magnitude ranges, effort true/false
    Magnitude,  // every attribute in magnitude ranges
};

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// A discretized row: attribute name -> bin label, every attribute present
// exactly once.
using DiscreteRow = std::map<std::string, std::string>;

DiscreteRow discretize_row(const MergeFeatureRow& row, Scheme scheme);
std::vector<DiscreteRow> discretize_rows(const std::vector<MergeFeatureRow>& rows,
                                         Scheme scheme);

struct Condition {
    std::string attribute;
    std::string value;

    auto operator<=>(const Condition&) const = default;
};

std::string conditions_to_string(const std::vector<Condition>& conditions);

// An itemset is a set of conditions over distinct attributes, kept sorted by
// attribute name.
using Itemset = std::vector<Condition>;

struct ItemsetSupport {
    std::int64_t count = 0;
    double support = 0.0;
};

// Level-wise Apriori over the discretized rows. Returns exactly the itemsets
// whose support reaches min_support, pruned via anti-monotonicity.
// Throws InputError on an empty dataset or min_support outside (0, 1].
std::map<Itemset, ItemsetSupport> apriori_frequent_itemsets(
    const std::vector<DiscreteRow>& rows, double min_support);

struct AssociationRule {
    std::vector<Condition> antecedent;
    std::vector<Condition> consequent;
    // Exact integer counts; the metrics divide these on demand so no
    // floating-point error accumulates during mining.
    std::int64_t t = 0;     // rows in the dataset
    std::int64_t t_x = 0;   // rows satisfying the antecedent
    std::int64_t t_y = 0;   // rows satisfying the consequent
    std::int64_t t_xy = 0;  // rows satisfying both

    double support() const { return static_cast<double>(t_xy) / t; }
    double confidence() const { return static_cast<double>(t_xy) / t_x; }
    double lift() const {
        return (static_cast<double>(t_xy) * t) /
               (static_cast<double>(t_x) * t_y);
    }

    bool operator==(const AssociationRule&) const = default;
};

// Every nonempty antecedent/consequent bipartition of each frequent itemset
// clearing both thresholds. Ordering: descending lift, then descending
// support, then lexicographic conditions.
std::vector<AssociationRule> derive_rules(
    const std::map<Itemset, ItemsetSupport>& itemsets,
    const std::vector<DiscreteRow>& rows, double min_support = 0.0005,
    double min_confidence = 0.0);

// Convenience: apriori + derive_rules in one call.
std::vector<AssociationRule> mine_rules(const std::vector<DiscreteRow>& rows,
                                        double min_support = 0.0005,
                                        double min_confidence = 0.0);

enum class Direction { Forward, Backward, Undecided };
const char* to_string(Direction d);

// Confidence-based direction analysis for a rule and its reverse. Lift is
// symmetric, so the pair's lifts are asserted equal rather than assumed.
// Throws ContractError unless backward is forward with the sides swapped.
Direction rule_direction(const AssociationRule& forward,
                         const AssociationRule& backward,
                         double ratio_threshold = 2.0);

// Rule table as character-separated values.
void write_rule_table(std::ostream& out,
                      const std::vector<AssociationRule>& rules);

}  // namespace mergemine::rules
