#include "mergemine/rules.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "mergemine/errors.hpp"

namespace mergemine::rules {

using nlohmann::json;

const char* kLabelZero = "0";
const char* kLabelUnits = "u";
const char* kLabelDozens = "d";
const char* kLabelHundreds = ">=100";

std::string row_to_json_line(const MergeFeatureRow& row) {
    json j = {
        {"project", row.project}, {"merge_sha", row.merge_sha},
        {"b1", row.b1},           {"b2", row.b2},
        {"refactorings", row.refactorings}, {"effort", row.effort},
    };
    return j.dump();
}

MergeFeatureRow row_from_json_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("malformed feature row: " + line);
    MergeFeatureRow r;
    try {
        r.project = j.at("project").get<std::string>();
        r.merge_sha = j.at("merge_sha").get<std::string>();
        r.b1 = j.at("b1").get<std::int64_t>();
        r.b2 = j.at("b2").get<std::int64_t>();
        r.refactorings = j.at("refactorings").get<std::int64_t>();
        r.effort = j.at("effort").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed feature row: ") + e.what());
    }
    if (r.b1 < 0 || r.b2 < 0 || r.effort < 0)
        throw InputError("negative count in feature row: " + line);
    if (r.refactorings != r.b1 + r.b2)
        throw InputError("feature row violates refactorings = b1 + b2: " + line);
    return r;
}

std::vector<MergeFeatureRow> read_rows(std::istream& in) {
    std::vector<MergeFeatureRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(row_from_json_line(line));
    }
    return rows;
}

std::string discretize_binary(std::int64_t n) {
    return n == 0 ? "false" : "true";
}

std::string discretize_magnitude(std::int64_t n) {
    if (n == 0) return kLabelZero;
    if (n <= 9) return kLabelUnits;
    if (n <= 99) return kLabelDozens;
    return kLabelHundreds;
}

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Binary: return "binary";
        case Scheme::Mixed: return "mixed";
        case Scheme::Magnitude: return "magnitude";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "binary") return Scheme::Binary;
    if (s == "mixed") return Scheme::Mixed;
    if (s == "magnitude") return Scheme::Magnitude;
    throw ConfigError("unknown discretization scheme: " + s);
}

DiscreteRow discretize_row(const MergeFeatureRow& row, Scheme scheme) {
    auto counts = scheme == Scheme::Binary ? discretize_binary
                                           : discretize_magnitude;
    auto effort = scheme == Scheme::Magnitude ? discretize_magnitude
                                              : discretize_binary;
    return DiscreteRow{
        {"b1", counts(row.b1)},
        {"b2", counts(row.b2)},
        {"refactorings", counts(row.refactorings)},
        {"effort", effort(row.effort)},
    };
}

std::vector<DiscreteRow> discretize_rows(const std::vector<MergeFeatureRow>& rows,
                                         Scheme scheme) {
    std::vector<DiscreteRow> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(discretize_row(r, scheme));
    return out;
}

std::string conditions_to_string(const std::vector<Condition>& conditions) {
    std::string out;
    for (const auto& c : conditions) {
        if (!out.empty()) out += " & ";
        out += c.attribute + "=" + c.value;
    }
    return out;
}

namespace {

bool row_satisfies(const DiscreteRow& row, const Itemset& itemset) {
    for (const Condition& c : itemset) {
        auto it = row.find(c.attribute);
        if (it == row.end() || it->second != c.value) return false;
    }
    return true;
}

std::int64_t count_rows(const std::vector<DiscreteRow>& rows,
                        const Itemset& itemset) {
    std::int64_t n = 0;
    for (const auto& row : rows)
        if (row_satisfies(row, itemset)) ++n;
    return n;
}

// Joins two (k-1)-itemsets sharing their first k-2 conditions into a
// k-candidate; requires distinct attributes throughout.
bool try_join(const Itemset& a, const Itemset& b, Itemset& out) {
    const std::size_t k = a.size();
    for (std::size_t i = 0; i + 1 < k; ++i)
        if (a[i] != b[i]) return false;
    if (!(a.back() < b.back())) return false;
    if (a.back().attribute == b.back().attribute) return false;
    out = a;
    out.push_back(b.back());
    return true;
}

bool all_subsets_frequent(const Itemset& candidate,
                          const std::map<Itemset, ItemsetSupport>& frequent) {
    if (candidate.size() <= 1) return true;
    Itemset subset;
    subset.reserve(candidate.size() - 1);
    for (std::size_t skip = 0; skip < candidate.size(); ++skip) {
        subset.clear();
        for (std::size_t i = 0; i < candidate.size(); ++i)
            if (i != skip) subset.push_back(candidate[i]);
        if (!frequent.count(subset)) return false;
    }
    return true;
}

}  // namespace

std::map<Itemset, ItemsetSupport> apriori_frequent_itemsets(
    const std::vector<DiscreteRow>& rows, double min_support) {
    if (rows.empty())
        throw InputError("apriori: empty dataset");
    if (!(min_support > 0.0) || min_support > 1.0)
        throw InputError("apriori: min_support must be in (0, 1]");

    const auto n = static_cast<std::int64_t>(rows.size());
    auto support_of = [n](std::int64_t count) {
        return static_cast<double>(count) / static_cast<double>(n);
    };

    std::map<Itemset, ItemsetSupport> frequent;

    // Level 1: every observed condition.
    std::map<Condition, std::int64_t> singles;
    for (const auto& row : rows)
        for (const auto& [attr, value] : row) ++singles[{attr, value}];
    std::vector<Itemset> level;
    for (const auto& [cond, count] : singles) {
        if (support_of(count) >= min_support) {
            Itemset item = {cond};
            frequent[item] = {count, support_of(count)};
            level.push_back(std::move(item));
        }
    }

    // Levels k >= 2: join, prune, count.
    while (!level.empty()) {
        std::vector<Itemset> next;
        for (std::size_t i = 0; i < level.size(); ++i) {
            for (std::size_t j = i + 1; j < level.size(); ++j) {
                Itemset candidate;
                if (!try_join(level[i], level[j], candidate) &&
                    !try_join(level[j], level[i], candidate))
                    continue;
                if (!all_subsets_frequent(candidate, frequent)) continue;
                std::int64_t count = count_rows(rows, candidate);
                if (support_of(count) >= min_support) {
                    frequent[candidate] = {count, support_of(count)};
                    next.push_back(std::move(candidate));
                }
            }
        }
        level = std::move(next);
    }
    return frequent;
}

namespace {

// Exact comparisons on the integer counts; division deferred.
bool lift_greater(const AssociationRule& a, const AssociationRule& b) {
    using Wide = __int128;
    Wide lhs = Wide(a.t_xy) * a.t * Wide(b.t_x) * b.t_y;
    Wide rhs = Wide(b.t_xy) * b.t * Wide(a.t_x) * a.t_y;
    return lhs > rhs;
}

bool support_greater(const AssociationRule& a, const AssociationRule& b) {
    using Wide = __int128;
    return Wide(a.t_xy) * b.t > Wide(b.t_xy) * a.t;
}

bool rule_order(const AssociationRule& a, const AssociationRule& b) {
    if (lift_greater(a, b)) return true;
    if (lift_greater(b, a)) return false;
    if (support_greater(a, b)) return true;
    if (support_greater(b, a)) return false;
    if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
    return a.consequent < b.consequent;
}

}  // namespace

std::vector<AssociationRule> derive_rules(
    const std::map<Itemset, ItemsetSupport>& itemsets,
    const std::vector<DiscreteRow>& rows, double min_support,
    double min_confidence) {
    const auto t = static_cast<std::int64_t>(rows.size());
    std::vector<AssociationRule> out;

    for (const auto& [itemset, sup] : itemsets) {
        const std::size_t k = itemset.size();
        if (k < 2) continue;
        if (sup.support < min_support) continue;

        // Every nonempty proper subset as antecedent.
        const std::size_t limit = static_cast<std::size_t>(1) << k;
        for (std::size_t mask = 1; mask + 1 < limit; ++mask) {
            AssociationRule rule;
            for (std::size_t i = 0; i < k; ++i) {
                if (mask & (static_cast<std::size_t>(1) << i))
                    rule.antecedent.push_back(itemset[i]);
                else
                    rule.consequent.push_back(itemset[i]);
            }
            // Subsets of a frequent itemset are frequent, so both lookups hit.
            auto x_it = itemsets.find(rule.antecedent);
            auto y_it = itemsets.find(rule.consequent);
            if (x_it == itemsets.end() || y_it == itemsets.end())
                throw ContractError("derive_rules: itemset map is not closed "
                                    "under subsets");
            rule.t = t;
            rule.t_x = x_it->second.count;
            rule.t_y = y_it->second.count;
            rule.t_xy = sup.count;
            if (rule.confidence() < min_confidence) continue;
            out.push_back(std::move(rule));
        }
    }
    std::sort(out.begin(), out.end(), rule_order);
    return out;
}

std::vector<AssociationRule> mine_rules(const std::vector<DiscreteRow>& rows,
                                        double min_support,
                                        double min_confidence) {
    return derive_rules(apriori_frequent_itemsets(rows, min_support), rows,
                        min_support, min_confidence);
}

const char* to_string(Direction d) {
    switch (d) {
        case Direction::Forward: return "Forward";
        case Direction::Backward: return "Backward";
        case Direction::Undecided: return "Undecided";
    }
    return "?";
}

Direction rule_direction(const AssociationRule& forward,
                         const AssociationRule& backward,
                         double ratio_threshold) {
    if (forward.antecedent != backward.consequent ||
        forward.consequent != backward.antecedent)
        throw ContractError("rule_direction: rules are not a swapped pair");
    if (forward.t != backward.t || forward.t_xy != backward.t_xy)
        throw ContractError("rule_direction: rules mined from different data");

    double lf = forward.lift(), lb = backward.lift();
    double rel = std::abs(lf - lb) / std::max(std::abs(lf), std::abs(lb));
    if (rel > 1e-12)
        throw ContractError("rule_direction: lifts of a swapped pair differ");

    double cf = forward.confidence(), cb = backward.confidence();
    bool fwd = cf >= ratio_threshold * cb;
    bool bwd = cb >= ratio_threshold * cf;
    if (fwd && !bwd) return Direction::Forward;
    if (bwd && !fwd) return Direction::Backward;
    return Direction::Undecided;
}

void write_rule_table(std::ostream& out,
                      const std::vector<AssociationRule>& rules) {
    out << "antecedent,consequent,t,t_x,t_y,t_xy,support,confidence,lift\n";
    char buf[64];
    for (const auto& r : rules) {
        out << conditions_to_string(r.antecedent) << ','
            << conditions_to_string(r.consequent) << ',' << r.t << ',' << r.t_x
            << ',' << r.t_y << ',' << r.t_xy << ',';
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", r.support(),
                      r.confidence(), r.lift());
        out << buf << '\n';
    }
}

}  // namespace mergemine::rules
