#pragma once

// Independent reference implementations used as test oracles. These are
// deliberately written as direct, unoptimized restatements of the
// definitions so they share no code with the library.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mergemine/effort.hpp"
#include "mergemine/rules.hpp"

namespace testsupport::oracle {

// Exclusive-method quantile via nth_element rather than a full sort.
inline double quantile_exclusive_ref(std::vector<std::int64_t> values, double p) {
    const std::size_t n = values.size();
    double pos = p * (static_cast<double>(n) + 1.0);
    if (pos < 1.0) pos = 1.0;
    if (pos > static_cast<double>(n)) pos = static_cast<double>(n);
    std::size_t k = static_cast<std::size_t>(pos);  // 1-based rank
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    double lower = static_cast<double>(values[k - 1]);
    double frac = pos - static_cast<double>(k);
    if (frac == 0.0 || k == n) return lower;
    std::nth_element(values.begin(), values.begin() + k, values.end());
    double upper = static_cast<double>(values[k]);
    return lower + frac * (upper - lower);
}

// Longest common subsequence length by dynamic programming.
inline std::size_t lcs_length(const std::vector<std::string_view>& a,
                              const std::vector<std::string_view>& b) {
    std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                             std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1]
                           ? dp[i - 1][j - 1] + 1
                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    return dp[a.size()][b.size()];
}

// Bag semantics on plain lists: remove one matching element per count.
inline std::vector<mergemine::effort::Action> multiset_to_list(
    const mergemine::effort::ActionMultiset& m) {
    std::vector<mergemine::effort::Action> out;
    for (const auto& [action, count] : m.entries())
        for (std::int64_t i = 0; i < count; ++i) out.push_back(action);
    return out;
}

inline std::vector<mergemine::effort::Action> list_minus(
    std::vector<mergemine::effort::Action> a,
    const std::vector<mergemine::effort::Action>& b) {
    for (const auto& item : b) {
        auto it = std::find(a.begin(), a.end(), item);
        if (it != a.end()) a.erase(it);
    }
    return a;
}

// Brute-force multidimensional rule enumeration: every pair of disjoint
// nonempty condition sets over distinct attributes, metrics from raw counts.
struct BruteRule {
    std::vector<mergemine::rules::Condition> antecedent;
    std::vector<mergemine::rules::Condition> consequent;
    std::int64_t t = 0, t_x = 0, t_y = 0, t_xy = 0;
};

inline std::int64_t count_satisfying(
    const std::vector<mergemine::rules::DiscreteRow>& rows,
    const std::vector<mergemine::rules::Condition>& conds) {
    std::int64_t n = 0;
    for (const auto& row : rows) {
        bool ok = true;
        for (const auto& c : conds) {
            auto it = row.find(c.attribute);
            if (it == row.end() || it->second != c.value) {
                ok = false;
                break;
            }
        }
        if (ok) ++n;
    }
    return n;
}

inline std::vector<BruteRule> brute_force_rules(
    const std::vector<mergemine::rules::DiscreteRow>& rows, double min_support,
    double min_confidence) {
    using mergemine::rules::Condition;
    const auto t = static_cast<std::int64_t>(rows.size());

    // All observed conditions, grouped by attribute.
    std::map<std::string, std::set<std::string>> by_attr;
    for (const auto& row : rows)
        for (const auto& [attr, value] : row) by_attr[attr].insert(value);
    std::vector<std::string> attrs;
    for (const auto& [attr, values] : by_attr) attrs.push_back(attr);

    // Enumerate every assignment of each attribute to: unused, antecedent
    // with some value, or consequent with some value.
    std::vector<BruteRule> out;
    std::vector<Condition> antecedent, consequent;
    std::function<void(std::size_t)> recurse = [&](std::size_t i) {
        if (i == attrs.size()) {
            if (antecedent.empty() || consequent.empty()) return;
            BruteRule rule;
            rule.antecedent = antecedent;
            rule.consequent = consequent;
            std::vector<Condition> both = antecedent;
            both.insert(both.end(), consequent.begin(), consequent.end());
            rule.t = t;
            rule.t_x = count_satisfying(rows, antecedent);
            rule.t_y = count_satisfying(rows, consequent);
            rule.t_xy = count_satisfying(rows, both);
            double support = static_cast<double>(rule.t_xy) / t;
            if (support < min_support) return;
            if (rule.t_x == 0) return;
            double confidence = static_cast<double>(rule.t_xy) / rule.t_x;
            if (confidence < min_confidence) return;
            out.push_back(std::move(rule));
            return;
        }
        recurse(i + 1);
        for (const auto& value : by_attr[attrs[i]]) {
            antecedent.push_back({attrs[i], value});
            recurse(i + 1);
            antecedent.pop_back();
            consequent.push_back({attrs[i], value});
            recurse(i + 1);
            consequent.pop_back();
        }
    };
    recurse(0);
    return out;
}

}  // namespace testsupport::oracle
