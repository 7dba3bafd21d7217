#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aclp/dataset.hpp"
#include "aclp/error.hpp"

namespace aclp {

// Shared scoring state for one data set. Scores are cached by
// (variable, parent bitmask); the data set must outlive the context.
struct ScoringContext {
    const DataSet* data;
    std::size_t m;
    std::vector<int> cards;
    std::map<std::pair<int, std::uint64_t>, double> bic_cache;

    explicit ScoringContext(const DataSet& d) : data(&d), m(d.m()), cards(d.cards) {
        if (d.names.size() > 64)
            throw CapabilityError("scoring supports at most 64 variables");
        if (m == 0) throw DataError("scoring needs at least one row");
    }

    int id(const std::string& name) const { return data->column(name); }
};

namespace detail {

inline std::uint64_t var_mask(const std::vector<int>& vars) {
    std::uint64_t mask = 0;
    for (int v : vars) mask |= std::uint64_t{1} << v;
    return mask;
}

}  // namespace detail

// Decomposable BIC local term, log base 2. Zero-count cells contribute zero;
// the penalty is q_i(r_i - 1)/2 * log2(m) with q_i the product of parent
// cardinalities.
inline double local_bic(ScoringContext& ctx, int x, const std::vector<int>& parents) {
    std::uint64_t mask = detail::var_mask(parents);
    if (mask & (std::uint64_t{1} << x)) throw DataError("variable cannot be its own parent");
    auto key = std::make_pair(x, mask);
    auto it = ctx.bic_cache.find(key);
    if (it != ctx.bic_cache.end()) return it->second;

    std::vector<int> ps;
    for (int v = 0; v < static_cast<int>(ctx.cards.size()); ++v)
        if (mask & (std::uint64_t{1} << v)) ps.push_back(v);
    std::size_t r = static_cast<std::size_t>(ctx.cards[x]);
    std::size_t q = 1;
    for (int p : ps) q *= static_cast<std::size_t>(ctx.cards[p]);

    std::vector<long long> counts(q * r, 0);
    for (const auto& row : ctx.data->rows) {
        std::size_t j = 0;
        for (int p : ps) j = j * static_cast<std::size_t>(ctx.cards[p]) +
                             static_cast<std::size_t>(row[p]);
        ++counts[j * r + static_cast<std::size_t>(row[x])];
    }
    double score = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
        long long row_total = 0;
        for (std::size_t k = 0; k < r; ++k) row_total += counts[j * r + k];
        if (row_total == 0) continue;
        for (std::size_t k = 0; k < r; ++k) {
            long long c = counts[j * r + k];
            if (c == 0) continue;
            score += static_cast<double>(c) *
                     std::log2(static_cast<double>(c) / static_cast<double>(row_total));
        }
    }
    score -= 0.5 * static_cast<double>(q) * static_cast<double>(r - 1) *
             std::log2(static_cast<double>(ctx.m));
    ctx.bic_cache.emplace(key, score);
    return score;
}

inline double local_bic(ScoringContext& ctx, const std::string& x,
                        const std::set<std::string>& parents) {
    std::vector<int> ps;
    for (const auto& p : parents) ps.push_back(ctx.id(p));
    return local_bic(ctx, ctx.id(x), ps);
}

}  // namespace aclp
