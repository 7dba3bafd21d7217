#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aclp/ges.hpp"

namespace aclp {

struct LocalStructure {
    std::string target;
    std::set<std::string> h_star, ch, pa;
    std::map<std::string, std::string> s_star;  // spouse -> witness child

    bool operator==(const LocalStructure&) const = default;
};

// Memoized local-learning state over one data set. All discovery procedures
// share one context so repeated neighbor and spouse queries are answered from
// the caches; results are deterministic for a fixed data set.
struct SllContext {
    ScoringContext scoring;
    std::size_t cap;
    std::map<std::uint64_t, Cpdag> learn_cache;
    std::map<std::string, std::set<std::string>> stage1_cache;
    std::map<std::string, LocalStructure> neighbor_cache;
    std::map<std::string, std::map<std::string, std::string>> raw_spouse_cache;

    explicit SllContext(const DataSet& d, std::size_t cap_ = 12) : scoring(d), cap(cap_) {}

    std::vector<std::string> sorted_names() const {
        std::vector<std::string> v = scoring.data->names;
        std::sort(v.begin(), v.end());
        return v;
    }
};

inline const Cpdag& learn_cached(SllContext& ctx, const std::set<std::string>& vars) {
    std::uint64_t key = 0;
    for (const auto& n : vars) key |= std::uint64_t{1} << ctx.scoring.id(n);
    auto it = ctx.learn_cache.find(key);
    if (it == ctx.learn_cache.end())
        it = ctx.learn_cache.emplace(key, learn_local_dag(ctx.scoring, vars, ctx.cap)).first;
    return it->second;
}

// Stage-1 candidate neighbors: grow Z from {t}, admitting any variable that
// the local search connects to t, until a full pass adds nothing. Growth
// saturates at cap-1 members so every later learn, including the spouse
// probes over H* plus two extras, stays within the subroutine cap.
inline const std::set<std::string>& stage1_candidates(SllContext& ctx, const std::string& t) {
    auto hit = ctx.stage1_cache.find(t);
    if (hit != ctx.stage1_cache.end()) return hit->second;
    ctx.scoring.id(t);
    std::set<std::string> z{t};
    auto names = ctx.sorted_names();
    bool grew = true;
    while (grew && z.size() + 1 < ctx.cap) {
        grew = false;
        for (const auto& v : names) {
            if (z.size() + 1 >= ctx.cap) break;
            if (z.count(v)) continue;
            std::set<std::string> vars = z;
            vars.insert(v);
            const Cpdag& g = learn_cached(ctx, vars);
            if (g.adjacent(g.id(t), g.id(v))) {
                z.insert(v);
                grew = true;
            }
        }
    }
    z.erase(t);
    return ctx.stage1_cache.emplace(t, std::move(z)).first->second;
}

// Symmetry-corrected neighbors plus parent/child orientation read from the
// structure learned over {t} and the corrected set.
inline const LocalStructure& find_neighbors(SllContext& ctx, const std::string& t) {
    auto hit = ctx.neighbor_cache.find(t);
    if (hit != ctx.neighbor_cache.end()) return hit->second;
    LocalStructure ls;
    ls.target = t;
    for (const auto& v : stage1_candidates(ctx, t))
        if (stage1_candidates(ctx, v).count(t)) ls.h_star.insert(v);
    std::set<std::string> vars = ls.h_star;
    vars.insert(t);
    const Cpdag& g = learn_cached(ctx, vars);
    int ti = g.id(t);
    for (const auto& v : ls.h_star) {
        int vi = g.id(v);
        if (g.arcs.count({vi, ti}))
            ls.pa.insert(v);
        else if (g.arcs.count({ti, vi}))
            ls.ch.insert(v);
    }
    return ctx.neighbor_cache.emplace(t, std::move(ls)).first->second;
}

// One-sided spouse candidates: v qualifies with witness c (q's first
// neighbor, in order, that exposes it) when relearning over {q, c, v} and
// q's neighbors orients q→c←v. Candidates come from the whole neighbor set
// because a small final graph may leave the q→c edge undirected even though
// adding v creates the orienting v-structure.
inline const std::map<std::string, std::string>& raw_spouses(SllContext& ctx,
                                                             const std::string& q) {
    auto hit = ctx.raw_spouse_cache.find(q);
    if (hit != ctx.raw_spouse_cache.end()) return hit->second;
    std::map<std::string, std::string> res;
    const LocalStructure& lq = find_neighbors(ctx, q);
    auto names = ctx.sorted_names();
    for (const auto& c : lq.h_star)
        for (const auto& v : names) {
            if (v == q || v == c || lq.h_star.count(v) || res.count(v)) continue;
            if (!find_neighbors(ctx, v).h_star.count(c)) continue;
            std::set<std::string> vars = lq.h_star;
            vars.insert(q);
            vars.insert(c);
            vars.insert(v);
            const Cpdag& g = learn_cached(ctx, vars);
            if (g.arcs.count({g.id(q), g.id(c)}) && g.arcs.count({g.id(v), g.id(c)}))
                res.emplace(v, c);
        }
    return ctx.raw_spouse_cache.emplace(q, std::move(res)).first->second;
}

// Symmetric spouse set: kept only when each side exposes the other.
inline std::map<std::string, std::string> find_spouses(SllContext& ctx, const std::string& q) {
    std::map<std::string, std::string> out;
    for (const auto& [v, c] : raw_spouses(ctx, q))
        if (raw_spouses(ctx, v).count(q)) out.emplace(v, c);
    return out;
}

}  // namespace aclp
