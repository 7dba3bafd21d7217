#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aclp/mag.hpp"
#include "aclp/sll.hpp"

namespace aclp {

// District-neighbor detection: n joins dis(t) when some m in n's
// neighborhood (other than t) is a spouse of t, and n in turn has a spouse
// inside t's neighborhood.
inline std::set<std::string> find_dis(SllContext& ctx, const std::string& t) {
    const LocalStructure& lt = find_neighbors(ctx, t);
    if (lt.h_star.size() < 2) return {};
    auto st = find_spouses(ctx, t);
    std::set<std::string> dis;
    for (const auto& n : lt.h_star) {
        const auto& hn = find_neighbors(ctx, n).h_star;
        bool witness = false;
        for (const auto& m : hn)
            if (m != t && st.count(m)) witness = true;
        if (!witness) continue;
        for (const auto& [m1, c] : find_spouses(ctx, n))
            if (m1 != n && lt.h_star.count(m1)) {
                dis.insert(n);
                break;
            }
    }
    return dis;
}

namespace detail {

inline std::set<std::string> close_district(SllContext& ctx, const std::string& q) {
    std::set<std::string> d = find_dis(ctx, q);
    bool grew = true;
    while (grew) {
        grew = false;
        auto snapshot = d;
        for (const auto& m : snapshot)
            for (const auto& x : find_dis(ctx, m))
                if (x != q && d.insert(x).second) grew = true;
    }
    return d;
}

}  // namespace detail

// Full blanket assembly around t: neighbors, then for t and each child the
// spouse set and the closed district set with its parents.
inline MarkovBlanket smmb(SllContext& ctx, const std::string& t) {
    const LocalStructure lt = find_neighbors(ctx, t);
    std::set<std::string> pa = lt.pa, ch = lt.ch, und;
    for (const auto& v : lt.h_star)
        if (!pa.count(v) && !ch.count(v)) und.insert(v);

    std::set<std::string> sp, dis, pa_dis, dis_ch, pa_dis_ch;
    struct PendingEdge {
        std::string a, b;
        Mark ma, mb;
    };
    std::vector<PendingEdge> pending;
    for (const auto& v : pa) pending.push_back({v, t, Mark::tail, Mark::arrow});
    for (const auto& v : ch) pending.push_back({t, v, Mark::tail, Mark::arrow});
    for (const auto& v : und) pending.push_back({t, v, Mark::tail, Mark::tail});

    std::vector<std::string> queue{t};
    for (const auto& c : ch) queue.push_back(c);
    for (const auto& q : queue) {
        for (const auto& [v, c] : find_spouses(ctx, q)) {
            if (q == t)
                sp.insert(v);
            else
                pa_dis_ch.insert(v);
            pending.push_back({v, c, Mark::tail, Mark::arrow});
        }
        auto d = detail::close_district(ctx, q);
        for (const auto& m : d) {
            (q == t ? dis : dis_ch).insert(m);
            pending.push_back({q, m, Mark::arrow, Mark::arrow});
            for (const auto& p : find_neighbors(ctx, m).pa) {
                (q == t ? pa_dis : pa_dis_ch).insert(p);
                pending.push_back({p, m, Mark::tail, Mark::arrow});
            }
        }
    }

    MarkovBlanket mb;
    mb.target = t;
    std::set<std::string> claimed{t};
    auto take = [&](const std::set<std::string>& src, std::set<std::string>& dst) {
        for (const auto& v : src)
            if (claimed.insert(v).second) dst.insert(v);
    };
    take(dis, mb.dis);
    take(pa, mb.pa);
    take(ch, mb.ch);
    take(und, mb.und);
    take(sp, mb.sp);
    take(pa_dis, mb.pa_dis);
    take(dis_ch, mb.dis_ch);
    take(pa_dis_ch, mb.pa_dis_ch);

    // Keep edges inside the blanket; a bidirected claim on a pair overrides
    // any directed one, otherwise the first claim stands.
    for (auto e : pending) {
        if (!claimed.count(e.a) || !claimed.count(e.b)) continue;
        if (e.a > e.b) {
            std::swap(e.a, e.b);
            std::swap(e.ma, e.mb);
        }
        auto key = std::make_pair(e.a, e.b);
        auto marks = std::make_pair(e.ma, e.mb);
        auto it = mb.edges.find(key);
        if (it == mb.edges.end()) {
            mb.edges.emplace(key, marks);
            continue;
        }
        bool was_bi = it->second.first == Mark::arrow && it->second.second == Mark::arrow;
        bool now_bi = e.ma == Mark::arrow && e.mb == Mark::arrow;
        if (!was_bi && now_bi) it->second = marks;
    }
    return mb;
}

namespace detail {

// Indicator names are built as SOURCE_DEST from activity names; recover the
// source by trying each underscore split against the order.
inline std::optional<std::size_t> source_rank(const std::map<std::string, std::size_t>& rank,
                                              const std::string& var) {
    if (auto it = rank.find(var); it != rank.end()) return it->second;
    for (std::size_t pos = 0; pos < var.size(); ++pos) {
        if (var[pos] != '_') continue;
        auto left = var.substr(0, pos);
        auto right = var.substr(pos + 1);
        if (rank.count(left) && rank.count(right)) return rank.at(left);
    }
    for (std::size_t pos = 0; pos < var.size(); ++pos) {
        if (var[pos] != '_') continue;
        auto left = var.substr(0, pos);
        if (rank.count(left)) return rank.at(left);
    }
    return std::nullopt;
}

}  // namespace detail

// Orient leftover undirected edges by the process order of the underlying
// source activities. Directed edges are never flipped (conflicts are noted),
// bidirected edges are never touched, and unmappable variables are skipped
// with a warning note.
inline MarkovBlanket orient_with_process_order(MarkovBlanket mb,
                                               const std::vector<std::string>& order) {
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(order[i], i);
    auto note = [&](const std::string& msg) {
        if (std::find(mb.notes.begin(), mb.notes.end(), msg) == mb.notes.end())
            mb.notes.push_back(msg);
    };
    for (auto& [key, marks] : mb.edges) {
        bool bi = marks.first == Mark::arrow && marks.second == Mark::arrow;
        if (bi) continue;
        auto ra = detail::source_rank(rank, key.first);
        auto rb = detail::source_rank(rank, key.second);
        bool undirected = marks.first == Mark::tail && marks.second == Mark::tail;
        if (!ra || !rb) {
            if (undirected)
                note("order cannot orient " + key.first + " -- " + key.second +
                     ": unmapped variable");
            continue;
        }
        if (undirected) {
            if (*ra < *rb)
                marks = {Mark::tail, Mark::arrow};
            else if (*rb < *ra)
                marks = {Mark::arrow, Mark::tail};
            else
                note("order cannot orient " + key.first + " -- " + key.second +
                     ": same source activity");
        } else {
            bool forward = marks.second == Mark::arrow;  // first -> second
            std::size_t src = forward ? *ra : *rb;
            std::size_t dst = forward ? *rb : *ra;
            if (dst < src)
                note("edge " + key.first + (forward ? " -> " : " <- ") + key.second +
                     " conflicts with process order");
        }
    }
    // reclassify target neighbors whose edge just became directed
    std::vector<std::string> moved;
    for (const auto& v : mb.und) {
        auto key = std::make_pair(std::min(v, mb.target), std::max(v, mb.target));
        auto it = mb.edges.find(key);
        if (it == mb.edges.end()) continue;
        const auto& marks = it->second;
        if (marks.first == Mark::tail && marks.second == Mark::tail) continue;
        bool v_first = key.first == v;
        bool v_is_parent = v_first ? marks.second == Mark::arrow : marks.first == Mark::arrow;
        (v_is_parent ? mb.pa : mb.ch).insert(v);
        moved.push_back(v);
    }
    for (const auto& v : moved) mb.und.erase(v);
    return mb;
}

}  // namespace aclp
