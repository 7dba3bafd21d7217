#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "aclp/error.hpp"
#include "aclp/scoring.hpp"

namespace aclp {

// Partially directed graph over a sorted node list. arcs holds directed
// edges (a,b) = a→b; lines holds undirected edges with a < b.
struct Cpdag {
    std::vector<std::string> nodes;
    std::set<std::pair<int, int>> arcs;
    std::set<std::pair<int, int>> lines;

    bool operator==(const Cpdag&) const = default;

    int id(const std::string& name) const {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), name);
        if (it == nodes.end() || *it != name) throw DataError("unknown node " + name);
        return static_cast<int>(it - nodes.begin());
    }

    bool has_line(int a, int b) const {
        return lines.count({std::min(a, b), std::max(a, b)}) != 0;
    }

    bool adjacent(int a, int b) const {
        return arcs.count({a, b}) || arcs.count({b, a}) || has_line(a, b);
    }

    std::set<int> adj(int v) const {
        std::set<int> out;
        for (const auto& [a, b] : arcs) {
            if (a == v) out.insert(b);
            if (b == v) out.insert(a);
        }
        for (const auto& [a, b] : lines) {
            if (a == v) out.insert(b);
            if (b == v) out.insert(a);
        }
        return out;
    }

    std::set<int> neighbors(int v) const {
        std::set<int> out;
        for (const auto& [a, b] : lines) {
            if (a == v) out.insert(b);
            if (b == v) out.insert(a);
        }
        return out;
    }

    std::set<int> parents(int v) const {
        std::set<int> out;
        for (const auto& [a, b] : arcs)
            if (b == v) out.insert(a);
        return out;
    }

    std::size_t edge_count() const { return arcs.size() + lines.size(); }
};

namespace detail {

// Dor-Tarsi extension: repeatedly retire a node with no outgoing arcs whose
// undirected neighbors are adjacent to all of its other neighbors.
inline std::set<std::pair<int, int>> pdag_to_dag(const Cpdag& g) {
    int k = static_cast<int>(g.nodes.size());
    std::set<std::pair<int, int>> arcs = g.arcs;
    std::vector<bool> active(k, true);
    int remaining = k;
    while (remaining > 0) {
        int pick = -1;
        for (int x = 0; x < k && pick < 0; ++x) {
            if (!active[x]) continue;
            bool sink = true;
            for (const auto& [a, b] : g.arcs)
                if (a == x && active[b]) sink = false;
            if (!sink) continue;
            std::set<int> nbrs, all;
            for (int y = 0; y < k; ++y) {
                if (y == x || !active[y]) continue;
                if (g.has_line(x, y)) nbrs.insert(y);
                if (g.adjacent(x, y)) all.insert(y);
            }
            bool ok = true;
            for (int y : nbrs)
                for (int z : all)
                    if (z != y && !g.adjacent(y, z)) ok = false;
            if (!ok) continue;
            for (int y : nbrs) arcs.insert({y, x});
            pick = x;
        }
        if (pick < 0) throw DataError("graph admits no consistent extension");
        active[pick] = false;
        --remaining;
    }
    return arcs;
}

// Pattern completion: v-structure arcs plus the closure of the three
// background-free orientation rules; everything else stays undirected.
inline Cpdag dag_to_cpdag(const std::vector<std::string>& nodes,
                          const std::set<std::pair<int, int>>& dag_arcs) {
    int k = static_cast<int>(nodes.size());
    std::set<std::pair<int, int>> skel;
    for (const auto& [a, b] : dag_arcs) skel.insert({std::min(a, b), std::max(a, b)});
    auto adjacent = [&](int a, int b) {
        return skel.count({std::min(a, b), std::max(a, b)}) != 0;
    };
    std::set<std::pair<int, int>> dir;
    for (int c = 0; c < k; ++c) {
        std::vector<int> pa;
        for (const auto& [a, b] : dag_arcs)
            if (b == c) pa.push_back(a);
        for (std::size_t i = 0; i < pa.size(); ++i)
            for (std::size_t j = i + 1; j < pa.size(); ++j)
                if (!adjacent(pa[i], pa[j])) {
                    dir.insert({pa[i], c});
                    dir.insert({pa[j], c});
                }
    }
    auto undirected = [&](int a, int b) {
        return !dir.count({a, b}) && !dir.count({b, a});
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [a, b] : skel) {
            for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                if (!undirected(x, y)) continue;
                bool orient = false;
                // chain head: w→x with w,y nonadjacent
                for (const auto& d : dir)
                    if (d.second == x && d.first != y && !adjacent(d.first, y)) orient = true;
                // acyclicity: directed path x→w→y alongside the edge
                if (!orient)
                    for (const auto& d : dir)
                        if (d.first == x && dir.count({d.second, y})) orient = true;
                // two nonadjacent colliders into y reachable from x by lines
                if (!orient) {
                    std::vector<int> spokes;
                    for (const auto& d : dir)
                        if (d.second == y && d.first != x && adjacent(x, d.first) &&
                            undirected(x, d.first))
                            spokes.push_back(d.first);
                    for (std::size_t i = 0; i < spokes.size() && !orient; ++i)
                        for (std::size_t j = i + 1; j < spokes.size() && !orient; ++j)
                            if (!adjacent(spokes[i], spokes[j])) orient = true;
                }
                if (orient && dag_arcs.count({x, y})) {
                    dir.insert({x, y});
                    changed = true;
                }
            }
        }
    }
    Cpdag out;
    out.nodes = nodes;
    out.arcs = dir;
    for (const auto& [a, b] : skel)
        if (undirected(a, b)) out.lines.insert({a, b});
    return out;
}

}  // namespace detail

namespace detail {

struct GesState {
    ScoringContext* ctx;
    std::vector<int> global;  // local index -> data column
    Cpdag g;

    double bic(int y, const std::set<int>& parents) const {
        std::vector<int> ps;
        for (int p : parents) ps.push_back(global[p]);
        return local_bic(*ctx, global[y], ps);
    }

    bool clique(const std::set<int>& s) const {
        for (int a : s)
            for (int b : s)
                if (a < b && !g.adjacent(a, b)) return false;
        return true;
    }

    // Any path y ⇒ x along arcs (forward) or lines, avoiding `block`.
    bool semidirected_reaches(int y, int x, const std::set<int>& block) const {
        std::vector<int> stack{y};
        std::set<int> seen{y};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            std::set<int> next;
            for (const auto& [a, b] : g.arcs)
                if (a == v) next.insert(b);
            for (int w : g.neighbors(v)) next.insert(w);
            for (int w : next) {
                if (block.count(w) || seen.count(w)) continue;
                if (w == x) return true;
                seen.insert(w);
                stack.push_back(w);
            }
        }
        return false;
    }

    void normalize() { g = dag_to_cpdag(g.nodes, pdag_to_dag(g)); }

    // visit(x, y, chosen, delta) over the valid operators; returns whether
    // enumeration was stopped early.
    template <typename F>
    bool each_insert(F&& visit) {
        int k = static_cast<int>(g.nodes.size());
        for (int x = 0; x < k; ++x)
            for (int y = 0; y < k; ++y) {
                if (x == y || g.adjacent(x, y)) continue;
                auto nbry = g.neighbors(y);
                std::set<int> na;
                std::vector<int> cand;
                for (int v : nbry) {
                    if (g.adjacent(x, v))
                        na.insert(v);
                    else
                        cand.push_back(v);
                }
                auto pay = g.parents(y);
                for (std::uint32_t bits = 0; bits < (1u << cand.size()); ++bits) {
                    std::set<int> s = na;
                    for (std::size_t i = 0; i < cand.size(); ++i)
                        if (bits & (1u << i)) s.insert(cand[i]);
                    if (!clique(s)) continue;
                    if (semidirected_reaches(y, x, s)) continue;
                    std::set<int> base = pay;
                    base.insert(s.begin(), s.end());
                    std::set<int> with = base;
                    with.insert(x);
                    double delta = bic(y, with) - bic(y, base);
                    std::vector<int> t;
                    for (std::size_t i = 0; i < cand.size(); ++i)
                        if (bits & (1u << i)) t.push_back(cand[i]);
                    if (visit(x, y, t, delta)) return true;
                }
            }
        return false;
    }

    template <typename F>
    bool each_delete(F&& visit) {
        int k = static_cast<int>(g.nodes.size());
        for (int x = 0; x < k; ++x)
            for (int y = 0; y < k; ++y) {
                if (x == y) continue;
                if (!g.arcs.count({x, y}) && !g.has_line(x, y)) continue;
                auto nbry = g.neighbors(y);
                std::vector<int> na;
                for (int v : nbry)
                    if (g.adjacent(x, v)) na.push_back(v);
                auto pay = g.parents(y);
                for (std::uint32_t bits = 0; bits < (1u << na.size()); ++bits) {
                    std::set<int> keep;
                    for (std::size_t i = 0; i < na.size(); ++i)
                        if (!(bits & (1u << i))) keep.insert(na[i]);
                    if (!clique(keep)) continue;
                    std::set<int> base = pay;
                    base.insert(keep.begin(), keep.end());
                    std::set<int> without = base;
                    without.erase(x);
                    std::set<int> with = base;
                    with.insert(x);
                    double delta = bic(y, without) - bic(y, with);
                    std::vector<int> h;
                    for (std::size_t i = 0; i < na.size(); ++i)
                        if (bits & (1u << i)) h.push_back(na[i]);
                    if (visit(x, y, h, delta)) return true;
                }
            }
        return false;
    }

    void apply_insert(int x, int y, const std::vector<int>& t) {
        g.arcs.insert({x, y});
        for (int v : t) {
            g.lines.erase({std::min(v, y), std::max(v, y)});
            g.arcs.insert({v, y});
        }
        normalize();
    }

    void apply_delete(int x, int y, const std::vector<int>& h) {
        g.arcs.erase({x, y});
        g.lines.erase({std::min(x, y), std::max(x, y)});
        for (int v : h) {
            if (g.has_line(y, v)) {
                g.lines.erase({std::min(v, y), std::max(v, y)});
                g.arcs.insert({y, v});
            }
            if (g.has_line(x, v)) {
                g.lines.erase({std::min(v, x), std::max(v, x)});
                g.arcs.insert({x, v});
            }
        }
        normalize();
    }
};

}  // namespace detail

// Two-phase greedy equivalence search over the named variables. Ties within
// 1e-9 go to the first operator in enumeration order.
inline Cpdag learn_local_dag(ScoringContext& ctx, const std::set<std::string>& vars,
                             std::size_t cap = 12) {
    if (vars.size() > cap) throw CapabilityError("local search limited to " +
                                                 std::to_string(cap) + " variables");
    detail::GesState st;
    st.ctx = &ctx;
    st.g.nodes.assign(vars.begin(), vars.end());
    for (const auto& n : st.g.nodes) st.global.push_back(ctx.id(n));
    if (st.g.nodes.size() < 2) return st.g;

    const double tol = 1e-9;
    for (bool forward : {true, false}) {
        while (true) {
            double best = -std::numeric_limits<double>::infinity();
            auto find_max = [&](int, int, const std::vector<int>&, double delta) {
                best = std::max(best, delta);
                return false;
            };
            if (forward)
                st.each_insert(find_max);
            else
                st.each_delete(find_max);
            if (!(best > tol)) break;
            auto take_first = [&](int x, int y, const std::vector<int>& s, double delta) {
                if (delta < best - tol) return false;
                if (forward)
                    st.apply_insert(x, y, s);
                else
                    st.apply_delete(x, y, s);
                return true;
            };
            if (forward)
                st.each_insert(take_first);
            else
                st.each_delete(take_first);
        }
    }
    return st.g;
}

// Exhaustive structure search by dynamic programming over sink sets; the
// returned pattern is exactly optimal for the scored class.
inline Cpdag learn_local_dag_exact(ScoringContext& ctx, const std::set<std::string>& vars) {
    if (vars.size() > 10) throw CapabilityError("exact search limited to 10 variables");
    std::vector<std::string> names(vars.begin(), vars.end());
    int k = static_cast<int>(names.size());
    Cpdag trivial;
    trivial.nodes = names;
    if (k < 2) return trivial;
    std::vector<int> global;
    for (const auto& n : names) global.push_back(ctx.id(n));

    const double tol = 1e-9;
    std::uint32_t full = (1u << k) - 1;
    auto score = [&](int i, std::uint32_t parents) {
        std::vector<int> ps;
        for (int p = 0; p < k; ++p)
            if (parents & (1u << p)) ps.push_back(global[p]);
        return local_bic(ctx, global[i], ps);
    };

    // best parent set for i drawn from each candidate pool
    std::vector<std::vector<double>> bscore(k, std::vector<double>(full + 1));
    std::vector<std::vector<std::uint32_t>> bset(k, std::vector<std::uint32_t>(full + 1));
    for (int i = 0; i < k; ++i)
        for (std::uint32_t s = 0; s <= full; ++s) {
            if (s & (1u << i)) continue;
            double cur = -std::numeric_limits<double>::infinity();
            std::uint32_t arg = 0;
            for (int x = 0; x < k; ++x) {
                if (!(s & (1u << x))) continue;
                std::uint32_t sub = s & ~(1u << x);
                if (bscore[i][sub] > cur + tol) {
                    cur = bscore[i][sub];
                    arg = bset[i][sub];
                }
            }
            double exact = score(i, s);
            if (exact > cur + tol) {
                cur = exact;
                arg = s;
            }
            bscore[i][s] = cur;
            bset[i][s] = arg;
        }

    std::vector<double> dp(full + 1, -std::numeric_limits<double>::infinity());
    std::vector<int> choice(full + 1, -1);
    dp[0] = 0.0;
    for (std::uint32_t w = 1; w <= full; ++w)
        for (int s = 0; s < k; ++s) {
            if (!(w & (1u << s))) continue;
            std::uint32_t rest = w & ~(1u << s);
            double total = dp[rest] + bscore[s][rest];
            if (total > dp[w] + tol) {
                dp[w] = total;
                choice[w] = s;
            }
        }

    std::set<std::pair<int, int>> arcs;
    std::uint32_t w = full;
    while (w) {
        int s = choice[w];
        std::uint32_t rest = w & ~(1u << s);
        std::uint32_t ps = bset[s][rest];
        for (int p = 0; p < k; ++p)
            if (ps & (1u << p)) arcs.insert({p, s});
        w = rest;
    }
    return detail::dag_to_cpdag(names, arcs);
}

}  // namespace aclp
