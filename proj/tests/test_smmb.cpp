#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "aclp/mag.hpp"
#include "aclp/rng.hpp"
#include "aclp/smmb.hpp"

using namespace aclp;

namespace {

struct Gen {
    std::vector<std::string> names;
    std::vector<int> cards;
    std::vector<std::vector<int>> parents;
    std::vector<std::vector<std::vector<double>>> cpt;

    DataSet sample(std::size_t n, std::uint64_t seed) const {
        std::vector<std::size_t> order;
        std::vector<bool> placed(names.size(), false);
        while (order.size() < names.size())
            for (std::size_t v = 0; v < names.size(); ++v) {
                if (placed[v]) continue;
                bool ready = true;
                for (int p : parents[v]) ready = ready && placed[p];
                if (ready) {
                    order.push_back(v);
                    placed[v] = true;
                }
            }
        Rng rng(seed);
        DataSet d;
        d.names = names;
        d.cards = cards;
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<int> row(names.size(), -1);
            for (std::size_t v : order) {
                std::size_t config = 0;
                for (int p : parents[v]) config = config * cards[p] + row[p];
                row[v] = rng.categorical(cpt[v][config]);
            }
            d.rows.push_back(row);
        }
        return d;
    }
};

std::vector<std::vector<double>> noisy_or2(double base, double s1, double s2) {
    std::vector<std::vector<double>> rows;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            double p1 = base + (a ? s1 : 0.0) + (b ? s2 : 0.0);
            if (p1 > 0.97) p1 = 0.97;
            rows.push_back({1.0 - p1, p1});
        }
    return rows;
}

// Hidden L confounds T and X; each of T, X also has its own observed parent
// and child, which gives the district test both spouse witnesses.
Gen confounded_gen() {
    Gen g;
    g.names = {"L", "T", "X", "M", "P", "C1", "C2"};
    g.cards = std::vector<int>(7, 2);
    g.parents = {{}, {0, 4}, {0, 3}, {}, {}, {1, 3}, {2, 4}};
    g.cpt.resize(7);
    g.cpt[0] = {{0.5, 0.5}};
    g.cpt[3] = {{0.5, 0.5}};
    g.cpt[4] = {{0.5, 0.5}};
    g.cpt[1] = noisy_or2(0.08, 0.55, 0.35);
    g.cpt[2] = noisy_or2(0.08, 0.55, 0.35);
    g.cpt[5] = noisy_or2(0.06, 0.5, 0.4);
    g.cpt[6] = noisy_or2(0.06, 0.5, 0.4);
    return g;
}

Gen chain3() {
    Gen g;
    g.names = {"A", "B", "T"};
    g.cards = {2, 2, 2};
    g.parents = {{}, {2}, {0}};
    g.cpt = {{{0.4, 0.6}}, {{0.9, 0.1}, {0.15, 0.85}}, {{0.85, 0.15}, {0.2, 0.8}}};
    return g;
}

BayesNet structural_net(const std::vector<std::string>& names,
                        const std::vector<std::pair<std::string, std::string>>& arcs) {
    BayesNet net;
    for (const auto& n : names) {
        net.index[n] = static_cast<int>(net.names.size());
        net.names.push_back(n);
        net.values.push_back({"0", "1"});
    }
    net.parents.resize(names.size());
    for (const auto& [a, b] : arcs) net.parents[net.index.at(b)].push_back(net.index.at(a));
    for (std::size_t v = 0; v < names.size(); ++v) {
        std::size_t configs = 1;
        for (int p : net.parents[v]) configs *= net.values[p].size();
        net.cpt.push_back(std::vector<double>(configs * 2, 0.5));
    }
    return net;
}

using EdgeMap = std::map<std::pair<std::string, std::string>, std::pair<Mark, Mark>>;

}  // namespace

TEST_CASE("chain without latents has no district") {
    auto d = chain3().sample(4000, 3);
    SllContext ctx(d);
    for (const auto& v : d.names) {
        auto dis = find_dis(ctx, v);
        CHECK(dis.empty());
    }
}

TEST_CASE("fewer than two neighbors skips district search") {
    Gen g;
    g.names = {"T", "X", "W"};
    g.cards = {2, 2, 2};
    g.parents = {{1}, {}, {}};
    g.cpt = {{{0.9, 0.1}, {0.1, 0.9}}, {{0.5, 0.5}}, {{0.6, 0.4}}};
    auto d = g.sample(3000, 5);
    SllContext ctx(d);
    REQUIRE(find_neighbors(ctx, "T").h_star == std::set<std::string>{"X"});
    CHECK(find_dis(ctx, "T").empty());
}

TEST_CASE("hidden confounder district matches the projected truth") {
    auto gen = confounded_gen();
    auto truth = structural_net({"L", "T", "X", "M", "P", "C1", "C2"},
                                {{"L", "T"}, {"L", "X"}, {"M", "X"}, {"P", "T"},
                                 {"T", "C1"}, {"M", "C1"}, {"X", "C2"}, {"P", "C2"}});
    auto mag = latent_project(truth, {"L"});
    auto want = true_mag_mb(mag, "T");
    REQUIRE(want.dis == std::set<std::string>{"X"});
    REQUIRE(want.pa == std::set<std::string>{"P"});
    REQUIRE(want.ch == std::set<std::string>{"C1"});
    REQUIRE(want.sp == std::set<std::string>{"M"});

    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto obs = hide_latents(gen.sample(5000, seed), {"L"});
        SllContext ctx(obs);
        auto dis = find_dis(ctx, "T");
        CHECK(dis == want.dis);
        const auto& h = find_neighbors(ctx, "T").h_star;
        for (const auto& v : dis) CHECK(h.count(v));
    }
}

TEST_CASE("blanket assembly around the confounded target") {
    auto obs = hide_latents(confounded_gen().sample(5000, 1), {"L"});
    SllContext ctx(obs);
    auto mb = smmb(ctx, "T");

    CHECK(mb.target == "T");
    CHECK(mb.pa == std::set<std::string>{"P"});
    CHECK(mb.ch == std::set<std::string>{"C1"});
    CHECK(mb.und == std::set<std::string>{"C2"});
    CHECK(mb.sp == std::set<std::string>{"M"});
    CHECK(mb.dis == std::set<std::string>{"X"});
    CHECK(mb.pa_dis.empty());
    CHECK(mb.dis_ch.empty());
    CHECK(mb.pa_dis_ch.empty());

    EdgeMap want{{{"C1", "M"}, {Mark::arrow, Mark::tail}},
                 {{"C1", "T"}, {Mark::arrow, Mark::tail}},
                 {{"C2", "T"}, {Mark::tail, Mark::tail}},
                 {{"M", "X"}, {Mark::tail, Mark::arrow}},
                 {{"P", "T"}, {Mark::tail, Mark::arrow}},
                 {{"T", "X"}, {Mark::arrow, Mark::arrow}}};
    CHECK(mb.edges == want);
}

TEST_CASE("blanket sets are disjoint and exclude the target") {
    auto obs = hide_latents(confounded_gen().sample(5000, 2), {"L"});
    SllContext ctx(obs);
    for (const auto& t : obs.names) {
        auto mb = smmb(ctx, t);
        std::vector<const std::set<std::string>*> sets{&mb.pa,     &mb.ch,     &mb.und,
                                                       &mb.sp,     &mb.dis,    &mb.pa_dis,
                                                       &mb.dis_ch, &mb.pa_dis_ch};
        std::size_t total = 0;
        for (const auto* s : sets) {
            total += s->size();
            CHECK(!s->count(t));
        }
        CHECK(total == mb.flat().size());
        // bidirected endpoints stay inside the district sets
        for (const auto& [key, marks] : mb.edges)
            if (marks.first == Mark::arrow && marks.second == Mark::arrow)
                for (const auto& end : {key.first, key.second})
                    CHECK((end == t || mb.dis.count(end) || mb.dis_ch.count(end)));
    }
}

TEST_CASE("collider target collects both parents") {
    Gen g;
    g.names = {"A", "B", "T"};
    g.cards = {2, 2, 2};
    g.parents = {{}, {}, {0, 1}};
    g.cpt = {{{0.5, 0.5}},
             {{0.5, 0.5}},
             {{0.95, 0.05}, {0.25, 0.75}, {0.3, 0.7}, {0.02, 0.98}}};
    auto d = g.sample(5000, 7);
    SllContext ctx(d);
    auto mb = smmb(ctx, "T");
    CHECK(mb.flat() == std::set<std::string>{"A", "B"});
    CHECK(mb.pa == std::set<std::string>{"A", "B"});
    CHECK(mb.dis.empty());
    CHECK(mb.dis_ch.empty());
    EdgeMap want{{{"A", "T"}, {Mark::tail, Mark::arrow}},
                 {{"B", "T"}, {Mark::tail, Mark::arrow}}};
    CHECK(mb.edges == want);
}

TEST_CASE("single variable yields an empty blanket") {
    DataSet d;
    d.names = {"T"};
    d.cards = {2};
    d.rows = {{0}, {1}, {0}, {1}};
    SllContext ctx(d);
    auto mb = smmb(ctx, "T");
    CHECK(mb.flat().empty());
    CHECK(mb.edges.empty());
}

TEST_CASE("smmb is deterministic for a fixed data set") {
    auto obs = hide_latents(confounded_gen().sample(2500, 9), {"L"});
    SllContext c1(obs), c2(obs);
    CHECK(smmb(c1, "T") == smmb(c2, "T"));
    CHECK(smmb(c1, "X") == smmb(c2, "X"));
}

TEST_CASE("district members are always neighbors") {
    auto obs = hide_latents(confounded_gen().sample(3000, 11), {"L"});
    SllContext ctx(obs);
    for (const auto& t : obs.names) {
        auto dis = find_dis(ctx, t);
        const auto& h = find_neighbors(ctx, t).h_star;
        for (const auto& v : dis) CHECK(h.count(v));
    }
}

namespace {

MarkovBlanket mb_with(const std::string& target, const EdgeMap& edges) {
    MarkovBlanket mb;
    mb.target = target;
    mb.edges = edges;
    return mb;
}

const std::vector<std::string> kOrder{"A", "B", "C", "D"};

}  // namespace

TEST_CASE("order orients an unoriented edge by source activity") {
    auto mb = mb_with("A_B", {{{"A_B", "C_D"}, {Mark::tail, Mark::tail}}});
    mb.und = {"C_D"};
    auto out = orient_with_process_order(mb, kOrder);
    CHECK(out.edges.at({"A_B", "C_D"}) == std::make_pair(Mark::tail, Mark::arrow));
    CHECK(out.notes.empty());
    // und member whose edge is now directed moves to the child bucket
    CHECK(out.und.empty());
    CHECK(out.ch == std::set<std::string>{"C_D"});
}

TEST_CASE("order never touches bidirected edges") {
    auto mb = mb_with("A_B", {{{"A_B", "C_D"}, {Mark::arrow, Mark::arrow}}});
    mb.dis = {"C_D"};
    auto out = orient_with_process_order(mb, kOrder);
    CHECK(out.edges.at({"A_B", "C_D"}) == std::make_pair(Mark::arrow, Mark::arrow));
    CHECK(out.notes.empty());
    CHECK(out.dis == std::set<std::string>{"C_D"});
}

TEST_CASE("conflicting directed edge is flagged but kept") {
    auto mb = mb_with("A_B", {{{"A_B", "C_D"}, {Mark::arrow, Mark::tail}}});
    mb.pa = {"C_D"};
    auto out = orient_with_process_order(mb, kOrder);
    CHECK(out.edges.at({"A_B", "C_D"}) == std::make_pair(Mark::arrow, Mark::tail));
    REQUIRE(out.notes.size() == 1);
    CHECK(out.notes[0] == "edge A_B <- C_D conflicts with process order");
}

TEST_CASE("consistent directed edge passes silently") {
    auto mb = mb_with("A_B", {{{"A_B", "C_D"}, {Mark::tail, Mark::arrow}}});
    mb.ch = {"C_D"};
    auto out = orient_with_process_order(mb, kOrder);
    CHECK(out == mb);
}

TEST_CASE("unmapped variable is noted and left alone") {
    auto mb = mb_with("A_B", {{{"A_B", "Q_R"}, {Mark::tail, Mark::tail}}});
    mb.und = {"Q_R"};
    auto out = orient_with_process_order(mb, kOrder);
    CHECK(out.edges.at({"A_B", "Q_R"}) == std::make_pair(Mark::tail, Mark::tail));
    REQUIRE(out.notes.size() == 1);
    CHECK(out.notes[0] == "order cannot orient A_B -- Q_R: unmapped variable");
    CHECK(out.und == std::set<std::string>{"Q_R"});
}

TEST_CASE("equal source ranks cannot orient") {
    auto mb = mb_with("A_B", {{{"A_B", "A_C"}, {Mark::tail, Mark::tail}}});
    mb.und = {"A_C"};
    auto out = orient_with_process_order(mb, kOrder);
    CHECK(out.edges.at({"A_B", "A_C"}) == std::make_pair(Mark::tail, Mark::tail));
    REQUIRE(out.notes.size() == 1);
    CHECK(out.notes[0] == "order cannot orient A_B -- A_C: same source activity");
}

TEST_CASE("source rank falls back to the left half and raw names") {
    auto mb = mb_with("C_Z", {{{"A", "C_Z"}, {Mark::tail, Mark::tail}}});
    mb.und = {"A"};
    // A is a raw activity; C_Z maps through its left half C
    auto out = orient_with_process_order(mb, kOrder);
    CHECK(out.edges.at({"A", "C_Z"}) == std::make_pair(Mark::tail, Mark::arrow));
    CHECK(out.pa == std::set<std::string>{"A"});
}

TEST_CASE("underscored activity names match the longest split") {
    std::vector<std::string> order{"CHECKIN_START", "GATE"};
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < order.size(); ++i) rank.emplace(order[i], i);
    auto r = detail::source_rank(rank, "CHECKIN_START_GATE");
    REQUIRE(r.has_value());
    CHECK(*r == 0);
}

TEST_CASE("orientation by order is idempotent") {
    auto mb = mb_with("A_B", {{{"A_B", "C_D"}, {Mark::tail, Mark::tail}},
                              {{"A_B", "Q_R"}, {Mark::tail, Mark::tail}},
                              {{"A_B", "A_C"}, {Mark::tail, Mark::tail}},
                              {{"B_C", "C_D"}, {Mark::arrow, Mark::arrow}}});
    mb.und = {"C_D", "Q_R", "A_C"};
    mb.dis = {"B_C"};
    auto once = orient_with_process_order(mb, kOrder);
    auto twice = orient_with_process_order(once, kOrder);
    CHECK(once == twice);
}
