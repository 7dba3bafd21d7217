#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "aclp/eventlog.hpp"
#include "aclp/rng.hpp"

namespace aclp {

// Synthetic turnaround scenario:
//
//   CHECKIN -> SECURITY -> BOARDING
//     -> {FUEL || CATER || CLEAN || BAGGAGE || WATER} -> PUSHBACK -> TAXI -> TAKEOFF
//
// Link durations between activities are the causal variables. A latent
// ground-crew load u delays every ground-service branch at once, so each pair
// of branch links is confounded once u is unobservable; (BOARDING_CATER,
// BOARDING_FUEL) is the designated pair because only those two links feed
// the delay. The departure delay is a signed linear effect of four links and
// is emitted as a scheduled-time attribute on the TAKEOFF event, never as
// its own activity.
//
//   cs = 120 + U(0,300)                        CHECKIN->SECURITY
//   sb =  90 + U(0,420)                        SECURITY->BOARDING
//   u  = scale * U(0,600)                      latent
//   bf =  30 + 0.9 u + 1.0 sb + U(0,140)       BOARDING->FUEL
//   bc = 244 + 0.5 u + 0.8 cs + U(0,120)       BOARDING->CATER
//   bx = 150 + 0.9 u + U(0,500)                BOARDING->CLEAN/BAGGAGE/WATER
//   wx =  60 + U(0,300)                        branch->PUSHBACK wait, per branch
//   pt = 150 + U(0,300)                        PUSHBACK->TAXI
//   tt =  90 + U(0,180)                        TAXI->TAKEOFF
//   fd = 1.0 bf + 0.8 bc + 2.2 cs + 0.7 sb + U(0,150) - 2050
//
// The branch offsets share means near 670 and most of the u term, so the
// start-order permutation stays well mixed and each inter-branch adjacency
// ratio sits near 1/5, far enough under the preserve threshold that
// resolution reads the block as concurrency.
//
// The confounded pair is wired for discoverability. Each member of the pair
// has a private observed parent that the other member never touches: sb
// feeds bf and cs feeds bc, while sb, cs, and u are mutually independent.
// All four links feed the delay, so the exact independences bf _|_ cs and
// bc _|_ sb make the immoralities bf -> fd <- cs and bc -> fd <- sb
// compelled rather than tuned, certifying cs as a spouse of bf and sb as a
// spouse of bc. Those cross the pair (cs borders bc, sb borders bf), which
// is exactly the witness pattern district discovery needs to mark the pair
// bidirected. The filler branches carry wide private noise so they cannot
// pin u down and starve those adjacencies out of the greedy candidate sets.
//
// Conflict knobs inject the three disturbance classes: a repeated SECURITY
// screening (self-loop), a PUSHBACK redo after TAXI (reverse edge), and a full
// rework returning to CHECKIN after BOARDING (3-cycle). Knobs only append
// events; the planted link values above are drawn first, so two runs with the
// same seed agree on them regardless of knob settings.
struct FlightSpec {
    double self_loop_prob = 0.0;
    double exception_prob = 0.0;
    double rework_prob = 0.0;
    double confounder_scale = 1.0;
};

struct FlightTruth {
    std::vector<std::string> activities;
    std::vector<std::pair<std::string, std::string>> model_edges;
    std::vector<std::string> direct_causes;          // indicator names
    std::pair<std::string, std::string> confounded;  // latently coupled pair
};

inline const std::vector<std::string>& flight_branches() {
    static const std::vector<std::string> b{"FUEL", "CATER", "CLEAN", "BAGGAGE", "WATER"};
    return b;
}

inline FlightTruth flight_truth() {
    FlightTruth t;
    t.activities = {"CHECKIN", "SECURITY", "BOARDING", "PUSHBACK", "TAXI", "TAKEOFF"};
    t.activities.insert(t.activities.end(), flight_branches().begin(), flight_branches().end());
    std::sort(t.activities.begin(), t.activities.end());
    t.model_edges = {{"CHECKIN", "SECURITY"},
                     {"SECURITY", "BOARDING"},
                     {"PUSHBACK", "TAXI"},
                     {"TAXI", "TAKEOFF"}};
    for (const auto& b : flight_branches()) {
        t.model_edges.push_back({"BOARDING", b});
        t.model_edges.push_back({b, "PUSHBACK"});
    }
    t.direct_causes = {"BOARDING_CATER", "BOARDING_FUEL", "CHECKIN_SECURITY",
                       "SECURITY_BOARDING"};
    t.confounded = {"BOARDING_CATER", "BOARDING_FUEL"};
    return t;
}

inline LogFormat flight_log_format() {
    LogFormat fmt;
    fmt.end_col = "End";
    return fmt;
}

inline const std::string kScheduledAttr = "Scheduled";

namespace detail {

inline const char* flight_resource(const std::string& activity) {
    if (activity == "CHECKIN" || activity == "SECURITY") return "terminal";
    if (activity == "BOARDING") return "gate";
    if (activity == "TAXI" || activity == "TAKEOFF") return "tower";
    return "ramp";
}

}  // namespace detail

inline EventLog generate_flight_log(const FlightSpec& spec, std::size_t n_cases,
                                    std::uint64_t seed) {
    auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!unit(spec.self_loop_prob) || !unit(spec.exception_prob) || !unit(spec.rework_prob))
        throw DataError("flight spec probabilities must lie in [0,1]");
    if (!(spec.confounder_scale >= 0.0))
        throw DataError("flight spec confounder scale must be nonnegative");
    if (n_cases == 0) throw DataError("flight log needs at least one case");

    const Timestamp base = parse_timestamp("2024-01-01T00:00:00");
    const Timestamp dur = 300;
    Rng root(seed);

    EventLog log;
    for (std::size_t i = 0; i < n_cases; ++i) {
        Rng rng = root.split(static_cast<std::uint64_t>(i));
        const double cs = 120 + rng.uniform(0, 300);
        const double sb = 90 + rng.uniform(0, 420);
        const double u = spec.confounder_scale * rng.uniform(0, 600);
        std::vector<double> branch_links(flight_branches().size());
        branch_links[0] = 30 + 0.9 * u + 1.0 * sb + rng.uniform(0, 140);
        branch_links[1] = 244 + 0.5 * u + 0.8 * cs + rng.uniform(0, 120);
        for (std::size_t b = 2; b < branch_links.size(); ++b)
            branch_links[b] = 150 + 0.9 * u + rng.uniform(0, 500);
        std::vector<double> waits(flight_branches().size());
        for (auto& w : waits) w = 60 + rng.uniform(0, 300);
        const double bc = branch_links[1];
        const double pt = 150 + rng.uniform(0, 300);
        const double tt = 90 + rng.uniform(0, 180);
        const double fd = 1.0 * branch_links[0] + 0.8 * bc + 2.2 * cs + 0.7 * sb +
                          rng.uniform(0, 150) - 2050;
        const bool rep_security = rng.bernoulli(spec.self_loop_prob);
        const bool redo_pushback = rng.bernoulli(spec.exception_prob);
        const bool rework = rng.bernoulli(spec.rework_prob);

        char cid[24];
        std::snprintf(cid, sizeof cid, "F%05llu", static_cast<unsigned long long>(i));
        Trace tr;
        tr.case_id = cid;

        Timestamp clock = base + static_cast<Timestamp>(i) * 7200;
        auto emit = [&](const std::string& activity, double link) {
            clock += static_cast<Timestamp>(std::llround(link));
            Event e;
            e.activity = activity;
            e.case_id = tr.case_id;
            e.t_start = clock;
            e.t_end = clock + dur;
            e.resource = detail::flight_resource(activity);
            e.lifecycle = "complete";
            clock = e.t_end;
            tr.events.push_back(std::move(e));
        };

        emit("CHECKIN", 0);
        emit("SECURITY", cs);
        if (rep_security) emit("SECURITY", 60 + rng.uniform(0, 60));
        emit("BOARDING", sb);
        if (rework) {
            emit("CHECKIN", 60 + rng.uniform(0, 120));
            emit("SECURITY", 120 + rng.uniform(0, 300));
            emit("BOARDING", 90 + rng.uniform(0, 240));
        }
        const Timestamp board_end = clock;
        Timestamp push_start = 0;
        for (std::size_t b = 0; b < flight_branches().size(); ++b) {
            Event e;
            e.activity = flight_branches()[b];
            e.case_id = tr.case_id;
            e.t_start = board_end + static_cast<Timestamp>(std::llround(branch_links[b]));
            e.t_end = e.t_start + dur;
            e.resource = "ramp";
            e.lifecycle = "complete";
            push_start = std::max(
                push_start, e.t_end + static_cast<Timestamp>(std::llround(waits[b])));
            tr.events.push_back(std::move(e));
        }
        clock = push_start;
        emit("PUSHBACK", 0);
        emit("TAXI", pt);
        if (redo_pushback) {
            emit("PUSHBACK", 60 + rng.uniform(0, 120));
            emit("TAXI", 120 + rng.uniform(0, 300));
        }
        emit("TAKEOFF", tt);
        tr.events.back().extras[kScheduledAttr] =
            format_timestamp(tr.events.back().t_start - std::llround(fd));

        std::sort(tr.events.begin(), tr.events.end());
        log.traces.push_back(std::move(tr));
    }

    std::sort(log.traces.begin(), log.traces.end(),
              [](const Trace& a, const Trace& b) { return a.case_id < b.case_id; });
    log.activity_universe = flight_truth().activities;
    return log;
}

}  // namespace aclp
