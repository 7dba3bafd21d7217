#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "aclp/bayesnet.hpp"
#include "aclp/dataset.hpp"
#include "aclp/mag.hpp"
#include "aclp/metrics.hpp"
#include "aclp/smmb.hpp"

namespace aclp {

// Short variable aliases for the bundled diagnostic network.
inline const std::map<std::string, std::string>& alarm_aliases() {
    static const std::map<std::string, std::string> table{
        {"VTUB", "VENTTUBE"}, {"INT", "INTUBATION"}, {"PMB", "PULMEMBOLUS"},
        {"SHNT", "SHUNT"},    {"VLNG", "VENTLUNG"},  {"PRSS", "PRESS"},
        {"PAP", "PAP"},
    };
    return table;
}

inline std::string resolve_alias(const BayesNet& net, const std::string& name) {
    if (net.index.count(name)) return name;
    auto it = alarm_aliases().find(name);
    if (it != alarm_aliases().end() && net.index.count(it->second)) return it->second;
    throw DataError("unknown variable or alias: " + name);
}

struct ExperimentConfig {
    std::vector<std::string> latents;  // aliases or full names
    std::size_t sample_size = 2500;
    std::size_t repeats = 5;
    std::string target = "VTUB";
    std::uint64_t seed = 1;
    double significance = 0.05;  // recorded only; no CI baselines here
    std::size_t jobs = 1;        // worker threads across repeats
};

struct RepeatOutcome {
    std::uint64_t seed = 0;
    std::set<std::string> predicted;
    std::optional<MetricsReport> metrics;
    std::string error;  // nonempty when this repeat failed

    bool operator==(const RepeatOutcome&) const = default;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<std::string> resolved_latents;
    std::string resolved_target;
    std::set<std::string> truth;
    std::vector<RepeatOutcome> repeats;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_f1 = 0.0;
    double wall_seconds = 0.0;  // the one field exempt from reproducibility
};

// Table protocol: per repeat, sample the net, hide the latents, discover the
// target's blanket, and score its flat variable set against the projected
// ground truth. Metrics are averaged per dataset, then across repeats.
// Repeats are independent; the result is identical for every jobs value.
inline ExperimentResult run_experiment(const BayesNet& net, const ExperimentConfig& config) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.config = config;
    if (config.repeats == 0) throw DataError("experiment needs at least one repeat");
    if (config.jobs == 0) throw DataError("experiment needs at least one worker");
    for (const auto& l : config.latents) res.resolved_latents.push_back(resolve_alias(net, l));
    res.resolved_target = resolve_alias(net, config.target);
    for (const auto& l : res.resolved_latents)
        if (l == res.resolved_target) throw DataError("target cannot be hidden: " + l);

    auto mag = latent_project(net, {res.resolved_latents.begin(), res.resolved_latents.end()});
    res.truth = true_mag_mb(mag, res.resolved_target).flat();

    auto run_one = [&](std::size_t rep) {
        RepeatOutcome out;
        out.seed = config.seed + rep;
        try {
            auto data = forward_sample(net, config.sample_size, out.seed);
            auto obs = hide_latents(
                data, {res.resolved_latents.begin(), res.resolved_latents.end()});
            SllContext ctx(obs);
            out.predicted = smmb(ctx, res.resolved_target).flat();
            out.metrics = score_mb(out.predicted, res.truth);
        } catch (const CapabilityError& e) {
            out.error = e.what();
        }
        return out;
    };

    res.repeats.resize(config.repeats);
    if (config.jobs <= 1) {
        for (std::size_t rep = 0; rep < config.repeats; ++rep) res.repeats[rep] = run_one(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        auto worker = [&] {
            for (std::size_t rep = next++; rep < config.repeats; rep = next++) {
                try {
                    res.repeats[rep] = run_one(rep);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(config.jobs, config.repeats); ++w)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    double psum = 0, rsum = 0, fsum = 0;
    std::size_t ok = 0;
    for (const auto& out : res.repeats)
        if (out.metrics) {
            psum += out.metrics->precision;
            rsum += out.metrics->recall;
            fsum += out.metrics->f1;
            ++ok;
        }
    if (ok > 0) {
        res.mean_precision = psum / static_cast<double>(ok);
        res.mean_recall = rsum / static_cast<double>(ok);
        res.mean_f1 = fsum / static_cast<double>(ok);
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace aclp
