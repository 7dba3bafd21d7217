#pragma once

#include <cstddef>
#include <set>
#include <string>

namespace aclp {

// Node-recovery counts for one predicted blanket against the ground truth:
// mnc correct, mni predicted, mnf missed.
struct MetricsReport {
    std::size_t mnc = 0;
    std::size_t mni = 0;
    std::size_t mnf = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const MetricsReport&) const = default;
};

inline MetricsReport score_mb(const std::set<std::string>& predicted,
                              const std::set<std::string>& truth) {
    MetricsReport r;
    for (const auto& v : predicted)
        if (truth.count(v)) ++r.mnc;
    r.mni = predicted.size();
    for (const auto& v : truth)
        if (!predicted.count(v)) ++r.mnf;
    r.precision = r.mni == 0 ? 0.0 : static_cast<double>(r.mnc) / static_cast<double>(r.mni);
    std::size_t actual = r.mnc + r.mnf;
    r.recall = actual == 0 ? 0.0 : static_cast<double>(r.mnc) / static_cast<double>(actual);
    r.f1 = (r.precision + r.recall) == 0.0
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

}  // namespace aclp
