#pragma once

#include <string>
#include <vector>

#include "rsf/rsf.hpp"

namespace rsf {

struct ProfileRow {
    std::string kernel;
    double ms_per_iter = 0.0;
    double percent = 0.0;  // share of the profiled kernel suite
};

struct ProfileReport {
    std::vector<ProfileRow> rows;
    int iterations = 0;
    int warmup = 0;
    Dims dims;
    int workers = 0;
    double total_ms_per_iter = 0.0;
};

// Times every per-iteration kernel of the evolution, averaged over
// `iterations` steps after `warmup` unprofiled steps.
ProfileReport profile_evolution(const Volume& I, Volume phi0, const RsfParams& params,
                                int iterations = 10, int warmup = 2);

std::string profile_table(const ProfileReport& report);

}  // namespace rsf
