#include "rsf/profiling.hpp"

#include <cstdio>
#include <sstream>

namespace rsf {

ProfileReport profile_evolution(const Volume& I, Volume phi0, const RsfParams& params,
                                int iterations, int warmup) {
    if (iterations < 1) throw param_error("profile_evolution: iterations must be >= 1");
    if (warmup < 0) throw param_error("profile_evolution: warmup must be >= 0");
    params.validate();

    Volume img = I;
    if (img.dims.nz == 1) {
        img = replicate_z(img);
        phi0 = replicate_z(phi0);
    }
    check_same_dims(img, phi0, "profile_evolution");

    RsfParams p = params;
    p.max_iters = warmup + iterations;
    p.convergence_fraction = 0.0;

    EvolutionState st = init_evolution(std::move(phi0), img, p);
    EvolveWorkspace ws;
    for (int i = 0; i < warmup; ++i) evolve_step(st, img, p, ws);
    KernelProfile prof;
    for (int i = 0; i < iterations; ++i) evolve_step(st, img, p, ws, &prof);

    ProfileReport report;
    report.iterations = iterations;
    report.warmup = warmup;
    report.dims = I.dims;
    report.workers = detail::effective_workers();
    double total = 0.0;
    for (double s : prof.seconds) total += s;
    for (int k = 0; k < KernelProfile::kCount; ++k) {
        ProfileRow row;
        row.kernel = KernelProfile::names()[k];
        row.ms_per_iter = 1e3 * prof.seconds[k] / iterations;
        row.percent = total > 0.0 ? 100.0 * prof.seconds[k] / total : 0.0;
        report.rows.push_back(row);
    }
    report.total_ms_per_iter = 1e3 * total / iterations;
    return report;
}

std::string profile_table(const ProfileReport& r) {
    std::ostringstream out;
    out << "volume " << to_string(r.dims) << ", " << r.iterations << " iterations ("
        << r.warmup << " warmup), " << r.workers << " workers\n";
    out << "kernel            ms/iter   percent\n";
    char buf[96];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof(buf), "%-14s  %9.3f  %7.2f%%\n", row.kernel.c_str(),
                      row.ms_per_iter, row.percent);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-14s  %9.3f\n", "total", r.total_ms_per_iter);
    out << buf;
    return out.str();
}

}  // namespace rsf
