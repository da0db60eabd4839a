#include "rsf/volume.hpp"

#include <atomic>
#include <cmath>

#include <omp.h>

namespace rsf {

namespace {
std::atomic<int> g_workers{0};
}

void set_worker_count(int n) { g_workers.store(n < 0 ? 0 : n); }
int worker_count() { return g_workers.load(); }

namespace detail {
int effective_workers() {
    const int w = g_workers.load();
    if (w > 0) return w;
    return omp_get_max_threads();
}
}  // namespace detail

std::pair<float, float> Volume::min_max() const {
    float lo = data.empty() ? 0.0f : data[0];
    float hi = lo;
    for (float v : data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

void check_same_dims(const Volume& a, const Volume& b, const char* what) {
    if (!(a.dims == b.dims))
        throw shape_error(std::string(what) + ": dims mismatch " + to_string(a.dims) +
                          " vs " + to_string(b.dims));
}

bool all_finite(const Volume& v) {
    for (float x : v.data)
        if (!std::isfinite(x)) return false;
    return true;
}

Volume replicate_z(const Volume& v) {
    if (v.dims.nz != 1) throw shape_error("replicate_z: expects nz == 1");
    Volume out(v.dims.nx, v.dims.ny, 2);
    out.spacing = v.spacing;
    out.value_range = v.value_range;
    const std::size_t n = v.voxels();
    std::copy(v.data.begin(), v.data.end(), out.data.begin());
    std::copy(v.data.begin(), v.data.end(), out.data.begin() + n);
    return out;
}

Volume take_slice_z(const Volume& v, int z) {
    if (z < 0 || z >= v.dims.nz) throw shape_error("take_slice_z: z out of range");
    Volume out(v.dims.nx, v.dims.ny, 1);
    out.spacing = v.spacing;
    out.value_range = v.value_range;
    const std::size_t n = out.voxels();
    const float* src = v.data.data() + n * static_cast<std::size_t>(z);
    std::copy(src, src + n, out.data.begin());
    return out;
}

}  // namespace rsf
