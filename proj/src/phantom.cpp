#include "rsf/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsf/ops.hpp"
#include "rsf/rng.hpp"

namespace rsf {

void PhantomSpec::validate() const {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
        throw param_error("PhantomSpec: dims must be positive");
    if (n_branches < 0) throw param_error("PhantomSpec: n_branches must be >= 0");
    if (radius_min < 1.0 || radius_max < radius_min)
        throw param_error("PhantomSpec: need 1 <= radius_min <= radius_max");
    if (foreground == background)
        throw param_error("PhantomSpec: foreground and background must differ");
    if (tortuosity < 0.0) throw param_error("PhantomSpec: tortuosity must be >= 0");
    if (axial_blur_sigma < 0.0) throw param_error("PhantomSpec: axial_blur_sigma must be >= 0");
    const double margin = radius_max + 2.0;
    const int min_xy = std::min(dims.nx, dims.ny);
    if (2.0 * margin >= min_xy)
        throw param_error("PhantomSpec: radius_max too large for dims " + to_string(dims));
    if (dims.nz > 1 && 2.0 * margin >= dims.nz)
        throw param_error("PhantomSpec: radius_max too large for z extent");
}

void PerturbSpec::validate() const {
    if (gaussian_sigma < 0.0) throw param_error("PerturbSpec: gaussian_sigma must be >= 0");
    if (!(contrast_lo > 0.0) || contrast_hi < contrast_lo)
        throw param_error("PerturbSpec: need 0 < contrast_lo <= contrast_hi");
}

namespace {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

Vec3 normalized(Vec3 v) {
    const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    if (n < 1e-12) return {1, 0, 0};
    return {v.x / n, v.y / n, v.z / n};
}

struct PathSample {
    Vec3 p;
    double radius;
};

}  // namespace

PhantomResult generate_network(const PhantomSpec& spec) {
    spec.validate();
    const bool flat = spec.dims.nz == 1;
    const double margin = spec.radius_max + 2.0;
    SplitMix64 rng(spec.rng_seed);

    // Random-walk centerlines; branch k>0 can sprout from an earlier one.
    std::vector<std::vector<PathSample>> branches;
    std::vector<PathSample> all_samples;
    const double step = 0.5;
    const double lo_x = margin, hi_x = spec.dims.nx - 1 - margin;
    const double lo_y = margin, hi_y = spec.dims.ny - 1 - margin;
    const double lo_z = flat ? 0.0 : margin;
    const double hi_z = flat ? 0.0 : spec.dims.nz - 1 - margin;

    for (int b = 0; b < spec.n_branches; ++b) {
        Vec3 pos;
        if (spec.tree_connected && !all_samples.empty()) {
            pos = all_samples[rng.below(all_samples.size())].p;
        } else {
            pos = {rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y),
                   flat ? 0.0 : rng.uniform(lo_z, hi_z)};
        }
        Vec3 dir;
        if (flat) {
            const double a = rng.uniform(0.0, 2.0 * M_PI);
            dir = {std::cos(a), std::sin(a), 0.0};
        } else {
            dir = normalized({rng.normal(), rng.normal(), rng.normal()});
        }
        const double r0 = rng.uniform(spec.radius_min, spec.radius_max);
        const double r1 = rng.uniform(spec.radius_min, spec.radius_max);
        const double length =
            rng.uniform(0.4, 0.9) * std::max(spec.dims.nx, spec.dims.ny);
        const int n_steps = std::max(2, static_cast<int>(length / step));

        std::vector<PathSample> path;
        for (int s = 0; s < n_steps; ++s) {
            const double t = static_cast<double>(s) / (n_steps - 1);
            path.push_back({pos, r0 + t * (r1 - r0)});
            // Bounded-curvature jitter, then reflect off the safe box.
            Vec3 jitter{rng.normal(), rng.normal(), flat ? 0.0 : rng.normal()};
            dir = normalized({dir.x + spec.tortuosity * step * jitter.x,
                              dir.y + spec.tortuosity * step * jitter.y,
                              dir.z + spec.tortuosity * step * jitter.z});
            Vec3 next{pos.x + step * dir.x, pos.y + step * dir.y, pos.z + step * dir.z};
            if (next.x < lo_x || next.x > hi_x) dir.x = -dir.x;
            if (next.y < lo_y || next.y > hi_y) dir.y = -dir.y;
            if (!flat && (next.z < lo_z || next.z > hi_z)) dir.z = -dir.z;
            pos = {std::clamp(pos.x + step * dir.x, lo_x, hi_x),
                   std::clamp(pos.y + step * dir.y, lo_y, hi_y),
                   flat ? 0.0 : std::clamp(pos.z + step * dir.z, lo_z, hi_z)};
        }
        branches.push_back(path);
        all_samples.insert(all_samples.end(), path.begin(), path.end());
    }

    // Signed distance to the swept tubes (capsule union, sampled).
    Volume dist(spec.dims, std::numeric_limits<float>::max());
    for (const auto& path : branches) {
        for (const PathSample& s : path) {
            const int x0 = std::max(0, static_cast<int>(std::floor(s.p.x - s.radius - 1.5)));
            const int x1 = std::min(spec.dims.nx - 1,
                                    static_cast<int>(std::ceil(s.p.x + s.radius + 1.5)));
            const int y0 = std::max(0, static_cast<int>(std::floor(s.p.y - s.radius - 1.5)));
            const int y1 = std::min(spec.dims.ny - 1,
                                    static_cast<int>(std::ceil(s.p.y + s.radius + 1.5)));
            const int z0 = flat ? 0
                                : std::max(0, static_cast<int>(std::floor(s.p.z - s.radius - 1.5)));
            const int z1 = flat ? 0
                                : std::min(spec.dims.nz - 1,
                                           static_cast<int>(std::ceil(s.p.z + s.radius + 1.5)));
            for (int z = z0; z <= z1; ++z)
                for (int y = y0; y <= y1; ++y)
                    for (int x = x0; x <= x1; ++x) {
                        const double dx = x - s.p.x, dy = y - s.p.y, dz = z - s.p.z;
                        const float d = static_cast<float>(
                            std::sqrt(dx * dx + dy * dy + dz * dz) - s.radius);
                        float& cur = dist.at(x, y, z);
                        cur = std::min(cur, d);
                    }
        }
    }

    PhantomResult out;
    out.image = Volume(spec.dims);
    out.gt_mask = Volume(spec.dims);
    const float f = spec.foreground, b = spec.background;
    for (std::size_t i = 0; i < dist.data.size(); ++i) {
        const float d = dist.data[i];
        const float alpha = std::clamp(0.5f - d, 0.0f, 1.0f);  // 1-voxel edge ramp
        out.image.data[i] = b + (f - b) * alpha;
        out.gt_mask.data[i] = d < 0.0f ? 1.0f : 0.0f;
    }

    if (spec.axial_blur_sigma > 0.0 && !flat) {
        // z-only blur (separable pass via a degenerate x/y kernel is overkill
        // here; filter the z axis directly).
        const Kernel1D k = gaussian_kernel(spec.axial_blur_sigma);
        Volume blurred(spec.dims);
        for (int z = 0; z < spec.dims.nz; ++z)
            for (int y = 0; y < spec.dims.ny; ++y)
                for (int x = 0; x < spec.dims.nx; ++x) {
                    double acc = 0.0;
                    for (int j = -k.radius; j <= k.radius; ++j) {
                        const int zz = std::clamp(z + j, 0, spec.dims.nz - 1);
                        acc += k.weights[j + k.radius] * out.image.at(x, y, zz);
                    }
                    blurred.at(x, y, z) = static_cast<float>(acc);
                }
        out.image = std::move(blurred);
    }

    // Deduplicated integer centerline points.
    std::vector<CenterPoint> pts;
    CenterPoint last{-1, -1, -1};
    for (const auto& path : branches)
        for (const PathSample& s : path) {
            CenterPoint c{static_cast<int>(std::lround(s.p.x)),
                          static_cast<int>(std::lround(s.p.y)),
                          static_cast<int>(std::lround(s.p.z))};
            if (c.x == last.x && c.y == last.y && c.z == last.z) continue;
            pts.push_back(c);
            last = c;
        }
    out.centerlines = std::move(pts);
    out.image.value_range = out.image.min_max();
    out.gt_mask.value_range = out.gt_mask.min_max();
    return out;
}

Volume perturb(const Volume& image, const PerturbSpec& p, uint64_t rng_seed) {
    p.validate();
    SplitMix64 rng(rng_seed);
    Volume out(image.dims);
    out.spacing = image.spacing;
    const Dims d = image.dims;
    const auto ramp_at = [&](int i, int n) {
        if (n <= 1) return 0.5 * (p.contrast_lo + p.contrast_hi);
        return p.contrast_lo +
               (p.contrast_hi - p.contrast_lo) * static_cast<double>(i) / (n - 1);
    };
    std::size_t i = 0;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x, ++i) {
                double v = image.data[i];
                if (p.gaussian_sigma > 0.0) v += p.gaussian_sigma * rng.normal();
                double m = 1.0;
                switch (p.contrast_axis) {
                    case Axis::x: m = ramp_at(x, d.nx); break;
                    case Axis::y: m = ramp_at(y, d.ny); break;
                    case Axis::z: m = ramp_at(z, d.nz); break;
                    case Axis::none: break;
                }
                out.data[i] = static_cast<float>(std::clamp(v * m, 0.0, 255.0));
            }
    out.value_range = out.min_max();
    return out;
}

double snr(const Volume& image, const Volume& gt_mask) {
    check_same_dims(image, gt_mask, "snr");
    double sum_f = 0.0, sum_b = 0.0, sum_b2 = 0.0;
    uint64_t nf = 0, nb = 0;
    for (std::size_t i = 0; i < image.voxels(); ++i) {
        const double v = image.data[i];
        if (gt_mask.data[i] > 0.5f) {
            sum_f += v;
            ++nf;
        } else {
            sum_b += v;
            sum_b2 += v * v;
            ++nb;
        }
    }
    if (nf == 0 || nb == 0) return 0.0;
    const double mean_f = sum_f / static_cast<double>(nf);
    const double mean_b = sum_b / static_cast<double>(nb);
    const double diff = mean_f - mean_b;
    if (diff == 0.0) return 0.0;
    const double var_b = std::max(sum_b2 / static_cast<double>(nb) - mean_b * mean_b, 0.0);
    const double sd_b = std::sqrt(var_b);
    constexpr double kCap = 1e6;
    if (sd_b * kCap <= std::abs(diff)) return diff > 0 ? kCap : -kCap;
    return std::clamp(diff / sd_b, -kCap, kCap);
}

}  // namespace rsf
