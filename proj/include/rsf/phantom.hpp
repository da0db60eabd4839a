#pragma once

#include <cstdint>
#include <vector>

#include "rsf/volume.hpp"

namespace rsf {

enum class Axis { none, x, y, z };

// Synthetic vascular network: random smooth tubes with bounded curvature,
// swept-ball rasterization, 1-voxel anti-aliased edges.
struct PhantomSpec {
    Dims dims{256, 256, 1};
    int n_branches = 10;
    double radius_min = 2.0;
    double radius_max = 4.0;
    double tortuosity = 0.25;  // per-step direction jitter (radians-ish scale)
    float foreground = 200.0f;
    float background = 50.0f;
    uint64_t rng_seed = 1;
    bool tree_connected = true;  // branch k>0 sprouts from an earlier centerline
    double axial_blur_sigma = 0.0;  // optional z-blur of the composited image

    void validate() const;
};

struct CenterPoint {
    int x = 0, y = 0, z = 0;
};

struct PhantomResult {
    Volume image;
    Volume gt_mask;  // exact rasterized mask (1 inside)
    std::vector<CenterPoint> centerlines;
};

PhantomResult generate_network(const PhantomSpec& spec);

// Gaussian noise then a linear lo->hi intensity ramp along one axis,
// clamped to [0,255].
struct PerturbSpec {
    double gaussian_sigma = 0.0;
    Axis contrast_axis = Axis::none;
    double contrast_lo = 1.0;
    double contrast_hi = 1.0;

    void validate() const;
};

Volume perturb(const Volume& image, const PerturbSpec& p, uint64_t rng_seed);

// (mean foreground - mean background) / std of background, capped at 1e6.
double snr(const Volume& image, const Volume& gt_mask);

}  // namespace rsf
