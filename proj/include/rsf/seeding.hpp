#pragma once

#include <filesystem>
#include <vector>

#include "rsf/volume.hpp"

namespace rsf {

enum class Polarity { bright_on_dark, dark_on_bright };

struct BlobParams {
    double sigma_b = 3.0;             // detection scale (voxels)
    double response_threshold = 0.1;  // fraction of the slice's max response
    double nms_radius = 0.0;          // suppression radius; <= 0 means 2*sigma_b
    Polarity polarity = Polarity::bright_on_dark;

    double resolved_nms_radius() const { return nms_radius > 0.0 ? nms_radius : 2.0 * sigma_b; }
    void validate() const;
};

struct Seed {
    int x = 0, y = 0, z = 0;
    float response = 0.0f;
};

struct SeedSet {
    std::vector<Seed> points;
    double detection_scale = 0.0;
    double response_threshold = 0.0;
};

// One z-slice of scalar data, x fastest.
struct Slice2D {
    int nx = 0, ny = 0;
    std::vector<float> v;

    Slice2D() = default;
    Slice2D(int nx_, int ny_) : nx(nx_), ny(ny_), v(static_cast<std::size_t>(nx_) * ny_, 0.0f) {}
    float at(int x, int y) const { return v[static_cast<std::size_t>(y) * nx + x]; }
    float& at(int x, int y) { return v[static_cast<std::size_t>(y) * nx + x]; }
};

// Scale-normalized blob response sigma^4 (Ixx Iyy - Ixy^2), where the second
// derivatives are central differences of the sigma_b-smoothed slice. Dark
// polarity negates the slice first.
Slice2D hessian_det_slice(const Slice2D& slice, double sigma_b,
                          Polarity polarity = Polarity::bright_on_dark);

// Per-slice blob maxima above the threshold, non-maximum suppressed within
// nms_radius (highest response wins; ties go to the smallest (x,y)).
SeedSet detect_seeds(const Volume& vol, const BlobParams& bp);

// Unsigned distance to the seed set: Gauss-Seidel sweeps over all 8 axis
// orderings of |grad phi| = 1 with phi(seed) = 0.
Volume fast_sweep_distance(Dims dims, const SeedSet& seeds);

// phi0 = distance-to-seeds - r0: a small negative ball around each seed so
// the initial interior is nonempty. r0 = 0 keeps the raw distance field.
std::pair<Volume, SeedSet> init_phi(const Volume& vol, const BlobParams& bp,
                                    double seed_radius = 2.0);

// One "x y z response" line per seed; '#'-prefixed metadata lines.
void write_seeds(const std::filesystem::path& path, const SeedSet& seeds);
SeedSet read_seeds(const std::filesystem::path& path);

}  // namespace rsf
