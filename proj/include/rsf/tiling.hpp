#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rsf/rsf.hpp"
#include "rsf/seeding.hpp"
#include "rsf/volume.hpp"

namespace rsf {

struct TileBox {
    int ix = 0, iy = 0, iz = 0;   // tile grid coordinates
    Dims core_origin, core_extent;  // disjoint cover of the volume
    Dims pad_origin, pad_extent;    // core + curtain, clipped to the volume
};

struct TileLayout {
    Dims vol_dims;
    Dims tile_size;
    int curtain = 0;
    std::vector<TileBox> tiles;
};

enum class MergeMode { linear, minimum, maximum, average };

// Core tiles of tile_size with curtain overlap ceil(3*max(sigma1, sigma2)).
// Requires tile_size >= 2*curtain along every axis.
TileLayout plan_tiles(Dims dims, Dims tile_size, double sigma1, double sigma2);

// Copy of the padded region of one tile.
Volume extract_tile(const Volume& vol, const TileBox& tile);

// Reassemble per-tile level sets. Core-exclusive voxels copy the owning
// tile; overlaps blend with per-axis linear ramps multiplied across axes and
// renormalized (or take min/max/mean under the alternative modes).
Volume merge_phi(const std::vector<Volume>& tile_phis, const TileLayout& layout,
                 MergeMode mode = MergeMode::linear);

struct PipelineOptions {
    bool global_seeding = false;  // seed the whole volume once, then scatter
    MergeMode merge = MergeMode::linear;
    BlobParams blob;
    double seed_radius = 2.0;
    std::string spill_dir;  // when set, per-tile phi is written here + manifest
};

struct PipelineResult {
    Volume phi;
    Volume mask;
    std::vector<std::string> warnings;
};

// Seeds, initializes and evolves every tile independently (workers pull
// tiles from a shared schedule), then merges. Output is independent of the
// worker count and of tile completion order. A tile with no seeds
// contributes a constant positive field at curtain scale plus a warning.
PipelineResult run_pipeline(const Volume& vol, const RsfParams& rsf_params,
                            const BlobParams& blob_params, const TileLayout& layout,
                            int workers, const PipelineOptions& opts = {});

std::string tile_file_name(const TileBox& t);
void save_manifest(const std::filesystem::path& path, const TileLayout& layout);
TileLayout load_manifest(const std::filesystem::path& path);

// Loads spilled tiles named per tile_file_name from dir and merges them.
Volume merge_from_dir(const std::filesystem::path& dir, const TileLayout& layout,
                      MergeMode mode = MergeMode::linear);

}  // namespace rsf
