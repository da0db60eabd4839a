#pragma once

#include <filesystem>
#include <string>

#include "rsf/phantom.hpp"
#include "rsf/rsf.hpp"
#include "rsf/seeding.hpp"
#include "rsf/tiling.hpp"

namespace rsf {

// One flat record of every tunable a run can carry; the CLI parses it from
// a key=value file, applies parameter-profile defaults and flag overrides,
// and echoes the effective result. Unknown keys are rejected.
struct RunConfig {
    std::string profile;  // "", "2d-paper" or "3d-paper"

    // paths
    std::string input, output_phi, output_mask;
    std::string seeds_in, seeds_out;
    std::string manifest, tile_dir, spill_dir;
    std::string pred, gt, out_csv, out_table;
    std::string out_image, out_gt, out_spec, out_profile;

    RsfParams rsf;
    BlobParams blob;
    double seed_radius = 2.0;

    bool tiled = false;
    Dims tile_size{500, 500, 500};
    bool global_seeding = false;
    std::string merge_mode = "linear";

    int sample_count = 13;
    Dims subvol{100, 100, 100};
    uint64_t rng_seed = 1;

    PhantomSpec phantom;
    PerturbSpec noise;

    int workers = 0;
    bool overwrite = false;
    int profile_iters = 10;
    int profile_warmup = 2;
    Dims profile_dims{64, 64, 64};
};

// Named parameter sets for the segmentation profiles shipped with the tool.
void apply_profile(RunConfig& cfg, const std::string& name);

// key = value lines; '#' comments; unknown keys raise param_error.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

// Full listing of every key; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& cfg);

MergeMode parse_merge_mode(const std::string& s);
Polarity parse_polarity(const std::string& s);
Axis parse_axis(const std::string& s);

}  // namespace rsf
