#include "rsf/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "rsf/volume_io.hpp"

namespace rsf {

TileLayout plan_tiles(Dims dims, Dims tile_size, double sigma1, double sigma2) {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
        throw shape_error("plan_tiles: bad volume dims " + to_string(dims));
    if (tile_size.nx <= 0 || tile_size.ny <= 0 || tile_size.nz <= 0)
        throw param_error("plan_tiles: tile_size must be positive");
    if (sigma1 < 0.0 || sigma2 < 0.0) throw param_error("plan_tiles: sigma must be >= 0");

    const int curtain = static_cast<int>(std::ceil(3.0 * std::max(sigma1, sigma2)));
    const int axes[3] = {tile_size.nx, tile_size.ny, tile_size.nz};
    for (int t : axes)
        if (t < 2 * curtain)
            throw param_error("plan_tiles: tile_size " + to_string(tile_size) +
                              " too small for curtain " + std::to_string(curtain) +
                              " (needs >= 2*curtain per axis)");

    TileLayout layout;
    layout.vol_dims = dims;
    layout.tile_size = tile_size;
    layout.curtain = curtain;

    const int ntx = (dims.nx + tile_size.nx - 1) / tile_size.nx;
    const int nty = (dims.ny + tile_size.ny - 1) / tile_size.ny;
    const int ntz = (dims.nz + tile_size.nz - 1) / tile_size.nz;
    for (int iz = 0; iz < ntz; ++iz)
        for (int iy = 0; iy < nty; ++iy)
            for (int ix = 0; ix < ntx; ++ix) {
                TileBox t;
                t.ix = ix;
                t.iy = iy;
                t.iz = iz;
                t.core_origin = {ix * tile_size.nx, iy * tile_size.ny, iz * tile_size.nz};
                t.core_extent = {std::min(tile_size.nx, dims.nx - t.core_origin.nx),
                                 std::min(tile_size.ny, dims.ny - t.core_origin.ny),
                                 std::min(tile_size.nz, dims.nz - t.core_origin.nz)};
                const int px0 = std::max(t.core_origin.nx - curtain, 0);
                const int py0 = std::max(t.core_origin.ny - curtain, 0);
                const int pz0 = std::max(t.core_origin.nz - curtain, 0);
                const int px1 = std::min(t.core_origin.nx + t.core_extent.nx + curtain, dims.nx);
                const int py1 = std::min(t.core_origin.ny + t.core_extent.ny + curtain, dims.ny);
                const int pz1 = std::min(t.core_origin.nz + t.core_extent.nz + curtain, dims.nz);
                t.pad_origin = {px0, py0, pz0};
                t.pad_extent = {px1 - px0, py1 - py0, pz1 - pz0};
                layout.tiles.push_back(t);
            }
    return layout;
}

Volume extract_tile(const Volume& vol, const TileBox& tile) {
    const Dims& o = tile.pad_origin;
    const Dims& e = tile.pad_extent;
    if (o.nx < 0 || o.ny < 0 || o.nz < 0 || o.nx + e.nx > vol.dims.nx ||
        o.ny + e.ny > vol.dims.ny || o.nz + e.nz > vol.dims.nz)
        throw shape_error("extract_tile: tile exceeds volume bounds");
    Volume out(e);
    out.spacing = vol.spacing;
    for (int z = 0; z < e.nz; ++z)
        for (int y = 0; y < e.ny; ++y) {
            const float* src = vol.data.data() + vol.index(o.nx, o.ny + y, o.nz + z);
            float* dst = out.data.data() + out.index(0, y, z);
            std::copy(src, src + e.nx, dst);
        }
    return out;
}

namespace {

// Per-axis blend weight of a tile at global coordinate x. Ramps rise across
// the 2*curtain overlap shared with each interior neighbor; at volume
// boundaries there is no neighbor and the weight stays 1. Never returns 0
// inside the padded extent.
inline double axis_weight(int x, int core0, int core1, int pad0, int pad1, int n, int curtain) {
    double w = 1.0;
    if (core0 > 0) {
        const double ramp = (x - pad0 + 0.5) / (2.0 * curtain);
        w = std::min(w, std::clamp(ramp, 0.0, 1.0));
    }
    if (core1 < n) {
        const double ramp = (pad1 - x - 0.5) / (2.0 * curtain);
        w = std::min(w, std::clamp(ramp, 0.0, 1.0));
    }
    return w;
}

}  // namespace

Volume merge_phi(const std::vector<Volume>& tile_phis, const TileLayout& layout,
                 MergeMode mode) {
    if (tile_phis.size() != layout.tiles.size())
        throw shape_error("merge_phi: got " + std::to_string(tile_phis.size()) +
                          " tiles for a layout of " + std::to_string(layout.tiles.size()));
    for (std::size_t i = 0; i < tile_phis.size(); ++i)
        if (!(tile_phis[i].dims == layout.tiles[i].pad_extent))
            throw shape_error("merge_phi: tile " + std::to_string(i) + " dims " +
                              to_string(tile_phis[i].dims) + " do not match layout extent " +
                              to_string(layout.tiles[i].pad_extent));

    const Dims d = layout.vol_dims;
    Volume out(d);
    std::vector<double> acc(d.voxels(), 0.0);
    std::vector<double> wsum(d.voxels(), 0.0);
    std::vector<uint8_t> count(d.voxels(), 0);

    const int curtain = std::max(layout.curtain, 1);
    for (std::size_t ti = 0; ti < layout.tiles.size(); ++ti) {
        const TileBox& t = layout.tiles[ti];
        const Volume& phi = tile_phis[ti];
        const int c1x = t.core_origin.nx + t.core_extent.nx;
        const int c1y = t.core_origin.ny + t.core_extent.ny;
        const int c1z = t.core_origin.nz + t.core_extent.nz;
        const int p1x = t.pad_origin.nx + t.pad_extent.nx;
        const int p1y = t.pad_origin.ny + t.pad_extent.ny;
        const int p1z = t.pad_origin.nz + t.pad_extent.nz;
        for (int z = t.pad_origin.nz; z < p1z; ++z) {
            const double wz =
                axis_weight(z, t.core_origin.nz, c1z, t.pad_origin.nz, p1z, d.nz, curtain);
            for (int y = t.pad_origin.ny; y < p1y; ++y) {
                const double wy =
                    axis_weight(y, t.core_origin.ny, c1y, t.pad_origin.ny, p1y, d.ny, curtain);
                for (int x = t.pad_origin.nx; x < p1x; ++x) {
                    const double wx =
                        axis_weight(x, t.core_origin.nx, c1x, t.pad_origin.nx, p1x, d.nx, curtain);
                    const double w = wx * wy * wz;
                    const std::size_t gi = out.index(x, y, z);
                    const double v =
                        phi.at(x - t.pad_origin.nx, y - t.pad_origin.ny, z - t.pad_origin.nz);
                    switch (mode) {
                        case MergeMode::linear:
                            acc[gi] += w * v;
                            wsum[gi] += w;
                            break;
                        case MergeMode::minimum:
                            acc[gi] = count[gi] ? std::min(acc[gi], v) : v;
                            break;
                        case MergeMode::maximum:
                            acc[gi] = count[gi] ? std::max(acc[gi], v) : v;
                            break;
                        case MergeMode::average:
                            acc[gi] += v;
                            wsum[gi] += 1.0;
                            break;
                    }
                    count[gi] = static_cast<uint8_t>(std::min<int>(count[gi] + 1, 255));
                }
            }
        }
    }

    // Exclusive regions copy the owner bit for bit; overlaps blend.
    for (std::size_t ti = 0; ti < layout.tiles.size(); ++ti) {
        const TileBox& t = layout.tiles[ti];
        const Volume& phi = tile_phis[ti];
        const int p1x = t.pad_origin.nx + t.pad_extent.nx;
        const int p1y = t.pad_origin.ny + t.pad_extent.ny;
        const int p1z = t.pad_origin.nz + t.pad_extent.nz;
        for (int z = t.pad_origin.nz; z < p1z; ++z)
            for (int y = t.pad_origin.ny; y < p1y; ++y)
                for (int x = t.pad_origin.nx; x < p1x; ++x) {
                    const std::size_t gi = out.index(x, y, z);
                    if (count[gi] == 1)
                        out.data[gi] =
                            phi.at(x - t.pad_origin.nx, y - t.pad_origin.ny, z - t.pad_origin.nz);
                }
    }
    for (std::size_t gi = 0; gi < d.voxels(); ++gi) {
        if (count[gi] == 0)
            throw shape_error("merge_phi: layout leaves voxels uncovered");
        if (count[gi] < 2) continue;
        switch (mode) {
            case MergeMode::linear:
            case MergeMode::average:
                out.data[gi] = static_cast<float>(acc[gi] / wsum[gi]);
                break;
            case MergeMode::minimum:
            case MergeMode::maximum:
                out.data[gi] = static_cast<float>(acc[gi]);
                break;
        }
    }
    return out;
}

std::string tile_file_name(const TileBox& t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "tile_z%02d_y%02d_x%02d.vmh", t.iz, t.iy, t.ix);
    return buf;
}

PipelineResult run_pipeline(const Volume& vol, const RsfParams& rsf_params,
                            const BlobParams& blob_params, const TileLayout& layout,
                            int workers, const PipelineOptions& opts) {
    rsf_params.validate();
    blob_params.validate();
    if (!(layout.vol_dims == vol.dims))
        throw shape_error("run_pipeline: layout dims " + to_string(layout.vol_dims) +
                          " do not match volume " + to_string(vol.dims));
    if (workers < 0) throw param_error("run_pipeline: workers must be >= 0");

    SeedSet global_seeds;
    if (opts.global_seeding) global_seeds = detect_seeds(vol, blob_params);

    const int n_tiles = static_cast<int>(layout.tiles.size());
    std::vector<Volume> tile_phis(layout.tiles.size());
    std::vector<std::string> warnings;
    std::mutex warn_mutex;

    const int team = std::max(workers == 0 ? 1 : workers, 1);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(team)
    for (int ti = 0; ti < n_tiles; ++ti) {
        try {
            const TileBox& t = layout.tiles[ti];
            Volume tile = extract_tile(vol, t);
            SeedSet seeds;
            if (opts.global_seeding) {
                seeds.detection_scale = global_seeds.detection_scale;
                seeds.response_threshold = global_seeds.response_threshold;
                for (const Seed& s : global_seeds.points) {
                    if (s.x >= t.pad_origin.nx && s.x < t.pad_origin.nx + t.pad_extent.nx &&
                        s.y >= t.pad_origin.ny && s.y < t.pad_origin.ny + t.pad_extent.ny &&
                        s.z >= t.pad_origin.nz && s.z < t.pad_origin.nz + t.pad_extent.nz)
                        seeds.points.push_back({s.x - t.pad_origin.nx, s.y - t.pad_origin.ny,
                                                s.z - t.pad_origin.nz, s.response});
                }
            } else {
                seeds = detect_seeds(tile, blob_params);
            }

            if (seeds.points.empty()) {
                const float far = static_cast<float>(std::max(layout.curtain, 1));
                tile_phis[ti] = Volume(t.pad_extent, far);
                std::lock_guard<std::mutex> lock(warn_mutex);
                warnings.push_back("tile " + tile_file_name(t) +
                                   ": no seeds found; contributing an empty-interior field");
            } else {
                Volume phi0 = fast_sweep_distance(tile.dims, seeds);
                if (opts.seed_radius > 0.0)
                    for (float& v : phi0.data) v -= static_cast<float>(opts.seed_radius);
                tile_phis[ti] = evolve(std::move(phi0), tile, rsf_params);
            }

            if (!opts.spill_dir.empty()) {
                const std::filesystem::path dir(opts.spill_dir);
                write_volume(dir / tile_file_name(t), tile_phis[ti]);
            }
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    if (!opts.spill_dir.empty())
        save_manifest(std::filesystem::path(opts.spill_dir) / "layout.manifest", layout);

    std::sort(warnings.begin(), warnings.end());
    PipelineResult res;
    res.phi = merge_phi(tile_phis, layout, opts.merge);
    res.phi.spacing = vol.spacing;
    res.mask = extract_mask(res.phi);
    res.warnings = std::move(warnings);
    return res;
}

void save_manifest(const std::filesystem::path& path, const TileLayout& layout) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot write manifest: " + path.string());
    out << "dims: " << layout.vol_dims.nx << " " << layout.vol_dims.ny << " "
        << layout.vol_dims.nz << "\n";
    out << "tile_size: " << layout.tile_size.nx << " " << layout.tile_size.ny << " "
        << layout.tile_size.nz << "\n";
    out << "curtain: " << layout.curtain << "\n";
    for (const TileBox& t : layout.tiles)
        out << "tile: " << t.ix << " " << t.iy << " " << t.iz << " " << t.core_origin.nx << " "
            << t.core_origin.ny << " " << t.core_origin.nz << " " << t.core_extent.nx << " "
            << t.core_extent.ny << " " << t.core_extent.nz << " " << t.pad_origin.nx << " "
            << t.pad_origin.ny << " " << t.pad_origin.nz << " " << t.pad_extent.nx << " "
            << t.pad_extent.ny << " " << t.pad_extent.nz << "\n";
    if (!out) throw io_error("short write to manifest: " + path.string());
}

TileLayout load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open manifest: " + path.string());
    TileLayout layout;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dims:")
            ls >> layout.vol_dims.nx >> layout.vol_dims.ny >> layout.vol_dims.nz;
        else if (key == "tile_size:")
            ls >> layout.tile_size.nx >> layout.tile_size.ny >> layout.tile_size.nz;
        else if (key == "curtain:")
            ls >> layout.curtain;
        else if (key == "tile:") {
            TileBox t;
            ls >> t.ix >> t.iy >> t.iz >> t.core_origin.nx >> t.core_origin.ny >>
                t.core_origin.nz >> t.core_extent.nx >> t.core_extent.ny >> t.core_extent.nz >>
                t.pad_origin.nx >> t.pad_origin.ny >> t.pad_origin.nz >> t.pad_extent.nx >>
                t.pad_extent.ny >> t.pad_extent.nz;
            layout.tiles.push_back(t);
        } else {
            throw io_error("unknown manifest key '" + key + "' in " + path.string());
        }
        if (!ls) throw io_error("garbled manifest line in " + path.string() + ": " + line);
    }
    if (layout.tiles.empty()) throw io_error("manifest has no tiles: " + path.string());
    return layout;
}

Volume merge_from_dir(const std::filesystem::path& dir, const TileLayout& layout,
                      MergeMode mode) {
    std::vector<Volume> tiles;
    tiles.reserve(layout.tiles.size());
    for (const TileBox& t : layout.tiles) tiles.push_back(read_volume(dir / tile_file_name(t)));
    return merge_phi(tiles, layout, mode);
}

}  // namespace rsf
