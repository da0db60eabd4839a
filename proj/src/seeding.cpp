#include "rsf/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rsf/ops.hpp"

namespace rsf {

void BlobParams::validate() const {
    if (!(sigma_b > 0.0)) throw param_error("BlobParams: sigma_b must be > 0");
    if (response_threshold < 0.0)
        throw param_error("BlobParams: response_threshold must be >= 0");
    if (resolved_nms_radius() < 1.0)
        throw param_error("BlobParams: nms_radius must be >= 1");
}

namespace {

inline int cl(int i, int n) { return std::clamp(i, 0, n - 1); }

Slice2D smooth_slice(const Slice2D& s, const Kernel1D& k) {
    Slice2D tmp(s.nx, s.ny), out(s.nx, s.ny);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) {
            double acc = 0.0;
            for (int j = -k.radius; j <= k.radius; ++j)
                acc += k.weights[j + k.radius] * s.at(cl(x + j, s.nx), y);
            tmp.at(x, y) = static_cast<float>(acc);
        }
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) {
            double acc = 0.0;
            for (int j = -k.radius; j <= k.radius; ++j)
                acc += k.weights[j + k.radius] * tmp.at(x, cl(y + j, s.ny));
            out.at(x, y) = static_cast<float>(acc);
        }
    return out;
}

Slice2D extract_slice(const Volume& v, int z) {
    Slice2D s(v.dims.nx, v.dims.ny);
    const std::size_t n = static_cast<std::size_t>(v.dims.nx) * v.dims.ny;
    std::copy(v.data.begin() + n * z, v.data.begin() + n * (z + 1), s.v.begin());
    return s;
}

}  // namespace

Slice2D hessian_det_slice(const Slice2D& slice, double sigma_b, Polarity polarity) {
    if (slice.nx < 5 || slice.ny < 5)
        throw shape_error("hessian_det_slice: slice must be at least 5x5");
    if (!(sigma_b > 0.0)) throw param_error("hessian_det_slice: sigma_b must be > 0");

    Slice2D in = slice;
    if (polarity == Polarity::dark_on_bright)
        for (float& v : in.v) v = -v;

    const Kernel1D k = gaussian_kernel(sigma_b);
    const Slice2D s = smooth_slice(in, k);

    const int nx = s.nx, ny = s.ny;
    const double norm = sigma_b * sigma_b * sigma_b * sigma_b;
    Slice2D out(nx, ny);
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            const int xm = cl(x - 1, nx), xp = cl(x + 1, nx);
            const int ym = cl(y - 1, ny), yp = cl(y + 1, ny);
            const double c = s.at(x, y);
            const double ixx = static_cast<double>(s.at(xm, y)) + s.at(xp, y) - 2.0 * c;
            const double iyy = static_cast<double>(s.at(x, ym)) + s.at(x, yp) - 2.0 * c;
            const double ixy = (static_cast<double>(s.at(xp, yp)) - s.at(xm, yp) -
                                s.at(xp, ym) + s.at(xm, ym)) /
                               4.0;
            out.at(x, y) = static_cast<float>(norm * (ixx * iyy - ixy * ixy));
        }
    return out;
}

SeedSet detect_seeds(const Volume& vol, const BlobParams& bp) {
    bp.validate();
    const int nx = vol.dims.nx, ny = vol.dims.ny, nz = vol.dims.nz;
    const double nms = bp.resolved_nms_radius();
    const double nms2 = nms * nms;

    SeedSet out;
    out.detection_scale = bp.sigma_b;
    out.response_threshold = bp.response_threshold;

    std::vector<std::vector<Seed>> per_slice(nz);
#pragma omp parallel for schedule(dynamic) num_threads(detail::effective_workers())
    for (int z = 0; z < nz; ++z) {
        const Slice2D resp = hessian_det_slice(extract_slice(vol, z), bp.sigma_b, bp.polarity);
        float max_resp = 0.0f;
        for (float v : resp.v) max_resp = std::max(max_resp, v);
        if (max_resp <= 0.0f) continue;
        const float cut = static_cast<float>(bp.response_threshold) * max_resp;

        std::vector<Seed> cands;
        for (int y = 1; y < ny - 1; ++y)
            for (int x = 1; x < nx - 1; ++x) {
                const float v = resp.at(x, y);
                if (v <= 0.0f || v < cut) continue;
                bool is_max = true;
                for (int dy = -1; dy <= 1 && is_max; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        if (resp.at(x + dx, y + dy) > v) {
                            is_max = false;
                            break;
                        }
                    }
                if (is_max) cands.push_back({x, y, z, v});
            }
        // Greedy suppression: strongest response first, (x,y) breaks ties.
        std::sort(cands.begin(), cands.end(), [](const Seed& a, const Seed& b) {
            if (a.response != b.response) return a.response > b.response;
            if (a.x != b.x) return a.x < b.x;
            return a.y < b.y;
        });
        std::vector<Seed> kept;
        for (const Seed& c : cands) {
            bool suppressed = false;
            for (const Seed& k : kept) {
                const double dx = c.x - k.x, dy = c.y - k.y;
                if (dx * dx + dy * dy < nms2) {
                    suppressed = true;
                    break;
                }
            }
            if (!suppressed) kept.push_back(c);
        }
        std::sort(kept.begin(), kept.end(), [](const Seed& a, const Seed& b) {
            if (a.y != b.y) return a.y < b.y;
            return a.x < b.x;
        });
        per_slice[z] = std::move(kept);
    }
    for (auto& s : per_slice)
        out.points.insert(out.points.end(), s.begin(), s.end());
    return out;
}

Volume fast_sweep_distance(Dims dims, const SeedSet& seeds) {
    if (seeds.points.empty())
        throw param_error("fast_sweep_distance: seed set is empty");
    const int nx = dims.nx, ny = dims.ny, nz = dims.nz;
    constexpr float kFar = std::numeric_limits<float>::max();
    Volume phi(dims, kFar);
    for (const Seed& s : seeds.points) {
        if (s.x < 0 || s.x >= nx || s.y < 0 || s.y >= ny || s.z < 0 || s.z >= nz)
            throw param_error("fast_sweep_distance: seed outside volume bounds");
        phi.at(s.x, s.y, s.z) = 0.0f;
    }

    // Godunov update for |grad phi| = 1, unit spacing.
    auto solve = [](double a1, double a2, double a3) {
        // a1 <= a2 <= a3 (may be +inf)
        double x = a1 + 1.0;
        if (x <= a2) return x;
        const double s2 = a1 + a2;
        x = 0.5 * (s2 + std::sqrt(2.0 - (a1 - a2) * (a1 - a2)));
        if (x <= a3) return x;
        const double s3 = a1 + a2 + a3;
        const double q = s3 * s3 - 3.0 * (a1 * a1 + a2 * a2 + a3 * a3 - 1.0);
        return (s3 + std::sqrt(std::max(q, 0.0))) / 3.0;
    };

    float* p = phi.data.data();
    const auto idx = [&](int x, int y, int z) {
        return (static_cast<std::size_t>(z) * ny + y) * nx + x;
    };

    double max_update = std::numeric_limits<double>::max();
    const double tol = 1e-3;
    int rounds = 0;
    while (max_update >= tol && rounds < 16) {
        max_update = 0.0;
        // 8 sweep orderings, fixed order for determinism.
        for (int dir = 0; dir < 8; ++dir) {
            const bool xf = dir & 1, yf = dir & 2, zf = dir & 4;
            for (int zi = 0; zi < nz; ++zi) {
                const int z = zf ? nz - 1 - zi : zi;
                for (int yi = 0; yi < ny; ++yi) {
                    const int y = yf ? ny - 1 - yi : yi;
                    for (int xi = 0; xi < nx; ++xi) {
                        const int x = xf ? nx - 1 - xi : xi;
                        const std::size_t i = idx(x, y, z);
                        const double cur = p[i];
                        if (cur == 0.0) continue;
                        double ax = kFar, ay = kFar, az = kFar;
                        if (x > 0) ax = p[i - 1];
                        if (x < nx - 1) ax = std::min(ax, static_cast<double>(p[i + 1]));
                        if (y > 0) ay = std::min(ay, static_cast<double>(p[i - nx]));
                        if (y < ny - 1) ay = std::min(ay, static_cast<double>(p[i + nx]));
                        const std::size_t plane = static_cast<std::size_t>(nx) * ny;
                        if (z > 0) az = std::min(az, static_cast<double>(p[i - plane]));
                        if (z < nz - 1) az = std::min(az, static_cast<double>(p[i + plane]));
                        double a1 = ax, a2 = ay, a3 = az;
                        if (a1 > a2) std::swap(a1, a2);
                        if (a2 > a3) std::swap(a2, a3);
                        if (a1 > a2) std::swap(a1, a2);
                        if (a1 >= kFar) continue;  // no informed neighbor yet
                        const double cand = solve(a1, a2, a3);
                        if (cand < cur) {
                            p[i] = static_cast<float>(cand);
                            max_update = std::max(max_update, cur - cand);
                        }
                    }
                }
            }
        }
        ++rounds;
    }
    return phi;
}

std::pair<Volume, SeedSet> init_phi(const Volume& vol, const BlobParams& bp,
                                    double seed_radius) {
    if (seed_radius < 0.0) throw param_error("init_phi: seed_radius must be >= 0");
    SeedSet seeds = detect_seeds(vol, bp);
    if (seeds.points.empty())
        throw param_error(
            "init_phi: no seeds detected; lower response_threshold (or adjust sigma_b) and retry");
    Volume phi = fast_sweep_distance(vol.dims, seeds);
    if (seed_radius > 0.0) {
        const float r0 = static_cast<float>(seed_radius);
        for (float& v : phi.data) v -= r0;
    }
    phi.spacing = vol.spacing;
    return {std::move(phi), std::move(seeds)};
}

void write_seeds(const std::filesystem::path& path, const SeedSet& seeds) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot write seeds: " + path.string());
    out << "# detection_scale " << seeds.detection_scale << "\n";
    out << "# response_threshold " << seeds.response_threshold << "\n";
    for (const Seed& s : seeds.points)
        out << s.x << " " << s.y << " " << s.z << " " << s.response << "\n";
    if (!out) throw io_error("short write to seeds: " + path.string());
}

SeedSet read_seeds(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open seeds: " + path.string());
    SeedSet seeds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "detection_scale") ls >> seeds.detection_scale;
            if (key == "response_threshold") ls >> seeds.response_threshold;
            continue;
        }
        std::istringstream ls(line);
        Seed s;
        if (!(ls >> s.x >> s.y >> s.z >> s.response))
            throw io_error("garbled seed line in " + path.string() + ": " + line);
        seeds.points.push_back(s);
    }
    return seeds;
}

}  // namespace rsf
