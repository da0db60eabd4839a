#include "rsf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace rsf {

Kernel1D gaussian_kernel(double sigma) {
    if (sigma < 0.0 || !std::isfinite(sigma))
        throw param_error("gaussian_kernel: sigma must be >= 0, got " +
                          std::to_string(sigma));
    Kernel1D k;
    if (sigma == 0.0) {
        k.radius = 0;
        k.weights = {1.0};
        return k;
    }
    k.radius = static_cast<int>(std::ceil(3.0 * sigma));
    k.weights.resize(2 * k.radius + 1);
    double sum = 0.0;
    for (int i = -k.radius; i <= k.radius; ++i) {
        const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k.weights[i + k.radius] = w;
        sum += w;
    }
    for (double& w : k.weights) w /= sum;
    return k;
}

namespace {

void check_kernel(const Kernel1D& k) {
    if (k.radius < 0 || k.weights.size() != static_cast<std::size_t>(2 * k.radius + 1))
        throw param_error("convolve_separable: malformed kernel");
}

// Per-position taps for one axis with clamp-to-edge folding: taps that clamp
// onto the same index are merged, so short axes cost O(extent) per voxel
// instead of O(2r+1).
struct AxisTaps {
    // Positions < left.size() and >= n - right.size() use the folded lists;
    // everything in between uses the full kernel starting at (pos - radius).
    std::vector<std::vector<std::pair<int, double>>> left;   // for pos = 0..lb-1
    std::vector<std::vector<std::pair<int, double>>> right;  // for pos = n-rb..n-1
};

std::vector<std::pair<int, double>> folded_taps(const Kernel1D& k, int pos, int n) {
    std::vector<std::pair<int, double>> taps;
    for (int j = -k.radius; j <= k.radius; ++j) {
        const int idx = std::clamp(pos + j, 0, n - 1);
        const double w = k.weights[j + k.radius];
        if (!taps.empty() && taps.back().first == idx)
            taps.back().second += w;
        else
            taps.emplace_back(idx, w);
    }
    return taps;
}

AxisTaps build_axis_taps(const Kernel1D& k, int n) {
    AxisTaps t;
    const int lb = std::min(k.radius, n);
    const int rb = std::min(k.radius, n - lb);
    t.left.reserve(lb);
    for (int p = 0; p < lb; ++p) t.left.push_back(folded_taps(k, p, n));
    t.right.reserve(rb);
    for (int p = n - rb; p < n; ++p) t.right.push_back(folded_taps(k, p, n));
    return t;
}

// Pass along x: src lines are contiguous. SrcT is float (first pass) or
// double (later passes); accumulation is always double.
template <typename SrcT>
void pass_x(const SrcT* src, double* dst, const Dims& d, const Kernel1D& k,
            const AxisTaps& taps) {
    const int nx = d.nx;
    const long lines = static_cast<long>(d.ny) * d.nz;
    const int r = k.radius;
    const double* w = k.weights.data();
    const int lb = static_cast<int>(taps.left.size());
    const int rb = static_cast<int>(taps.right.size());
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long line = 0; line < lines; ++line) {
        const SrcT* s = src + line * nx;
        double* o = dst + line * nx;
        for (int x = 0; x < lb; ++x) {
            double acc = 0.0;
            for (const auto& [idx, ww] : taps.left[x]) acc += ww * static_cast<double>(s[idx]);
            o[x] = acc;
        }
        for (int x = lb; x < nx - rb; ++x) {
            double acc = 0.0;
            const SrcT* sp = s + (x - r);
            for (int j = 0; j < 2 * r + 1; ++j) acc += w[j] * static_cast<double>(sp[j]);
            o[x] = acc;
        }
        for (int x = std::max(nx - rb, lb); x < nx; ++x) {
            double acc = 0.0;
            for (const auto& [idx, ww] : taps.right[x - (nx - rb)])
                acc += ww * static_cast<double>(s[idx]);
            o[x] = acc;
        }
    }
}

// Pass along y or z: accumulate rows (x stays the unit-stride inner loop).
// plane_stride selects the axis: nx for y, nx*ny for z.
template <typename DstT>
void pass_rows(const double* src, DstT* dst, const Dims& d, const Kernel1D& k,
               const AxisTaps& taps, bool along_z) {
    const int nx = d.nx;
    const int ny = d.ny;
    const int nz = d.nz;
    const int n = along_z ? nz : ny;
    const long row_stride = nx;
    const int r = k.radius;
    const int lb = static_cast<int>(taps.left.size());
    const int rb = static_cast<int>(taps.right.size());
#pragma omp parallel for collapse(2) schedule(static) num_threads(detail::effective_workers())
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            const int pos = along_z ? z : y;
            DstT* o = dst + (static_cast<long>(z) * ny + y) * row_stride;
            // Row at the clamped source position `q` along the filtered axis.
            auto row = [&](int q) {
                const long zz = along_z ? q : z;
                const long yy = along_z ? y : q;
                return src + (zz * ny + yy) * row_stride;
            };
            auto apply = [&](const std::vector<std::pair<int, double>>& taps_list) {
                const auto& [i0, w0] = taps_list[0];
                const double* s0 = row(i0);
                for (int x = 0; x < nx; ++x) o[x] = static_cast<DstT>(w0 * s0[x]);
                for (std::size_t t = 1; t < taps_list.size(); ++t) {
                    const double* s = row(taps_list[t].first);
                    const double w = taps_list[t].second;
                    for (int x = 0; x < nx; ++x)
                        o[x] = static_cast<DstT>(static_cast<double>(o[x]) + w * s[x]);
                }
            };
            if (pos < lb) {
                apply(taps.left[pos]);
            } else if (pos >= n - rb) {
                apply(taps.right[pos - (n - rb)]);
            } else {
                const double* w = k.weights.data();
                const double* s0 = row(pos - r);
                // Unfolded interior: all taps distinct, contiguous rows.
                for (int x = 0; x < nx; ++x) o[x] = static_cast<DstT>(w[0] * s0[x]);
                for (int j = 1; j < 2 * r + 1; ++j) {
                    const double* s = row(pos - r + j);
                    const double wj = w[j];
                    for (int x = 0; x < nx; ++x)
                        o[x] = static_cast<DstT>(static_cast<double>(o[x]) + wj * s[x]);
                }
            }
        }
    }
}

}  // namespace

namespace detail {

void convolve_into(const Volume& v, const Kernel1D& k, Volume& out,
                   std::vector<double>& t1, std::vector<double>& t2) {
    check_kernel(k);
    const std::size_t n = v.voxels();
    out.dims = v.dims;
    out.spacing = v.spacing;
    out.data.resize(n);
    if (k.radius == 0) {
        std::copy(v.data.begin(), v.data.end(), out.data.begin());
        return;
    }
    t1.resize(n);
    t2.resize(n);
    const AxisTaps tx = build_axis_taps(k, v.dims.nx);
    const AxisTaps ty = build_axis_taps(k, v.dims.ny);
    const AxisTaps tz = build_axis_taps(k, v.dims.nz);
    pass_x(v.data.data(), t1.data(), v.dims, k, tx);
    pass_rows<double>(t1.data(), t2.data(), v.dims, k, ty, /*along_z=*/false);
    // Final pass rounds to f32 once.
    std::vector<float>& of = out.data;
    pass_rows<float>(t2.data(), of.data(), v.dims, k, tz, /*along_z=*/true);
}

}  // namespace detail

Volume convolve_separable(const Volume& v, const Kernel1D& k) {
    Volume out;
    std::vector<double> t1, t2;
    detail::convolve_into(v, k, out, t1, t2);
    out.value_range.reset();
    return out;
}

VectorField gradient(const Volume& phi) {
    const Dims d = phi.dims;
    if (d.nx < 2 || d.ny < 2 || d.nz < 2)
        throw shape_error("gradient: every axis needs extent >= 2, got " + to_string(d));
    VectorField g(d);
    const float* p = phi.data.data();
    const long nx = d.nx, ny = d.ny, nz = d.nz;
#pragma omp parallel for collapse(2) schedule(static) num_threads(detail::effective_workers())
    for (long z = 0; z < nz; ++z) {
        for (long y = 0; y < ny; ++y) {
            const long zm = std::max(z - 1, 0L), zp = std::min(z + 1, nz - 1);
            const long ym = std::max(y - 1, 0L), yp = std::min(y + 1, ny - 1);
            const double invz = 1.0 / static_cast<double>(zp - zm);
            const double invy = 1.0 / static_cast<double>(yp - ym);
            const std::size_t row = static_cast<std::size_t>((z * ny + y) * nx);
            const float* ry_m = p + (z * ny + ym) * nx;
            const float* ry_p = p + (z * ny + yp) * nx;
            const float* rz_m = p + (zm * ny + y) * nx;
            const float* rz_p = p + (zp * ny + y) * nx;
            const float* r0 = p + row;
            float* ogx = g.gx.data() + row;
            float* ogy = g.gy.data() + row;
            float* ogz = g.gz.data() + row;
            for (long x = 0; x < nx; ++x) {
                const long xm = std::max(x - 1, 0L), xp = std::min(x + 1, nx - 1);
                const double invx = 1.0 / static_cast<double>(xp - xm);
                ogx[x] = static_cast<float>((static_cast<double>(r0[xp]) - r0[xm]) * invx);
                ogy[x] = static_cast<float>((static_cast<double>(ry_p[x]) - ry_m[x]) * invy);
                ogz[x] = static_cast<float>((static_cast<double>(rz_p[x]) - rz_m[x]) * invz);
            }
        }
    }
    return g;
}

Volume gradient_magnitude(const VectorField& g) {
    Volume out(g.dims);
    const std::size_t n = g.dims.voxels();
    const float* gx = g.gx.data();
    const float* gy = g.gy.data();
    const float* gz = g.gz.data();
    float* o = out.data.data();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const double a = gx[i], b = gy[i], c = gz[i];
        o[i] = static_cast<float>(std::sqrt(a * a + b * b + c * c));
    }
    return out;
}

Volume laplacian(const Volume& phi) {
    const Dims d = phi.dims;
    Volume out(d);
    const float* p = phi.data.data();
    float* o = out.data.data();
    const long nx = d.nx, ny = d.ny, nz = d.nz;
#pragma omp parallel for collapse(2) schedule(static) num_threads(detail::effective_workers())
    for (long z = 0; z < nz; ++z) {
        for (long y = 0; y < ny; ++y) {
            const long zm = std::max(z - 1, 0L), zp = std::min(z + 1, nz - 1);
            const long ym = std::max(y - 1, 0L), yp = std::min(y + 1, ny - 1);
            const float* ry_m = p + (z * ny + ym) * nx;
            const float* ry_p = p + (z * ny + yp) * nx;
            const float* rz_m = p + (zm * ny + y) * nx;
            const float* rz_p = p + (zp * ny + y) * nx;
            const float* r0 = p + (z * ny + y) * nx;
            float* orow = o + (z * ny + y) * nx;
            for (long x = 0; x < nx; ++x) {
                const long xm = std::max(x - 1, 0L), xp = std::min(x + 1, nx - 1);
                const double c = r0[x];
                const double v = (static_cast<double>(r0[xm]) + r0[xp] - 2.0 * c) +
                                 (static_cast<double>(ry_m[x]) + ry_p[x] - 2.0 * c) +
                                 (static_cast<double>(rz_m[x]) + rz_p[x] - 2.0 * c);
                orow[x] = static_cast<float>(v);
            }
        }
    }
    return out;
}

namespace detail {

Volume divergence(const VectorField& f) {
    const Dims d = f.dims;
    if (d.nx < 2 || d.ny < 2 || d.nz < 2)
        throw shape_error("divergence: every axis needs extent >= 2, got " + to_string(d));
    Volume out(d);
    const float* fx = f.gx.data();
    const float* fy = f.gy.data();
    const float* fz = f.gz.data();
    float* o = out.data.data();
    const long nx = d.nx, ny = d.ny, nz = d.nz;
#pragma omp parallel for collapse(2) schedule(static) num_threads(detail::effective_workers())
    for (long z = 0; z < nz; ++z) {
        for (long y = 0; y < ny; ++y) {
            const long zm = std::max(z - 1, 0L), zp = std::min(z + 1, nz - 1);
            const long ym = std::max(y - 1, 0L), yp = std::min(y + 1, ny - 1);
            const double invz = 1.0 / static_cast<double>(zp - zm);
            const double invy = 1.0 / static_cast<double>(yp - ym);
            const std::size_t row = static_cast<std::size_t>((z * ny + y) * nx);
            const float* fy_m = fy + (z * ny + ym) * nx;
            const float* fy_p = fy + (z * ny + yp) * nx;
            const float* fz_m = fz + (zm * ny + y) * nx;
            const float* fz_p = fz + (zp * ny + y) * nx;
            const float* fx_r = fx + row;
            float* orow = o + row;
            for (long x = 0; x < nx; ++x) {
                const long xm = std::max(x - 1, 0L), xp = std::min(x + 1, nx - 1);
                const double invx = 1.0 / static_cast<double>(xp - xm);
                const double v = (static_cast<double>(fx_r[xp]) - fx_r[xm]) * invx +
                                 (static_cast<double>(fy_p[x]) - fy_m[x]) * invy +
                                 (static_cast<double>(fz_p[x]) - fz_m[x]) * invz;
                orow[x] = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace detail

Volume div_normalized_gradient(const Volume& phi, double grad_floor) {
    if (!(grad_floor > 0.0))
        throw param_error("div_normalized_gradient: grad_floor must be > 0");
    VectorField g = gradient(phi);
    const std::size_t n = g.dims.voxels();
    float* gx = g.gx.data();
    float* gy = g.gy.data();
    float* gz = g.gz.data();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const double a = gx[i], b = gy[i], c = gz[i];
        const double m = std::max(std::sqrt(a * a + b * b + c * c), grad_floor);
        gx[i] = static_cast<float>(a / m);
        gy[i] = static_cast<float>(b / m);
        gz[i] = static_cast<float>(c / m);
    }
    return detail::divergence(g);
}

}  // namespace rsf
