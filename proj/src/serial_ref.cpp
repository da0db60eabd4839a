#include "rsf/serial_ref.hpp"

#include <algorithm>
#include <cmath>

namespace rsf::ref {

namespace {

inline int cl(int i, int n) { return std::clamp(i, 0, n - 1); }

// One clamped 1D pass along the given axis (0=x, 1=y, 2=z).
Volume pass(const Volume& v, const Kernel1D& k, int axis) {
    Volume out(v.dims);
    out.spacing = v.spacing;
    const int nx = v.dims.nx, ny = v.dims.ny, nz = v.dims.nz;
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                double acc = 0.0;
                for (int j = -k.radius; j <= k.radius; ++j) {
                    int xx = x, yy = y, zz = z;
                    if (axis == 0) xx = cl(x + j, nx);
                    if (axis == 1) yy = cl(y + j, ny);
                    if (axis == 2) zz = cl(z + j, nz);
                    acc += k.weights[j + k.radius] * static_cast<double>(v.at(xx, yy, zz));
                }
                out.at(x, y, z) = static_cast<float>(acc);
            }
    return out;
}

}  // namespace

Volume convolve_separable(const Volume& v, const Kernel1D& k) {
    if (k.radius == 0) return v;
    return pass(pass(pass(v, k, 0), k, 1), k, 2);
}

VectorField gradient(const Volume& phi) {
    const int nx = phi.dims.nx, ny = phi.dims.ny, nz = phi.dims.nz;
    if (nx < 2 || ny < 2 || nz < 2)
        throw shape_error("ref::gradient: every axis needs extent >= 2");
    VectorField g(phi.dims);
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const int xm = cl(x - 1, nx), xp = cl(x + 1, nx);
                const int ym = cl(y - 1, ny), yp = cl(y + 1, ny);
                const int zm = cl(z - 1, nz), zp = cl(z + 1, nz);
                const std::size_t i = phi.index(x, y, z);
                g.gx[i] = static_cast<float>(
                    (static_cast<double>(phi.at(xp, y, z)) - phi.at(xm, y, z)) / (xp - xm));
                g.gy[i] = static_cast<float>(
                    (static_cast<double>(phi.at(x, yp, z)) - phi.at(x, ym, z)) / (yp - ym));
                g.gz[i] = static_cast<float>(
                    (static_cast<double>(phi.at(x, y, zp)) - phi.at(x, y, zm)) / (zp - zm));
            }
    return g;
}

Volume gradient_magnitude(const VectorField& g) {
    Volume out(g.dims);
    for (std::size_t i = 0; i < g.dims.voxels(); ++i) {
        const double a = g.gx[i], b = g.gy[i], c = g.gz[i];
        out.data[i] = static_cast<float>(std::sqrt(a * a + b * b + c * c));
    }
    return out;
}

Volume laplacian(const Volume& phi) {
    const int nx = phi.dims.nx, ny = phi.dims.ny, nz = phi.dims.nz;
    Volume out(phi.dims);
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const double c = phi.at(x, y, z);
                double acc = 0.0;
                acc += static_cast<double>(phi.at(cl(x - 1, nx), y, z)) +
                       phi.at(cl(x + 1, nx), y, z) - 2.0 * c;
                acc += static_cast<double>(phi.at(x, cl(y - 1, ny), z)) +
                       phi.at(x, cl(y + 1, ny), z) - 2.0 * c;
                acc += static_cast<double>(phi.at(x, y, cl(z - 1, nz))) +
                       phi.at(x, y, cl(z + 1, nz)) - 2.0 * c;
                out.at(x, y, z) = static_cast<float>(acc);
            }
    return out;
}

Volume div_normalized_gradient(const Volume& phi, double grad_floor) {
    VectorField g = gradient(phi);
    VectorField n(g.dims);
    for (std::size_t i = 0; i < g.dims.voxels(); ++i) {
        const double a = g.gx[i], b = g.gy[i], c = g.gz[i];
        const double m = std::max(std::sqrt(a * a + b * b + c * c), grad_floor);
        n.gx[i] = static_cast<float>(a / m);
        n.gy[i] = static_cast<float>(b / m);
        n.gz[i] = static_cast<float>(c / m);
    }
    // Divergence by the same difference scheme as gradient(), per component.
    const int nx = phi.dims.nx, ny = phi.dims.ny, nz = phi.dims.nz;
    Volume out(phi.dims);
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const int xm = cl(x - 1, nx), xp = cl(x + 1, nx);
                const int ym = cl(y - 1, ny), yp = cl(y + 1, ny);
                const int zm = cl(z - 1, nz), zp = cl(z + 1, nz);
                const double dx = (static_cast<double>(n.gx[phi.index(xp, y, z)]) -
                                   n.gx[phi.index(xm, y, z)]) /
                                  (xp - xm);
                const double dy = (static_cast<double>(n.gy[phi.index(x, yp, z)]) -
                                   n.gy[phi.index(x, ym, z)]) /
                                  (yp - ym);
                const double dz = (static_cast<double>(n.gz[phi.index(x, y, zp)]) -
                                   n.gz[phi.index(x, y, zm)]) /
                                  (zp - zm);
                out.at(x, y, z) = static_cast<float>(dx + dy + dz);
            }
    return out;
}

}  // namespace rsf::ref
