#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rsf/core.hpp"

namespace rsf {

struct Spacing {
    float sx = 1.0f;
    float sy = 1.0f;
    float sz = 1.0f;
    bool operator==(const Spacing&) const = default;
};

// Dense 3D scalar grid, 32-bit float, x varies fastest:
//   index(x,y,z) = x + nx*(y + ny*z)
// Spacing is metadata only; all stencils work in voxel units.
struct Volume {
    Dims dims;
    Spacing spacing;
    std::vector<float> data;
    // (min,max) of the source data, recorded at load time or by callers.
    std::optional<std::pair<float, float>> value_range;

    Volume() = default;
    Volume(int nx, int ny, int nz, float fill = 0.0f)
        : dims{nx, ny, nz}, data(dims.voxels(), fill) {}
    explicit Volume(Dims d, float fill = 0.0f) : dims(d), data(d.voxels(), fill) {}

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims.nx) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(z));
    }
    std::array<int, 3> coords(std::size_t i) const {
        const auto nx = static_cast<std::size_t>(dims.nx);
        const auto ny = static_cast<std::size_t>(dims.ny);
        return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny),
                static_cast<int>(i / (nx * ny))};
    }

    float at(int x, int y, int z) const { return data[index(x, y, z)]; }
    float& at(int x, int y, int z) { return data[index(x, y, z)]; }

    std::size_t voxels() const { return dims.voxels(); }

    std::pair<float, float> min_max() const;
};

// Three-component field on the same grid as Volume (e.g. a gradient).
struct VectorField {
    Dims dims;
    std::vector<float> gx, gy, gz;

    VectorField() = default;
    explicit VectorField(Dims d)
        : dims(d), gx(d.voxels(), 0.0f), gy(d.voxels(), 0.0f), gz(d.voxels(), 0.0f) {}
};

// Symmetric normalized 1D kernel; 3D filtering is the tensor product k⊗k⊗k.
struct Kernel1D {
    int radius = 0;
    std::vector<double> weights;  // length 2*radius+1, sums to 1
};

void check_same_dims(const Volume& a, const Volume& b, const char* what);
bool all_finite(const Volume& v);

// Single-slice volumes (nz == 1) duplicated to two identical slices so the
// 3D stencils apply; the slices stay identical under every kernel here, so
// slice 0 of any result equals the flat-in-z computation.
Volume replicate_z(const Volume& v);
Volume take_slice_z(const Volume& v, int z);

}  // namespace rsf
