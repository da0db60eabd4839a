#pragma once

#include "rsf/volume.hpp"

namespace rsf {

// Discrete Gaussian, radius = ceil(3*sigma), weights renormalized to sum 1.
// sigma == 0 gives the identity kernel (radius 0, weight [1]).
Kernel1D gaussian_kernel(double sigma);

// 3D filtering with the separable kernel k⊗k⊗k, clamp-to-edge borders.
// Radius-0 kernels return a bitwise copy of the input.
Volume convolve_separable(const Volume& v, const Kernel1D& k);

// Central differences in the interior, one-sided at the faces, voxel units.
// Every axis must have extent >= 2.
VectorField gradient(const Volume& phi);

Volume gradient_magnitude(const VectorField& g);

// 7-point stencil, clamp-to-edge at the boundary.
Volume laplacian(const Volume& phi);

// div(grad/|grad|) with |grad| floored at grad_floor; the mean-curvature
// term of the level set flow (equals 2/r on a sphere's distance field).
Volume div_normalized_gradient(const Volume& phi, double grad_floor = 1e-8);

namespace detail {

// Divergence of a vector field with the same stencil family as gradient().
Volume divergence(const VectorField& f);

// Out-of-place separable convolution using caller scratch (double buffers of
// v.voxels() size). Lets the evolution loop reuse its workspace.
void convolve_into(const Volume& v, const Kernel1D& k, Volume& out,
                   std::vector<double>& t1, std::vector<double>& t2);

}  // namespace detail

}  // namespace rsf
