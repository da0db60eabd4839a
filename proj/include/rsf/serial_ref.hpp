#pragma once

#include "rsf/volume.hpp"

// Plain single-threaded implementations of the grid kernels, written as
// straightforward loops. They stay in the library as the reference the
// parallel kernels are tested and benchmarked against.
namespace rsf::ref {

Volume convolve_separable(const Volume& v, const Kernel1D& k);
VectorField gradient(const Volume& phi);
Volume gradient_magnitude(const VectorField& g);
Volume laplacian(const Volume& phi);
Volume div_normalized_gradient(const Volume& phi, double grad_floor = 1e-8);

}  // namespace rsf::ref
