#pragma once

#include <array>
#include <functional>
#include <utility>

#include "rsf/ops.hpp"
#include "rsf/volume.hpp"

namespace rsf {

// All scalar knobs of the contour evolution.
struct RsfParams {
    double sigma1 = 5.0;   // region-intensity scale (voxels)
    double sigma2 = 0.0;   // force smoothing scale (voxels)
    double alpha = 58.5225;  // curvature smoothing weight
    double beta = 0.1;       // data force weight
    double epsilon = 1.0;    // smoothed step width (phi units)
    double dt = 0.06;        // explicit Euler step
    int max_iters = 100;
    double convergence_fraction = 0.0;  // 0 disables the early stop
    double denom_floor = 1e-8;          // region-average denominator floor
    double grad_floor = 1e-8;           // |grad phi| floor for normalization

    void validate() const;
};

// Smoothed step: 1/2 [1 + (2/pi) atan(u/eps)], strictly inside (0,1).
double heaviside_eps(double u, double epsilon);

// Its derivative: (1/pi) eps / (eps^2 + u^2).
double delta_eps(double u, double epsilon);

// Local mean intensity on each side of the contour:
//   r± = K*(H±(phi) I) / max(K*H±(phi), denom_floor)
// with H+ = heaviside_eps(phi), H- = 1 - H+, K Gaussian at sigma1.
// Results are clamped to [min I, max I] (the floored-denominator path would
// otherwise produce arbitrary magnitudes).
std::pair<Volume, Volume> region_intensities(const Volume& I, const Volume& phi,
                                             double sigma1, double epsilon,
                                             double denom_floor = 1e-8);

// Pointwise fitting-error fields via the two-convolution expansion:
//   F± = K*I² - 2 r± K*I + r±²
// KI and KI2 must be the sigma2-kernel convolutions of I and I².
// The evaluation groups as (KI2 - 2 r KI) + r² so that a radius-0 kernel
// reproduces (I - r±)² bit for bit on integer-valued images.
std::pair<Volume, Volume> directional_forces(const Volume& I, const Volume& r_plus,
                                             const Volume& r_minus, const Volume& KI,
                                             const Volume& KI2);

// Evolution state: the level set plus the convolutions of the static image
// that every iteration reuses.
struct EvolutionState {
    Volume phi;
    int iteration = 0;
    Volume KI;   // K_sigma2 * I
    Volume KI2;  // K_sigma2 * I^2
    Kernel1D k1, k2;
    float i_min = 0.0f, i_max = 0.0f;
};

// Wall time of each per-iteration kernel, matching the profiled kernel set.
struct KernelProfile {
    static constexpr int kCount = 14;
    static const std::array<const char*, kCount>& names();
    std::array<double, kCount> seconds{};
    long iterations = 0;
};

// Scratch buffers for the evolution loop; reusable across iterations.
struct EvolveWorkspace {
    Volume Hp, Hm, HpI, HmI;  // step masks and masked image (convolved in place)
    Volume delta, gmag, lap, kappa, Fp, Fm, E, phi_next;
    VectorField grad;
    std::vector<double> t1, t2;  // convolution pass scratch
};

EvolutionState init_evolution(Volume phi0, const Volume& I, const RsfParams& p);

// The update field E for the current state (no time step applied).
Volume energy(const EvolutionState& state, const Volume& I, const RsfParams& p);

// One explicit Euler step, double buffered: phi_{n+1} = phi_n + dt E(phi_n).
// Returns the fraction of voxels whose sign changed. Throws blowup_error if
// the update produces a non-finite value.
double evolve_step(EvolutionState& state, const Volume& I, const RsfParams& p,
                   EvolveWorkspace& ws, KernelProfile* profile = nullptr);

// Called between iterations; return true to stop early.
using StopCheck = std::function<bool(const Volume& phi, int iteration)>;

// Runs up to max_iters steps, stopping early when the sign-change fraction
// drops below convergence_fraction (disabled at 0) or the callback fires.
// Single-slice inputs (nz == 1) are evolved as a duplicated slice pair and
// returned as a single slice.
Volume evolve(Volume phi0, const Volume& I, const RsfParams& p, StopCheck stop = nullptr,
              int stop_every = 25, KernelProfile* profile = nullptr);

// Binary volume: 1 where phi < 0, else 0.
Volume extract_mask(const Volume& phi);

}  // namespace rsf
