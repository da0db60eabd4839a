#include "rsf/rsf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace rsf {

void RsfParams::validate() const {
    if (sigma1 < 0.0) throw param_error("RsfParams: sigma1 must be >= 0");
    if (sigma2 < 0.0) throw param_error("RsfParams: sigma2 must be >= 0");
    if (!(epsilon > 0.0)) throw param_error("RsfParams: epsilon must be > 0");
    if (!(dt > 0.0)) throw param_error("RsfParams: dt must be > 0");
    if (max_iters < 1) throw param_error("RsfParams: max_iters must be >= 1");
    if (convergence_fraction < 0.0 || convergence_fraction >= 1.0)
        throw param_error("RsfParams: convergence_fraction must be in [0,1)");
    if (!(denom_floor > 0.0)) throw param_error("RsfParams: denom_floor must be > 0");
    if (!(grad_floor > 0.0)) throw param_error("RsfParams: grad_floor must be > 0");
}

double heaviside_eps(double u, double epsilon) {
    if (!(epsilon > 0.0)) throw param_error("heaviside_eps: epsilon must be > 0");
    return 0.5 * (1.0 + (2.0 / M_PI) * std::atan(u / epsilon));
}

double delta_eps(double u, double epsilon) {
    if (!(epsilon > 0.0)) throw param_error("delta_eps: epsilon must be > 0");
    return (1.0 / M_PI) * epsilon / (epsilon * epsilon + u * u);
}

namespace {

using clock_type = std::chrono::steady_clock;

struct StageTimer {
    KernelProfile* profile;
    int stage = -1;
    clock_type::time_point t0;

    explicit StageTimer(KernelProfile* p) : profile(p) {}
    void begin(int s) {
        if (!profile) return;
        stage = s;
        t0 = clock_type::now();
    }
    void end() {
        if (!profile || stage < 0) return;
        profile->seconds[stage] += std::chrono::duration<double>(clock_type::now() - t0).count();
        stage = -1;
    }
};

// Profiled kernel order; one entry per stage of a step.
enum Stage {
    kHmI = 0,
    kHpI,
    kKHmI,
    kKHpI,
    kKHm,
    kKHp,
    kDelta,
    kGrad,
    kGradMag,
    kLaplacian,
    kNormGrad,
    kRCombine,
    kEPlus,
    kEMinus,
};

// Step masks and masked image: Hm = 1 - H_eps(phi), HmI = Hm * I (and the
// + variants). Two outputs per kernel so the convolution stages have both
// the mask and the masked image available.
void stage_heaviside_image(const Volume& phi, const Volume& I, double epsilon, bool plus,
                           Volume& H, Volume& HI) {
    const std::size_t n = phi.voxels();
    H.dims = phi.dims;
    HI.dims = phi.dims;
    H.data.resize(n);
    HI.data.resize(n);
    const float* p = phi.data.data();
    const float* im = I.data.data();
    float* h = H.data.data();
    float* hi = HI.data.data();
    const double inv_eps = 1.0 / epsilon;
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        double v = 0.5 * (1.0 + (2.0 / M_PI) * std::atan(p[i] * inv_eps));
        if (!plus) v = 1.0 - v;
        h[i] = static_cast<float>(v);
        hi[i] = static_cast<float>(v * im[i]);
    }
}

void stage_delta(const Volume& phi, double epsilon, Volume& out) {
    const std::size_t n = phi.voxels();
    out.dims = phi.dims;
    out.data.resize(n);
    const float* p = phi.data.data();
    float* o = out.data.data();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const double u = p[i];
        o[i] = static_cast<float>((1.0 / M_PI) * epsilon / (epsilon * epsilon + u * u));
    }
}

// In-place normalization of the gradient field.
void stage_normalize(VectorField& g, double grad_floor) {
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
}

// kappa = div(n); the distance-keeping term lap - kappa is folded into the
// final combine, so this stage just produces the curvature field.
void stage_curvature(const VectorField& n, Volume& kappa) { kappa = detail::divergence(n); }

// r± then F± in one pass: r = clamp(KHI / max(KH, floor)); F = (KI2 - 2 r KI) + r².
void stage_force(const Volume& KHI, const Volume& KH, const Volume& KI, const Volume& KI2,
                 double denom_floor, float i_min, float i_max, Volume& F) {
    const std::size_t n = KH.voxels();
    F.dims = KH.dims;
    F.data.resize(n);
    float* f = F.data.data();
    const float* khi = KHI.data.data();
    const float* kh = KH.data.data();
    const float* ki = KI.data.data();
    const float* ki2 = KI2.data.data();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        double r = static_cast<double>(khi[i]) / std::max(static_cast<double>(kh[i]), denom_floor);
        r = std::clamp(r, static_cast<double>(i_min), static_cast<double>(i_max));
        // Grouping matters: with a radius-0 kernel KI==I and KI2==I², and
        // (KI2 - 2rKI) + r² then rounds exactly like (I - r)².
        f[i] = static_cast<float>((static_cast<double>(ki2[i]) - 2.0 * r * ki[i]) + r * r);
    }
}

// E = (lap - kappa) + delta (alpha kappa + beta (Fm - Fp)).
void stage_combine_energy(const EvolveWorkspace& ws, const RsfParams& p, Volume& E) {
    const std::size_t n = ws.lap.voxels();
    E.dims = ws.lap.dims;
    E.data.resize(n);
    const float* lap = ws.lap.data.data();
    const float* kap = ws.kappa.data.data();
    const float* del = ws.delta.data.data();
    const float* fp = ws.Fp.data.data();
    const float* fm = ws.Fm.data.data();
    float* e = E.data.data();
    const double alpha = p.alpha, beta = p.beta;
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const double force = static_cast<double>(fm[i]) - fp[i];
        e[i] = static_cast<float>((static_cast<double>(lap[i]) - kap[i]) +
                                  del[i] * (alpha * kap[i] + beta * force));
    }
}

// All per-iteration kernels in dependency order; fills ws with the stage
// outputs and E with the combined update field.
void compute_energy(const EvolutionState& st, const Volume& I, const RsfParams& p,
                    EvolveWorkspace& ws, Volume& E, KernelProfile* profile) {
    StageTimer t(profile);

    t.begin(kHmI);
    stage_heaviside_image(st.phi, I, p.epsilon, /*plus=*/false, ws.Hm, ws.HmI);
    t.end();
    t.begin(kHpI);
    stage_heaviside_image(st.phi, I, p.epsilon, /*plus=*/true, ws.Hp, ws.HpI);
    t.end();

    t.begin(kKHmI);
    detail::convolve_into(ws.HmI, st.k1, ws.HmI, ws.t1, ws.t2);
    t.end();
    t.begin(kKHpI);
    detail::convolve_into(ws.HpI, st.k1, ws.HpI, ws.t1, ws.t2);
    t.end();
    t.begin(kKHm);
    detail::convolve_into(ws.Hm, st.k1, ws.Hm, ws.t1, ws.t2);
    t.end();
    t.begin(kKHp);
    detail::convolve_into(ws.Hp, st.k1, ws.Hp, ws.t1, ws.t2);
    t.end();

    t.begin(kDelta);
    stage_delta(st.phi, p.epsilon, ws.delta);
    t.end();

    t.begin(kGrad);
    ws.grad = gradient(st.phi);
    t.end();
    t.begin(kGradMag);
    ws.gmag = gradient_magnitude(ws.grad);
    t.end();
    t.begin(kLaplacian);
    ws.lap = laplacian(st.phi);
    t.end();
    t.begin(kNormGrad);
    stage_normalize(ws.grad, p.grad_floor);
    t.end();
    t.begin(kRCombine);
    stage_curvature(ws.grad, ws.kappa);
    t.end();

    t.begin(kEPlus);
    stage_force(ws.HpI, ws.Hp, st.KI, st.KI2, p.denom_floor, st.i_min, st.i_max, ws.Fp);
    t.end();
    t.begin(kEMinus);
    stage_force(ws.HmI, ws.Hm, st.KI, st.KI2, p.denom_floor, st.i_min, st.i_max, ws.Fm);
    t.end();

    stage_combine_energy(ws, p, E);
}

}  // namespace

const std::array<const char*, KernelProfile::kCount>& KernelProfile::names() {
    static const std::array<const char*, kCount> n = {
        "H-I",  "H+I",       "K*H-I",       "K*H+I",     "K*H-", "K*H+", "delta",
        "grad", "grad-mag",  "laplacian",   "grad/|grad|", "R-combine", "E+",  "E-"};
    return n;
}

std::pair<Volume, Volume> region_intensities(const Volume& I, const Volume& phi, double sigma1,
                                             double epsilon, double denom_floor) {
    check_same_dims(I, phi, "region_intensities");
    if (!(epsilon > 0.0)) throw param_error("region_intensities: epsilon must be > 0");
    if (!(denom_floor > 0.0)) throw param_error("region_intensities: denom_floor must be > 0");
    const Kernel1D k = gaussian_kernel(sigma1);
    const auto [i_min, i_max] = I.min_max();

    Volume Hp, Hm, HpI, HmI;
    stage_heaviside_image(phi, I, epsilon, true, Hp, HpI);
    stage_heaviside_image(phi, I, epsilon, false, Hm, HmI);
    std::vector<double> t1, t2;
    detail::convolve_into(Hp, k, Hp, t1, t2);
    detail::convolve_into(Hm, k, Hm, t1, t2);
    detail::convolve_into(HpI, k, HpI, t1, t2);
    detail::convolve_into(HmI, k, HmI, t1, t2);

    auto divide = [&](Volume& num, const Volume& den) {
        const std::size_t n = num.voxels();
        float* a = num.data.data();
        const float* b = den.data.data();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
        for (long i = 0; i < static_cast<long>(n); ++i) {
            double r = static_cast<double>(a[i]) / std::max(static_cast<double>(b[i]), denom_floor);
            a[i] = static_cast<float>(
                std::clamp(r, static_cast<double>(i_min), static_cast<double>(i_max)));
        }
    };
    divide(HpI, Hp);
    divide(HmI, Hm);
    return {std::move(HpI), std::move(HmI)};
}

std::pair<Volume, Volume> directional_forces(const Volume& I, const Volume& r_plus,
                                             const Volume& r_minus, const Volume& KI,
                                             const Volume& KI2) {
    check_same_dims(I, r_plus, "directional_forces");
    check_same_dims(I, r_minus, "directional_forces");
    check_same_dims(I, KI, "directional_forces");
    check_same_dims(I, KI2, "directional_forces");
    const std::size_t n = I.voxels();
    Volume Fp(I.dims), Fm(I.dims);
    const float* rp = r_plus.data.data();
    const float* rm = r_minus.data.data();
    const float* ki = KI.data.data();
    const float* ki2 = KI2.data.data();
    float* fp = Fp.data.data();
    float* fm = Fm.data.data();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const double a = ki2[i], b = ki[i];
        const double p = rp[i], m = rm[i];
        fp[i] = static_cast<float>((a - 2.0 * p * b) + p * p);
        fm[i] = static_cast<float>((a - 2.0 * m * b) + m * m);
    }
    return {std::move(Fp), std::move(Fm)};
}

EvolutionState init_evolution(Volume phi0, const Volume& I, const RsfParams& p) {
    p.validate();
    check_same_dims(phi0, I, "init_evolution");
    EvolutionState st;
    st.phi = std::move(phi0);
    st.iteration = 0;
    st.k1 = gaussian_kernel(p.sigma1);
    st.k2 = gaussian_kernel(p.sigma2);
    std::tie(st.i_min, st.i_max) = I.min_max();

    Volume I2(I.dims);
    const std::size_t n = I.voxels();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = I.data[i];
        I2.data[i] = static_cast<float>(v * v);
    }
    std::vector<double> t1, t2;
    detail::convolve_into(I, st.k2, st.KI, t1, t2);
    detail::convolve_into(I2, st.k2, st.KI2, t1, t2);
    return st;
}

Volume energy(const EvolutionState& state, const Volume& I, const RsfParams& p) {
    p.validate();
    check_same_dims(state.phi, I, "energy");
    EvolveWorkspace ws;
    Volume E;
    compute_energy(state, I, p, ws, E, nullptr);
    return E;
}

double evolve_step(EvolutionState& state, const Volume& I, const RsfParams& p,
                   EvolveWorkspace& ws, KernelProfile* profile) {
    compute_energy(state, I, p, ws, ws.E, profile);

    const std::size_t n = state.phi.voxels();
    ws.phi_next.dims = state.phi.dims;
    ws.phi_next.data.resize(n);
    const float* phi = state.phi.data.data();
    const float* e = ws.E.data.data();
    float* out = ws.phi_next.data.data();
    const double dt = p.dt;
    long sign_changes = 0;
    long bad = std::numeric_limits<long>::max();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers()) \
    reduction(+ : sign_changes) reduction(min : bad)
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const double v = static_cast<double>(phi[i]) + dt * e[i];
        const float f = static_cast<float>(v);
        out[i] = f;
        if (!std::isfinite(f)) bad = std::min(bad, i);
        sign_changes += ((phi[i] < 0.0f) != (f < 0.0f)) ? 1 : 0;
    }
    if (bad != std::numeric_limits<long>::max()) {
        const auto c = state.phi.coords(static_cast<std::size_t>(bad));
        throw blowup_error("evolution produced a non-finite value at voxel (" +
                           std::to_string(c[0]) + "," + std::to_string(c[1]) + "," +
                           std::to_string(c[2]) + "), iteration " +
                           std::to_string(state.iteration + 1));
    }
    std::swap(state.phi.data, ws.phi_next.data);
    state.iteration += 1;
    if (profile) profile->iterations += 1;
    return static_cast<double>(sign_changes) / static_cast<double>(n);
}

Volume evolve(Volume phi0, const Volume& I, const RsfParams& p, StopCheck stop, int stop_every,
              KernelProfile* profile) {
    p.validate();
    check_same_dims(phi0, I, "evolve");
    if (phi0.dims.nz == 1) {
        Volume phi2 = replicate_z(phi0);
        const Volume I2 = replicate_z(I);
        StopCheck stop2;
        if (stop)
            stop2 = [&stop](const Volume& phi, int iter) {
                return stop(take_slice_z(phi, 0), iter);
            };
        return take_slice_z(evolve(std::move(phi2), I2, p, stop2, stop_every, profile), 0);
    }

    EvolutionState st = init_evolution(std::move(phi0), I, p);
    EvolveWorkspace ws;
    for (int it = 0; it < p.max_iters; ++it) {
        const double frac = evolve_step(st, I, p, ws, profile);
        if (p.convergence_fraction > 0.0 && frac < p.convergence_fraction) break;
        if (stop && stop_every > 0 && st.iteration % stop_every == 0 &&
            stop(st.phi, st.iteration))
            break;
    }
    return std::move(st.phi);
}

Volume extract_mask(const Volume& phi) {
    Volume mask(phi.dims);
    mask.spacing = phi.spacing;
    const std::size_t n = phi.voxels();
    const float* p = phi.data.data();
    float* m = mask.data.data();
#pragma omp parallel for schedule(static) num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) m[i] = p[i] < 0.0f ? 1.0f : 0.0f;
    mask.value_range = mask.min_max();
    return mask;
}

}  // namespace rsf
