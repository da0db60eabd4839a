#include "rsf/validation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rsf/rng.hpp"

namespace rsf {

namespace {

struct OverlapCounts {
    uint64_t a = 0, b = 0, both = 0;
};

OverlapCounts count_overlap(const Volume& a, const Volume& b) {
    check_same_dims(a, b, "overlap metric");
    OverlapCounts c;
    const std::size_t n = a.voxels();
    uint64_t ca = 0, cb = 0, cab = 0;
#pragma omp parallel for schedule(static) reduction(+ : ca, cb, cab) \
    num_threads(detail::effective_workers())
    for (long i = 0; i < static_cast<long>(n); ++i) {
        const bool fa = a.data[i] > 0.5f;
        const bool fb = b.data[i] > 0.5f;
        ca += fa;
        cb += fb;
        cab += (fa && fb);
    }
    c.a = ca;
    c.b = cb;
    c.both = cab;
    return c;
}

}  // namespace

double dice(const Volume& a, const Volume& b) {
    const OverlapCounts c = count_overlap(a, b);
    if (c.a + c.b == 0) return 1.0;
    return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
}

double jaccard(const Volume& a, const Volume& b) {
    const OverlapCounts c = count_overlap(a, b);
    const uint64_t uni = c.a + c.b - c.both;
    if (uni == 0) return 1.0;
    return static_cast<double>(c.both) / static_cast<double>(uni);
}

namespace {

// Compare d1^2/b1 vs d2^2/b2 exactly: 128x64-bit products as 192-bit values.
int cmp_scores(unsigned __int128 d1sq, uint64_t b1, unsigned __int128 d2sq, uint64_t b2) {
    auto mul = [](unsigned __int128 a, uint64_t b, uint64_t out[3]) {
        const uint64_t lo = static_cast<uint64_t>(a);
        const uint64_t hi = static_cast<uint64_t>(a >> 64);
        const unsigned __int128 p0 = static_cast<unsigned __int128>(lo) * b;
        const unsigned __int128 p1 = static_cast<unsigned __int128>(hi) * b;
        out[0] = static_cast<uint64_t>(p0);
        const unsigned __int128 mid = (p0 >> 64) + static_cast<uint64_t>(p1);
        out[1] = static_cast<uint64_t>(mid);
        out[2] = static_cast<uint64_t>(p1 >> 64) + static_cast<uint64_t>(mid >> 64);
    };
    uint64_t l[3], r[3];
    mul(d1sq, b2, l);
    mul(d2sq, b1, r);
    for (int i = 2; i >= 0; --i) {
        if (l[i] != r[i]) return l[i] < r[i] ? -1 : 1;
    }
    return 0;
}

}  // namespace

OtsuResult otsu_threshold(const Histogram256& h) {
    uint64_t total = 0;
    for (uint64_t c : h) total += c;
    if (total == 0) throw param_error("otsu_threshold: empty histogram");
    if (total > (1ULL << 27))
        throw param_error("otsu_threshold: histogram holds too many samples for exact scoring");

    int lowest = 0, highest = 255;
    while (lowest < 255 && h[lowest] == 0) ++lowest;
    while (highest > 0 && h[highest] == 0) --highest;
    if (lowest == highest) return {lowest, true};

    // Between-class variance is proportional to d(t)^2 / (W(t) (N - W(t)))
    // with W the cumulative count and d(t) = M_total W(t) - N M(t), M the
    // cumulative first moment. Exact integer comparison picks the argmax;
    // scanning upward makes ties resolve to the lowest threshold.
    uint64_t m_total = 0;
    for (int i = 0; i < 256; ++i) m_total += h[i] * static_cast<uint64_t>(i);

    int best_t = -1;
    unsigned __int128 best_d2 = 0;
    uint64_t best_b = 1;
    uint64_t w = 0, m = 0;
    for (int t = 0; t < 256; ++t) {
        w += h[t];
        m += h[t] * static_cast<uint64_t>(t);
        if (w == 0 || w == total) continue;
        const __int128 d = static_cast<__int128>(m_total) * w - static_cast<__int128>(total) * m;
        const unsigned __int128 d2 =
            static_cast<unsigned __int128>(d < 0 ? -d : d) * static_cast<unsigned __int128>(d < 0 ? -d : d);
        const uint64_t b = w * (total - w);
        if (best_t < 0 || cmp_scores(d2, b, best_d2, best_b) > 0) {
            best_t = t;
            best_d2 = d2;
            best_b = b;
        }
    }
    return {best_t, false};
}

Histogram256 histogram_256(const float* values, std::size_t n) {
    Histogram256 h{};
    for (std::size_t i = 0; i < n; ++i) {
        const int bin = std::clamp(static_cast<int>(std::lround(values[i])), 0, 255);
        ++h[static_cast<std::size_t>(bin)];
    }
    return h;
}

Volume otsu_slice_segment(const Volume& vol, Polarity polarity) {
    Volume out(vol.dims);
    out.spacing = vol.spacing;
    const std::size_t plane = static_cast<std::size_t>(vol.dims.nx) * vol.dims.ny;
#pragma omp parallel for schedule(dynamic) num_threads(detail::effective_workers())
    for (int z = 0; z < vol.dims.nz; ++z) {
        const float* slice = vol.data.data() + plane * static_cast<std::size_t>(z);
        float* o = out.data.data() + plane * static_cast<std::size_t>(z);
        const OtsuResult r = otsu_threshold(histogram_256(slice, plane));
        if (r.degenerate) {
            std::fill(o, o + plane, 0.0f);
            continue;
        }
        const float t = static_cast<float>(r.threshold);
        if (polarity == Polarity::bright_on_dark) {
            for (std::size_t i = 0; i < plane; ++i) o[i] = slice[i] > t ? 1.0f : 0.0f;
        } else {
            for (std::size_t i = 0; i < plane; ++i) o[i] = slice[i] <= t ? 1.0f : 0.0f;
        }
    }
    return out;
}

SamplePlan sample_plan(Dims dims, int count, Dims subvol, uint64_t rng_seed) {
    if (count < 0) throw param_error("sample_plan: count must be >= 0");
    if (subvol.nx <= 0 || subvol.ny <= 0 || subvol.nz <= 0)
        throw param_error("sample_plan: subvol must be positive");
    if (subvol.nx > dims.nx || subvol.ny > dims.ny || subvol.nz > dims.nz)
        throw param_error("sample_plan: subvol " + to_string(subvol) +
                          " does not fit inside volume " + to_string(dims));
    SamplePlan plan;
    plan.rng_seed = rng_seed;
    plan.count = count;
    plan.subvol = subvol;
    SplitMix64 rng(rng_seed);
    const uint64_t rx = static_cast<uint64_t>(dims.nx - subvol.nx + 1);
    const uint64_t ry = static_cast<uint64_t>(dims.ny - subvol.ny + 1);
    const uint64_t rz = static_cast<uint64_t>(dims.nz - subvol.nz + 1);
    for (int i = 0; i < count; ++i) {
        Dims o;
        o.nx = static_cast<int>(rng.below(rx));
        o.ny = static_cast<int>(rng.below(ry));
        o.nz = static_cast<int>(rng.below(rz));
        plan.origins.push_back(o);
    }
    return plan;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 0) return 0.5 * (v[mid - 1] + v[mid]);
    return v[mid];
}

double std_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

MetricsReport evaluate(const Volume& pred, const Volume& gt, const SamplePlan& plan) {
    check_same_dims(pred, gt, "evaluate");
    MetricsReport report;
    for (int i = 0; i < plan.count; ++i) {
        const Dims& o = plan.origins[static_cast<std::size_t>(i)];
        if (o.nx + plan.subvol.nx > pred.dims.nx || o.ny + plan.subvol.ny > pred.dims.ny ||
            o.nz + plan.subvol.nz > pred.dims.nz)
            throw param_error("evaluate: plan origin exceeds volume bounds");
        uint64_t ca = 0, cb = 0, cab = 0;
        for (int z = 0; z < plan.subvol.nz; ++z)
            for (int y = 0; y < plan.subvol.ny; ++y) {
                const float* pa = pred.data.data() + pred.index(o.nx, o.ny + y, o.nz + z);
                const float* pb = gt.data.data() + gt.index(o.nx, o.ny + y, o.nz + z);
                for (int x = 0; x < plan.subvol.nx; ++x) {
                    const bool fa = pa[x] > 0.5f;
                    const bool fb = pb[x] > 0.5f;
                    ca += fa;
                    cb += fb;
                    cab += (fa && fb);
                }
            }
        SampleMetrics s;
        s.id = i;
        s.both_empty = (ca + cb == 0);
        s.dice = s.both_empty ? 1.0 : 2.0 * static_cast<double>(cab) / static_cast<double>(ca + cb);
        const uint64_t uni = ca + cb - cab;
        s.jaccard = (uni == 0) ? 1.0 : static_cast<double>(cab) / static_cast<double>(uni);
        report.samples.push_back(s);
    }
    std::vector<double> dv, jv;
    for (const auto& s : report.samples) {
        dv.push_back(s.dice);
        jv.push_back(s.jaccard);
    }
    if (!dv.empty()) {
        report.dice_mean = std::accumulate(dv.begin(), dv.end(), 0.0) / static_cast<double>(dv.size());
        report.jaccard_mean =
            std::accumulate(jv.begin(), jv.end(), 0.0) / static_cast<double>(jv.size());
        report.dice_median = median_of(dv);
        report.jaccard_median = median_of(jv);
        report.dice_std = std_of(dv, report.dice_mean);
        report.jaccard_std = std_of(jv, report.jaccard_mean);
    }
    return report;
}

std::string metrics_table(const MetricsReport& r) {
    std::ostringstream out;
    out << "sample      dice   jaccard  note\n";
    char buf[96];
    for (const auto& s : r.samples) {
        std::snprintf(buf, sizeof(buf), "%6d  %8.4f  %8.4f  %s\n", s.id, s.dice, s.jaccard,
                      s.both_empty ? "both-empty" : "");
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "  mean  %8.4f  %8.4f\n", r.dice_mean, r.jaccard_mean);
    out << buf;
    std::snprintf(buf, sizeof(buf), "median  %8.4f  %8.4f\n", r.dice_median, r.jaccard_median);
    out << buf;
    std::snprintf(buf, sizeof(buf), "   std  %8.4f  %8.4f\n", r.dice_std, r.jaccard_std);
    out << buf;
    return out.str();
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& r) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot write metrics csv: " + path.string());
    out << "sample_id,dice,jaccard\n";
    for (const auto& s : r.samples) out << s.id << "," << s.dice << "," << s.jaccard << "\n";
    if (!out) throw io_error("short write to metrics csv: " + path.string());
}

}  // namespace rsf
