#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsf/seeding.hpp"
#include "rsf/volume.hpp"

namespace rsf {

// Set-overlap scores between binary volumes (values > 0.5 are foreground).
// Both empty counts as perfect agreement (1.0).
double dice(const Volume& a, const Volume& b);
double jaccard(const Volume& a, const Volume& b);

using Histogram256 = std::array<uint64_t, 256>;

struct OtsuResult {
    int threshold = 0;       // foreground is value > threshold (bright polarity)
    bool degenerate = false;  // all mass in a single class
};

// Threshold maximizing the between-class variance; exact integer
// comparisons, ties broken by the lowest threshold.
OtsuResult otsu_threshold(const Histogram256& histogram);

Histogram256 histogram_256(const float* values, std::size_t n);

// Per-z-slice Otsu baseline; each slice gets its own histogram and threshold.
Volume otsu_slice_segment(const Volume& vol, Polarity polarity = Polarity::bright_on_dark);

struct SamplePlan {
    uint64_t rng_seed = 0;
    int count = 0;
    Dims subvol;
    std::vector<Dims> origins;
};

// Uniformly random sub-volume origins (SplitMix64-seeded, reproducible).
SamplePlan sample_plan(Dims dims, int count, Dims subvol, uint64_t rng_seed);

struct SampleMetrics {
    int id = 0;
    double dice = 0.0;
    double jaccard = 0.0;
    bool both_empty = false;
};

struct MetricsReport {
    std::vector<SampleMetrics> samples;
    double dice_mean = 0.0, dice_median = 0.0, dice_std = 0.0;
    double jaccard_mean = 0.0, jaccard_median = 0.0, jaccard_std = 0.0;
};

MetricsReport evaluate(const Volume& pred, const Volume& gt, const SamplePlan& plan);

std::string metrics_table(const MetricsReport& report);
void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace rsf
