#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rsf {

// Invalid parameter values (negative sigma, zero dt, bad config keys, ...).
class param_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Incompatible or degenerate grid shapes (dim mismatch, axis too short).
class shape_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File format / filesystem failures.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Level set became non-finite during evolution.
class blowup_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t voxels() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    bool operator==(const Dims&) const = default;
};

inline std::string to_string(const Dims& d) {
    return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

// Worker (thread) count used by the OpenMP kernel maps. 0 means the
// OpenMP default. Results are independent of this setting by construction:
// every kernel writes each output voxel exactly once from read-only inputs.
void set_worker_count(int n);
int worker_count();

namespace detail {
// Value handed to num_threads(); always >= 1.
int effective_workers();
}  // namespace detail

}  // namespace rsf
