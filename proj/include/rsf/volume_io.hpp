#pragma once

#include <filesystem>

#include "rsf/volume.hpp"

namespace rsf {

// Volume container: a UTF-8 text header `name.vmh` plus a raw little-endian
// payload in x-fastest order. Header lines:
//   dims: nx ny nz
//   spacing: sx sy sz        (optional, defaults 1 1 1)
//   dtype: u8|u16|f32
//   data: <path relative to the header>
//   range: min max           (optional)
// Integer payloads are converted to float32 and rescaled to [0,255].
Volume read_volume(const std::filesystem::path& header);

// Writes `path` (.vmh) and a sibling .raw payload, dtype f32.
void write_volume(const std::filesystem::path& header, const Volume& v);

}  // namespace rsf
