#include "rsf/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "raw payloads are little-endian; big-endian hosts unsupported");

namespace rsf {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Volume read_volume(const std::filesystem::path& header) {
    std::ifstream in(header);
    if (!in) throw io_error("cannot open volume header: " + header.string());

    Dims dims{0, 0, 0};
    Spacing spacing;
    std::string dtype, data_rel;
    std::optional<std::pair<float, float>> range;
    bool have_dims = false, have_dtype = false, have_data = false;

    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw io_error("garbled header line in " + header.string() + ": " + line);
        const std::string key = trim(line.substr(0, colon));
        const std::string val = trim(line.substr(colon + 1));
        std::istringstream vs(val);
        if (key == "dims") {
            if (!(vs >> dims.nx >> dims.ny >> dims.nz) || dims.nx <= 0 || dims.ny <= 0 ||
                dims.nz <= 0)
                throw io_error("bad dims in " + header.string() + ": " + val);
            have_dims = true;
        } else if (key == "spacing") {
            if (!(vs >> spacing.sx >> spacing.sy >> spacing.sz))
                throw io_error("bad spacing in " + header.string() + ": " + val);
        } else if (key == "dtype") {
            dtype = val;
            have_dtype = true;
        } else if (key == "data") {
            data_rel = val;
            have_data = true;
        } else if (key == "range") {
            float lo, hi;
            if (!(vs >> lo >> hi))
                throw io_error("bad range in " + header.string() + ": " + val);
            range = {lo, hi};
        } else {
            throw io_error("unknown header key '" + key + "' in " + header.string());
        }
    }
    if (!have_dims || !have_dtype || !have_data)
        throw io_error("header missing dims/dtype/data: " + header.string());

    std::size_t elem_size;
    if (dtype == "u8")
        elem_size = 1;
    else if (dtype == "u16")
        elem_size = 2;
    else if (dtype == "f32")
        elem_size = 4;
    else
        throw io_error("unsupported dtype '" + dtype + "' in " + header.string());

    const std::filesystem::path raw_path = header.parent_path() / data_rel;
    std::ifstream raw(raw_path, std::ios::binary);
    if (!raw) throw io_error("cannot open payload: " + raw_path.string());
    raw.seekg(0, std::ios::end);
    const std::size_t bytes = static_cast<std::size_t>(raw.tellg());
    raw.seekg(0);
    const std::size_t expected = dims.voxels() * elem_size;
    if (bytes != expected)
        throw io_error("payload size mismatch for " + header.string() + ": header implies " +
                       std::to_string(expected) + " bytes, file has " + std::to_string(bytes));

    Volume v(dims);
    v.spacing = spacing;
    if (dtype == "f32") {
        raw.read(reinterpret_cast<char*>(v.data.data()), static_cast<std::streamsize>(bytes));
    } else {
        std::vector<unsigned char> buf(bytes);
        raw.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
        if (dtype == "u8") {
            for (std::size_t i = 0; i < v.data.size(); ++i)
                v.data[i] = static_cast<float>(buf[i]);
        } else {  // u16, rescaled onto [0,255]
            constexpr float scale = 255.0f / 65535.0f;
            for (std::size_t i = 0; i < v.data.size(); ++i) {
                const unsigned lo = buf[2 * i], hi = buf[2 * i + 1];
                v.data[i] = static_cast<float>(lo | (hi << 8)) * scale;
            }
        }
    }
    if (!raw) throw io_error("short read from payload: " + raw_path.string());

    v.value_range = range ? range : std::optional(v.min_max());
    return v;
}

void write_volume(const std::filesystem::path& header, const Volume& v) {
    if (v.voxels() == 0 || v.data.size() != v.voxels())
        throw shape_error("write_volume: data length does not match dims");
    std::filesystem::path raw_path = header;
    raw_path.replace_extension(".raw");

    std::ofstream raw(raw_path, std::ios::binary | std::ios::trunc);
    if (!raw) throw io_error("cannot write payload: " + raw_path.string());
    raw.write(reinterpret_cast<const char*>(v.data.data()),
              static_cast<std::streamsize>(v.data.size() * sizeof(float)));
    if (!raw) throw io_error("short write to payload: " + raw_path.string());
    raw.close();

    const auto [lo, hi] = v.value_range ? *v.value_range : v.min_max();
    std::ofstream out(header, std::ios::trunc);
    if (!out) throw io_error("cannot write header: " + header.string());
    out << "dims: " << v.dims.nx << " " << v.dims.ny << " " << v.dims.nz << "\n";
    out << "spacing: " << v.spacing.sx << " " << v.spacing.sy << " " << v.spacing.sz << "\n";
    out << "dtype: f32\n";
    out << "data: " << raw_path.filename().string() << "\n";
    out << "range: " << lo << " " << hi << "\n";
    if (!out) throw io_error("short write to header: " + header.string());
}

}  // namespace rsf
