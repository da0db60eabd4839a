#include "rsf/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace rsf {

MergeMode parse_merge_mode(const std::string& s) {
    if (s == "linear") return MergeMode::linear;
    if (s == "min") return MergeMode::minimum;
    if (s == "max") return MergeMode::maximum;
    if (s == "average") return MergeMode::average;
    throw param_error("unknown merge_mode '" + s + "' (linear|min|max|average)");
}

Polarity parse_polarity(const std::string& s) {
    if (s == "bright") return Polarity::bright_on_dark;
    if (s == "dark") return Polarity::dark_on_bright;
    throw param_error("unknown polarity '" + s + "' (bright|dark)");
}

Axis parse_axis(const std::string& s) {
    if (s == "none") return Axis::none;
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    if (s == "z") return Axis::z;
    throw param_error("unknown axis '" + s + "' (none|x|y|z)");
}

namespace {

std::string axis_name(Axis a) {
    switch (a) {
        case Axis::none: return "none";
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "none";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Key {
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& v, const char* key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw param_error(std::string("bad numeric value for ") + key + ": '" + v + "'");
    }
}

long long to_int(const std::string& v, const char* key) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw param_error(std::string("bad integer value for ") + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& v, const char* key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw param_error(std::string("bad boolean value for ") + key + ": '" + v + "'");
}

Dims to_dims(const std::string& v, const char* key) {
    std::istringstream s(v);
    Dims d;
    if (!(s >> d.nx >> d.ny >> d.nz))
        throw param_error(std::string("bad dims value for ") + key + ": '" + v + "'");
    std::string rest;
    if (s >> rest) throw param_error(std::string("bad dims value for ") + key + ": '" + v + "'");
    return d;
}

std::string dims_str(const Dims& d) {
    return std::to_string(d.nx) + " " + std::to_string(d.ny) + " " + std::to_string(d.nz);
}

#define STR_KEY(name, field)                                            \
    Key {                                                               \
        name, [](const RunConfig& c) { return c.field; },               \
            [](RunConfig& c, const std::string& v) { c.field = v; }     \
    }
#define DBL_KEY(name, field)                                                        \
    Key {                                                                           \
        name, [](const RunConfig& c) { return fmt_double(c.field); },               \
            [](RunConfig& c, const std::string& v) { c.field = to_double(v, name); } \
    }
#define INT_KEY(name, field, type)                                                          \
    Key {                                                                                    \
        name, [](const RunConfig& c) { return std::to_string(c.field); },                    \
            [](RunConfig& c, const std::string& v) { c.field = static_cast<type>(to_int(v, name)); } \
    }
#define BOOL_KEY(name, field)                                                      \
    Key {                                                                          \
        name, [](const RunConfig& c) { return c.field ? "1" : "0"; },              \
            [](RunConfig& c, const std::string& v) { c.field = to_bool(v, name); } \
    }
#define DIMS_KEY(name, field)                                                     \
    Key {                                                                         \
        name, [](const RunConfig& c) { return dims_str(c.field); },               \
            [](RunConfig& c, const std::string& v) { c.field = to_dims(v, name); } \
    }

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = {
        STR_KEY("profile", profile),
        STR_KEY("input", input),
        STR_KEY("output_phi", output_phi),
        STR_KEY("output_mask", output_mask),
        STR_KEY("seeds_in", seeds_in),
        STR_KEY("seeds_out", seeds_out),
        STR_KEY("manifest", manifest),
        STR_KEY("tile_dir", tile_dir),
        STR_KEY("spill_dir", spill_dir),
        STR_KEY("pred", pred),
        STR_KEY("gt", gt),
        STR_KEY("out_csv", out_csv),
        STR_KEY("out_table", out_table),
        STR_KEY("out_image", out_image),
        STR_KEY("out_gt", out_gt),
        STR_KEY("out_spec", out_spec),
        STR_KEY("out_profile", out_profile),
        DBL_KEY("sigma1", rsf.sigma1),
        DBL_KEY("sigma2", rsf.sigma2),
        DBL_KEY("alpha", rsf.alpha),
        DBL_KEY("beta", rsf.beta),
        DBL_KEY("epsilon", rsf.epsilon),
        DBL_KEY("dt", rsf.dt),
        INT_KEY("max_iters", rsf.max_iters, int),
        DBL_KEY("convergence_fraction", rsf.convergence_fraction),
        DBL_KEY("denom_floor", rsf.denom_floor),
        DBL_KEY("grad_floor", rsf.grad_floor),
        DBL_KEY("blob_sigma", blob.sigma_b),
        DBL_KEY("blob_threshold", blob.response_threshold),
        DBL_KEY("nms_radius", blob.nms_radius),
        Key{"polarity",
            [](const RunConfig& c) {
                return std::string(c.blob.polarity == Polarity::bright_on_dark ? "bright"
                                                                               : "dark");
            },
            [](RunConfig& c, const std::string& v) { c.blob.polarity = parse_polarity(v); }},
        DBL_KEY("seed_radius", seed_radius),
        BOOL_KEY("tiled", tiled),
        DIMS_KEY("tile_size", tile_size),
        BOOL_KEY("global_seeding", global_seeding),
        Key{"merge_mode", [](const RunConfig& c) { return c.merge_mode; },
            [](RunConfig& c, const std::string& v) {
                parse_merge_mode(v);  // validates
                c.merge_mode = v;
            }},
        INT_KEY("sample_count", sample_count, int),
        DIMS_KEY("subvol", subvol),
        INT_KEY("rng_seed", rng_seed, uint64_t),
        DIMS_KEY("phantom_dims", phantom.dims),
        INT_KEY("n_branches", phantom.n_branches, int),
        DBL_KEY("radius_min", phantom.radius_min),
        DBL_KEY("radius_max", phantom.radius_max),
        DBL_KEY("tortuosity", phantom.tortuosity),
        DBL_KEY("foreground", phantom.foreground),
        DBL_KEY("background", phantom.background),
        INT_KEY("phantom_seed", phantom.rng_seed, uint64_t),
        BOOL_KEY("tree_connected", phantom.tree_connected),
        DBL_KEY("axial_blur_sigma", phantom.axial_blur_sigma),
        DBL_KEY("noise_sigma", noise.gaussian_sigma),
        Key{"contrast_axis",
            [](const RunConfig& c) { return axis_name(c.noise.contrast_axis); },
            [](RunConfig& c, const std::string& v) { c.noise.contrast_axis = parse_axis(v); }},
        DBL_KEY("contrast_lo", noise.contrast_lo),
        DBL_KEY("contrast_hi", noise.contrast_hi),
        INT_KEY("workers", workers, int),
        BOOL_KEY("overwrite", overwrite),
        INT_KEY("profile_iters", profile_iters, int),
        INT_KEY("profile_warmup", profile_warmup, int),
        DIMS_KEY("profile_dims", profile_dims),
    };
    return keys;
}

#undef STR_KEY
#undef DBL_KEY
#undef INT_KEY
#undef BOOL_KEY
#undef DIMS_KEY

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_profile(RunConfig& cfg, const std::string& name) {
    if (name.empty()) return;
    if (name == "2d-paper") {
        cfg.rsf.sigma1 = 19.0;
        cfg.rsf.sigma2 = 9.0;
        cfg.rsf.beta = 3.5;
        cfg.rsf.alpha = 255.0 * 255.0 * 0.01;
        cfg.rsf.dt = 0.1;
    } else if (name == "3d-paper") {
        cfg.rsf.sigma1 = 5.0;
        cfg.rsf.sigma2 = 0.0;
        cfg.rsf.dt = 0.06;
        cfg.rsf.alpha = 255.0 * 255.0 * 0.0009;
        cfg.rsf.beta = 0.1;
    } else {
        throw param_error("unknown parameter profile '" + name + "' (2d-paper|3d-paper)");
    }
    cfg.profile = name;
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw param_error("config line " + std::to_string(lineno) +
                              " is not key = value: '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        bool found = false;
        for (const Key& k : key_table()) {
            if (key == k.name) {
                k.set(cfg, val);
                found = true;
                break;
            }
        }
        if (!found)
            throw param_error("unknown config key '" + key + "' on line " +
                              std::to_string(lineno));
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    for (const Key& k : key_table()) out << k.name << " = " << k.get(cfg) << "\n";
    return out.str();
}

}  // namespace rsf
