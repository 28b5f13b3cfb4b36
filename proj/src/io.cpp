#include "tofcs/io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tofcs {

using nlohmann::json;

// ---- SHA-256 -------------------------------------------------------------

namespace {

struct Sha256 {
    std::array<std::uint32_t, 8> h = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                      0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    std::array<std::uint8_t, 64> block{};
    std::uint64_t total = 0;
    size_t fill = 0;

    static std::uint32_t rotr(std::uint32_t v, int n) { return (v >> n) | (v << (32 - n)); }

    void process(const std::uint8_t* p) {
        static constexpr std::uint32_t K[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto a = h;
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 = rotr(a[4], 6) ^ rotr(a[4], 11) ^ rotr(a[4], 25);
            const std::uint32_t ch = (a[4] & a[5]) ^ (~a[4] & a[6]);
            const std::uint32_t t1 = a[7] + s1 + ch + K[i] + w[i];
            const std::uint32_t s0 = rotr(a[0], 2) ^ rotr(a[0], 13) ^ rotr(a[0], 22);
            const std::uint32_t maj = (a[0] & a[1]) ^ (a[0] & a[2]) ^ (a[1] & a[2]);
            const std::uint32_t t2 = s0 + maj;
            a[7] = a[6];
            a[6] = a[5];
            a[5] = a[4];
            a[4] = a[3] + t1;
            a[3] = a[2];
            a[2] = a[1];
            a[1] = a[0];
            a[0] = t1 + t2;
        }
        for (int i = 0; i < 8; ++i) h[i] += a[i];
    }

    void update(const void* data, size_t len) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        total += len;
        while (len > 0) {
            const size_t take = std::min(len, block.size() - fill);
            std::memcpy(block.data() + fill, p, take);
            fill += take;
            p += take;
            len -= take;
            if (fill == block.size()) {
                process(block.data());
                fill = 0;
            }
        }
    }

    std::string finish() {
        const std::uint64_t bits = total * 8;
        const std::uint8_t one = 0x80;
        update(&one, 1);
        const std::uint8_t zero = 0;
        while (fill != 56) update(&zero, 1);
        std::uint8_t len_be[8];
        for (int i = 0; i < 8; ++i) len_be[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
        update(len_be, 8);
        char out[65];
        for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
        return std::string(out, 64);
    }
};

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& buf, size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<std::uint8_t>(buf[at + i])) << (8 * i);
    return v;
}

template <typename T>
void append_pod(std::string& buf, const T& v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

std::string sha256_hex(const void* data, size_t len) {
    Sha256 s;
    s.update(data, len);
    return s.finish();
}

std::string sha256_hex(const std::string& text) { return sha256_hex(text.data(), text.size()); }

std::string sha256_file(const std::string& path) {
    return sha256_hex(read_file(path));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::string& path, const void* data, size_t len) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp);
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed for " + path);
}

void atomic_write(const std::string& path, const std::string& contents) {
    atomic_write(path, contents.data(), contents.size());
}

// ---- JSON helpers ---------------------------------------------------------

json plan_to_json(const ModulationPlan& plan) {
    return json{{"f_mod_hz", plan.f_mod_hz},
                {"phase_shifts", plan.phase_shifts},
                {"duty_cycle", plan.duty_cycle}};
}

ModulationPlan plan_from_json(const json& j) {
    ModulationPlan plan;
    plan.f_mod_hz = j.at("f_mod_hz").get<double>();
    plan.duty_cycle = j.at("duty_cycle").get<double>();
    if (j.contains("phase_shifts")) {
        plan.phase_shifts = j.at("phase_shifts").get<std::vector<double>>();
    } else {
        const int n = j.value("n_phase_shifts", 20);
        plan = ModulationPlan::standard(n);
        plan.f_mod_hz = j.at("f_mod_hz").get<double>();
        plan.duty_cycle = j.at("duty_cycle").get<double>();
    }
    plan.validate();
    return plan;
}

json grid_to_json(const DepthGrid& grid) {
    return json{{"d_min_mm", grid.d_min_mm}, {"d_max_mm", grid.d_max_mm}, {"step_mm", grid.step_mm}};
}

DepthGrid grid_from_json(const json& j) {
    return DepthGrid(j.at("d_min_mm").get<double>(), j.at("d_max_mm").get<double>(),
                     j.at("step_mm").get<double>());
}

// ---- Sensing matrix container ----------------------------------------

namespace {
constexpr char kMatrixMagic[8] = {'T', 'O', 'F', 'C', 'S', 'M', 'A', 'T'};
constexpr std::uint32_t kMatrixVersion = 1;
}  // namespace

void save_sensing_matrix(const std::string& path, const SensingMatrix& A) {
    json meta{{"rows", A.rows()},
              {"cols", A.cols()},
              {"grid", grid_to_json(A.grid)},
              {"plan", plan_to_json(A.plan)},
              {"atom_model", to_string(A.atom_model)}};
    if (A.pixel) {
        const auto& intr = A.pixel->intrinsics;
        meta["pixel"] = {{"u", A.pixel->u},     {"v", A.pixel->v},   {"fx", intr.fx},
                         {"fy", intr.fy},       {"cx", intr.cx},     {"cy", intr.cy},
                         {"width", intr.width}, {"height", intr.height}};
    }
    const std::string meta_str = meta.dump();

    std::string buf;
    buf.reserve(16 + meta_str.size() + A.entries.size() * 16 + A.cols() * 8);
    buf.append(kMatrixMagic, 8);
    put_u32(buf, kMatrixVersion);
    put_u32(buf, static_cast<std::uint32_t>(meta_str.size()));
    buf += meta_str;
    for (int m = 0; m < A.rows(); ++m)
        for (int i = 0; i < A.cols(); ++i) {
            append_pod(buf, A.entries(m, i).real());
            append_pod(buf, A.entries(m, i).imag());
        }
    for (int i = 0; i < A.cols(); ++i) append_pod(buf, A.column_norms(i));
    atomic_write(path, buf);
}

SensingMatrix load_sensing_matrix(const std::string& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 16 || std::memcmp(buf.data(), kMatrixMagic, 8) != 0)
        throw std::runtime_error("load_sensing_matrix: bad magic in " + path);
    if (get_u32(buf, 8) != kMatrixVersion)
        throw std::runtime_error("load_sensing_matrix: unsupported version in " + path);
    const std::uint32_t meta_len = get_u32(buf, 12);
    if (buf.size() < 16 + meta_len)
        throw std::runtime_error("load_sensing_matrix: truncated metadata in " + path);
    const json meta = json::parse(buf.substr(16, meta_len));

    SensingMatrix A;
    const int rows = meta.at("rows").get<int>();
    const int cols = meta.at("cols").get<int>();
    A.grid = grid_from_json(meta.at("grid"));
    A.plan = plan_from_json(meta.at("plan"));
    A.atom_model = atom_model_from_string(meta.at("atom_model").get<std::string>());
    if (meta.contains("pixel")) {
        const auto& p = meta.at("pixel");
        PixelRef ref;
        ref.u = p.at("u").get<double>();
        ref.v = p.at("v").get<double>();
        ref.intrinsics.fx = p.at("fx").get<double>();
        ref.intrinsics.fy = p.at("fy").get<double>();
        ref.intrinsics.cx = p.at("cx").get<double>();
        ref.intrinsics.cy = p.at("cy").get<double>();
        ref.intrinsics.width = p.at("width").get<int>();
        ref.intrinsics.height = p.at("height").get<int>();
        A.pixel = ref;
    }

    const size_t need = 16 + meta_len + static_cast<size_t>(rows) * cols * 16 +
                        static_cast<size_t>(cols) * 8;
    if (buf.size() != need)
        throw std::runtime_error("load_sensing_matrix: size mismatch in " + path);

    A.entries.resize(rows, cols);
    size_t at = 16 + meta_len;
    auto take_f64 = [&]() {
        double v;
        std::memcpy(&v, buf.data() + at, 8);
        at += 8;
        return v;
    };
    for (int m = 0; m < rows; ++m)
        for (int i = 0; i < cols; ++i) {
            const double re = take_f64();
            const double im = take_f64();
            A.entries(m, i) = cplx(re, im);
        }
    A.column_norms.resize(cols);
    for (int i = 0; i < cols; ++i) A.column_norms(i) = take_f64();
    return A;
}

void write_matrix_csv(const std::string& path, const SensingMatrix& A) {
    std::string buf = "row,col,re,im\n";
    char line[128];
    for (int m = 0; m < A.rows(); ++m)
        for (int i = 0; i < A.cols(); ++i) {
            std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g\n", m, i,
                          A.entries(m, i).real(), A.entries(m, i).imag());
            buf += line;
        }
    atomic_write(path, buf);
}

// ---- Raw four-phase rasters --------------------------------------------

void save_raw_four_phase(const std::string& bin_path, const std::string& sidecar_path,
                         const RawFourPhase& raw, const std::string& config_hash) {
    const size_t n_px = static_cast<size_t>(raw.width) * raw.height;
    std::string buf;
    buf.reserve(raw.n_configs() * 8 * n_px * 4);
    for (int m = 0; m < raw.n_configs(); ++m) {
        for (int t = 0; t < 4; ++t)
            for (size_t i = 0; i < n_px; ++i)
                append_pod(buf, static_cast<float>(raw.taps[m][t][i]));
        for (int t = 0; t < 4; ++t)
            for (size_t i = 0; i < n_px; ++i)
                append_pod(buf, static_cast<float>(raw.darks[m][t][i]));
    }
    atomic_write(bin_path, buf);

    json sidecar{{"width", raw.width},
                 {"height", raw.height},
                 {"n_frames", raw.n_frames},
                 {"n_configs", raw.n_configs()},
                 {"subtracted", raw.subtracted},
                 {"plan", plan_to_json(raw.plan)},
                 {"layout", "float32le [config][I0 I90 I180 I270 D0 D90 D180 D270][row][col]"},
                 {"config_hash", config_hash}};
    atomic_write(sidecar_path, sidecar.dump(2) + "\n");
}

RawFourPhase load_raw_four_phase(const std::string& bin_path, const std::string& sidecar_path,
                                 std::string* config_hash) {
    const json sidecar = json::parse(read_file(sidecar_path));
    RawFourPhase raw;
    raw.width = sidecar.at("width").get<int>();
    raw.height = sidecar.at("height").get<int>();
    raw.n_frames = sidecar.at("n_frames").get<int>();
    raw.subtracted = sidecar.at("subtracted").get<bool>();
    raw.plan = plan_from_json(sidecar.at("plan"));
    if (config_hash) *config_hash = sidecar.value("config_hash", "");

    const int n_configs = sidecar.at("n_configs").get<int>();
    const size_t n_px = static_cast<size_t>(raw.width) * raw.height;
    const std::string buf = read_file(bin_path);
    if (buf.size() != static_cast<size_t>(n_configs) * 8 * n_px * 4)
        throw std::runtime_error("load_raw_four_phase: raster size mismatch");

    raw.taps.resize(n_configs);
    raw.darks.resize(n_configs);
    size_t at = 0;
    auto take_frame = [&](std::vector<double>& frame) {
        frame.resize(n_px);
        for (size_t i = 0; i < n_px; ++i) {
            float v;
            std::memcpy(&v, buf.data() + at, 4);
            at += 4;
            frame[i] = static_cast<double>(v);
        }
    };
    for (int m = 0; m < n_configs; ++m) {
        for (int t = 0; t < 4; ++t) take_frame(raw.taps[m][t]);
        for (int t = 0; t < 4; ++t) take_frame(raw.darks[m][t]);
    }
    return raw;
}

// ---- Depth maps ------------------------------------------------------------

void save_depth_map(const std::string& bin_path, const std::string& sidecar_path,
                    const DepthMap& depth, const std::string& config_hash) {
    std::string buf;
    buf.reserve(depth.size() * 4);
    for (size_t i = 0; i < depth.size(); ++i) {
        const float v = depth.valid[i] ? static_cast<float>(depth.values[i])
                                       : std::numeric_limits<float>::quiet_NaN();
        append_pod(buf, v);
    }
    atomic_write(bin_path, buf);

    json sidecar{{"width", depth.width},
                 {"height", depth.height},
                 {"units", "mm"},
                 {"invalid", "nan"},
                 {"config_hash", config_hash}};
    atomic_write(sidecar_path, sidecar.dump(2) + "\n");
}

DepthMap load_depth_map(const std::string& bin_path, const std::string& sidecar_path,
                        std::string* config_hash) {
    const json sidecar = json::parse(read_file(sidecar_path));
    DepthMap depth(sidecar.at("width").get<int>(), sidecar.at("height").get<int>());
    if (config_hash) *config_hash = sidecar.value("config_hash", "");
    const std::string buf = read_file(bin_path);
    if (buf.size() != depth.size() * 4)
        throw std::runtime_error("load_depth_map: raster size mismatch");
    for (size_t i = 0; i < depth.size(); ++i) {
        float v;
        std::memcpy(&v, buf.data() + i * 4, 4);
        if (std::isnan(v)) {
            depth.values[i] = 0.0;
            depth.valid[i] = 0;
        } else {
            depth.values[i] = static_cast<double>(v);
            depth.valid[i] = 1;
        }
    }
    return depth;
}

void write_manifest(const std::string& path, const std::string& config_hash,
                    const std::map<std::string, std::string>& artifact_hashes) {
    json artifacts = json::object();
    for (const auto& [name, hash] : artifact_hashes) artifacts[name] = hash;
    json manifest{{"config_hash", config_hash}, {"artifacts", artifacts}};
    atomic_write(path, manifest.dump(2) + "\n");
}

}  // namespace tofcs
