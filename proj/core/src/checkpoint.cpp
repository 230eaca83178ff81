#include "relsem/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>

namespace relsem::ckpt {

namespace {
constexpr char kMagic[8] = {'R', 'S', 'L', 'P', 'R', 'M', '0', '1'};
}  // namespace

void put_u32(std::ostream& out, uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

void put_f64(std::ostream& out, double d) {
    uint64_t v = std::bit_cast<uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw CheckpointError("manifest: truncated file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw CheckpointError("manifest: truncated file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
    uint32_t len = get_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw CheckpointError("manifest: truncated file");
    return s;
}

void write_manifest(std::ostream& out, const nn::ParamMap& params) {
    out.write(kMagic, 8);
    put_u32(out, static_cast<uint32_t>(params.items().size()));
    for (const auto& [name, t] : params.items()) {
        put_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<uint32_t>(t.shape().size()));
        for (int d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
        for (double v : t.values()) put_f64(out, v);
    }
    if (!out) throw CheckpointError("manifest: write failed");
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 6) != 0)
        throw CheckpointError("manifest: bad magic, not a parameter manifest");
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw CheckpointError(std::string("manifest: unsupported version tag '") + magic[6] +
                              magic[7] + "'");
    uint32_t count = get_u32(in);
    std::vector<ManifestEntry> entries;
    entries.reserve(count);
    for (uint32_t p = 0; p < count; ++p) {
        ManifestEntry e;
        uint32_t name_len = get_u32(in);
        e.name.resize(name_len);
        in.read(e.name.data(), name_len);
        if (!in) throw CheckpointError("manifest: truncated file");
        uint32_t ndim = get_u32(in);
        size_t total = 1;
        for (uint32_t i = 0; i < ndim; ++i) {
            uint32_t d = get_u32(in);
            e.shape.push_back(static_cast<int>(d));
            total *= d;
        }
        e.values.resize(total);
        for (size_t i = 0; i < total; ++i) e.values[i] = get_f64(in);
        entries.push_back(std::move(e));
    }
    return entries;
}

void load_into(nn::ParamMap& params, const std::vector<ManifestEntry>& entries) {
    std::set<std::string> covered;
    for (const auto& e : entries) {
        relsem::Tensor* t = params.find(e.name);
        if (!t) throw CheckpointError("manifest: unknown parameter '" + e.name + "'");
        if (t->shape() != e.shape)
            throw CheckpointError("manifest: shape mismatch for '" + e.name + "'");
        t->values() = e.values;
        covered.insert(e.name);
    }
    for (const auto& [name, t] : params.items())
        if (!covered.count(name))
            throw CheckpointError("manifest: parameter '" + name + "' missing from file");
}

}  // namespace relsem::ckpt
