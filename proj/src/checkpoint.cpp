#include "serla/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "serla/errors.hpp"

namespace serla {

namespace {
constexpr char kMagic[8] = {'S', 'E', 'R', 'L', 'A', 'C', 'K', 'P'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& what) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw MalformedFileError("checkpoint: truncated while reading " + what);
    return v;
}
}  // namespace

const Mat& NamedArrays::get(const std::string& name) const {
    for (const auto& [n, m] : arrays)
        if (n == name) return m;
    throw MalformedFileError("checkpoint: missing array '" + name + "'");
}

bool NamedArrays::has(const std::string& name) const {
    for (const auto& [n, m] : arrays)
        if (n == name) return true;
    return false;
}

void write_checkpoint(const std::filesystem::path& path, std::uint64_t config_hash,
                      const NamedArrays& arrays) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kCheckpointFormatVersion);
    write_pod(out, config_hash);
    write_pod(out, static_cast<std::uint32_t>(arrays.arrays.size()));
    for (const auto& [name, m] : arrays.arrays) {
        write_pod(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod(out, static_cast<std::uint64_t>(m.rows()));
        write_pod(out, static_cast<std::uint64_t>(m.cols()));
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    }
    if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

NamedArrays read_checkpoint(const std::filesystem::path& path, std::uint64_t* config_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw MalformedFileError("checkpoint: bad magic in " + path.string());
    auto version = read_pod<std::uint32_t>(in, "version");
    if (version != kCheckpointFormatVersion)
        throw VersionMismatchError("checkpoint: format version " + std::to_string(version) +
                                   ", expected " + std::to_string(kCheckpointFormatVersion));
    auto hash = read_pod<std::uint64_t>(in, "config hash");
    if (config_hash) *config_hash = hash;
    auto count = read_pod<std::uint32_t>(in, "array count");
    NamedArrays out;
    for (std::uint32_t i = 0; i < count; ++i) {
        auto name_len = read_pod<std::uint32_t>(in, "name length");
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in) throw MalformedFileError("checkpoint: truncated array name");
        auto rows = read_pod<std::uint64_t>(in, "rows");
        auto cols = read_pod<std::uint64_t>(in, "cols");
        Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * rows * cols));
        if (!in) throw MalformedFileError("checkpoint: truncated array data for '" + name + "'");
        out.add(name, std::move(m));
    }
    return out;
}

void pack_mlp(NamedArrays& out, const std::string& prefix, const Mlp& mlp) {
    for (std::size_t i = 0; i < mlp.layers().size(); ++i) {
        const auto& l = mlp.layers()[i];
        out.add(prefix + ".l" + std::to_string(i) + ".W", l.w);
        out.add(prefix + ".l" + std::to_string(i) + ".b", Mat(l.b));
    }
}

void unpack_mlp(const NamedArrays& in, const std::string& prefix, Mlp& mlp) {
    for (std::size_t i = 0; i < mlp.layers().size(); ++i) {
        auto& l = mlp.layers()[i];
        const Mat& w = in.get(prefix + ".l" + std::to_string(i) + ".W");
        const Mat& b = in.get(prefix + ".l" + std::to_string(i) + ".b");
        if (w.rows() != l.w.rows() || w.cols() != l.w.cols() || b.rows() != l.b.size())
            throw SpecMismatchError("checkpoint: array shape disagrees with model for '" +
                                    prefix + ".l" + std::to_string(i) + "'");
        l.w = w;
        l.b = b.col(0);
    }
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("hash_file: cannot open " + path.string());
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<std::uint8_t>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return h;
}

std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace serla
