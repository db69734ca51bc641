#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "serla/mlp.hpp"

namespace serla {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// Named parameter arrays; the on-disk layout is a small binary header
// followed by raw little-endian doubles, so round trips are bit-exact.
struct NamedArrays {
    std::vector<std::pair<std::string, Mat>> arrays;

    void add(const std::string& name, const Mat& m) { arrays.emplace_back(name, m); }
    const Mat& get(const std::string& name) const;
    bool has(const std::string& name) const;
};

void write_checkpoint(const std::filesystem::path& path, std::uint64_t config_hash,
                      const NamedArrays& arrays);
NamedArrays read_checkpoint(const std::filesystem::path& path, std::uint64_t* config_hash);

// Packs an Mlp's layers as "<prefix>.l<i>.W" / "<prefix>.l<i>.b".
void pack_mlp(NamedArrays& out, const std::string& prefix, const Mlp& mlp);
void unpack_mlp(const NamedArrays& in, const std::string& prefix, Mlp& mlp);

// FNV-1a over a file's bytes; used for reproducibility checks.
std::uint64_t hash_file(const std::filesystem::path& path);
std::uint64_t hash_string(const std::string& s);

}  // namespace serla
