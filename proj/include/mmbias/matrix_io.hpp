#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmbias/embedding.hpp"

namespace mmbias {

// MMBE binary layout (all integers little-endian):
//   0..3   magic "MMBE"
//   4..5   u16 version (= 1)
//   6..7   u16 reserved (= 0)
//   8..11  u32 rows
//   12..15 u32 cols
//   16..   rows*cols IEEE-754 binary32 values, row-major
inline constexpr std::uint16_t kMmbeVersion = 1;
inline constexpr std::size_t kMmbeHeaderBytes = 16;

std::vector<std::uint8_t> encode_matrix(const EmbeddingMatrix& m);
EmbeddingMatrix decode_matrix(std::span<const std::uint8_t> bytes);

EmbeddingMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const EmbeddingMatrix& m);

// One row per line, comma-separated decimals. Blank lines are ignored.
EmbeddingMatrix read_csv_matrix(const std::filesystem::path& path);

// Dispatches on extension: ".csv" goes to the CSV reader, anything else MMBE.
EmbeddingMatrix read_any_matrix(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace mmbias
