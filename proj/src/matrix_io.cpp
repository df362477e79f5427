#include "mmbias/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "mmbias/errors.hpp"

namespace mmbias {
namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_matrix(const EmbeddingMatrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(kMmbeHeaderBytes + m.values().size() * 4);
  for (char c : {'M', 'M', 'B', 'E'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u16(out, kMmbeVersion);
  put_u16(out, 0);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.dims()));
  for (float v : m.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

EmbeddingMatrix decode_matrix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMmbeHeaderBytes) {
    throw DataFormatError("MMBE header truncated: expected " + std::to_string(kMmbeHeaderBytes) +
                          " bytes, got " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), "MMBE", 4) != 0) throw DataFormatError("bad magic (expected 'MMBE')");
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != kMmbeVersion) {
    throw DataFormatError("unsupported MMBE version " + std::to_string(version));
  }
  if (get_u16(bytes, 6) != 0) throw DataFormatError("MMBE reserved field must be 0");
  const std::uint64_t rows = get_u32(bytes, 8);
  const std::uint64_t cols = get_u32(bytes, 12);
  const std::uint64_t expected = rows * cols * 4;
  const std::uint64_t actual = bytes.size() - kMmbeHeaderBytes;
  if (actual < expected) {
    std::ostringstream msg;
    msg << "MMBE payload truncated: expected " << expected << " bytes, got " << actual << " ("
        << expected - actual << " missing)";
    throw DataFormatError(msg.str());
  }
  if (actual > expected) {
    std::ostringstream msg;
    msg << "MMBE payload has " << actual - expected << " trailing bytes (expected " << expected
        << ")";
    throw DataFormatError(msg.str());
  }
  std::vector<float> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, kMmbeHeaderBytes + 4 * i));
  }
  return EmbeddingMatrix(rows, cols, std::move(values));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

EmbeddingMatrix read_matrix(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_matrix(bytes);
  } catch (const DataFormatError& e) {
    throw DataFormatError(path.string() + ": " + e.what());
  }
}

void write_matrix(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  const auto bytes = encode_matrix(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataFormatError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

EmbeddingMatrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open '" + path.string() + "'");
  std::vector<float> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      std::size_t a = start;
      std::size_t b = end;
      while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
      while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t')) --b;
      float v = 0.0f;
      const auto res = std::from_chars(line.data() + a, line.data() + b, v);
      if (a == b || res.ec != std::errc{} || res.ptr != line.data() + b) {
        throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                              line.substr(a, b - a) + "'");
      }
      values.push_back(v);
      ++count;
      if (end == line.size()) break;
      start = end + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw DataFormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(cols) + " columns, got " + std::to_string(count));
    }
    ++rows;
  }
  try {
    return EmbeddingMatrix(rows, cols, std::move(values));
  } catch (const DataFormatError& e) {
    throw DataFormatError(path.string() + ": " + e.what());
  }
}

EmbeddingMatrix read_any_matrix(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_csv_matrix(path);
  return read_matrix(path);
}

}  // namespace mmbias
