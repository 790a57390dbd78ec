#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kws {

// Little-endian byte packing for doubles; used by the dataset format and
// checkpoints so files round-trip bit-exactly regardless of host order.
void append_le64(std::vector<std::uint8_t>& out, std::uint64_t v);
void append_le32(std::vector<std::uint8_t>& out, std::uint32_t v);
void append_le_double(std::vector<std::uint8_t>& out, double v);
std::uint64_t read_le64(const std::uint8_t* p);
std::uint32_t read_le32(const std::uint8_t* p);
double read_le_double(const std::uint8_t* p);

std::vector<std::uint8_t> doubles_to_le_bytes(const std::vector<double>& v);
std::vector<double> le_bytes_to_doubles(const std::vector<std::uint8_t>& bytes);

// RFC 4648 base64, no line wrapping.
std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string hex64(std::uint64_t v);

}  // namespace kws
