#pragma once

#include "pcreg/benchgen.hpp"
#include "pcreg/geom.hpp"
#include "pcreg/match.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pcreg {

enum class FormatErrorKind {
  io,         // cannot open, read or write
  magic,      // wrong file signature or header
  truncated,  // fewer bytes than the header promises, or a partial record
  non_finite, // NaN or infinity in the payload
  syntax,     // malformed text
  invalid,    // well-formed but violates an invariant
};

const char* to_string(FormatErrorKind k);

/// Structured parse/write failure. line is 1-based; 0 when not applicable.
class FormatError : public std::runtime_error {
public:
  FormatError(FormatErrorKind kind, std::string source, std::size_t line, const std::string& what);

  FormatErrorKind kind() const { return kind_; }
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

private:
  FormatErrorKind kind_;
  std::string source_;
  std::size_t line_;
};

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_file(const std::filesystem::path& path, std::string_view content);

// Point clouds. Coordinates are stored as float32 in both formats.

/// ASCII PLY with a vertex element holding float/double x, y, z (other
/// properties are skipped).
PointCloud parse_ply(std::string_view text, const std::string& source = "<memory>");
std::string format_ply(const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// Raw little-endian float32 (x, y, z, intensity) records; intensity is dropped.
PointCloud parse_kitti_bin(std::span<const std::byte> bytes, const std::string& source = "<memory>");
std::string format_kitti_bin(const PointCloud& cloud);
PointCloud read_kitti_bin(const std::filesystem::path& path);
void write_kitti_bin(const std::filesystem::path& path, const PointCloud& cloud);

/// By extension: .ply or .bin.
PointCloud read_cloud(const std::filesystem::path& path);

// Descriptors: "FDSC", u32 count, u32 dim, count*dim float32 row-major.

DescriptorSet parse_descriptors(std::span<const std::byte> bytes,
                                const std::string& source = "<memory>");
std::string format_descriptors(const DescriptorSet& set);
DescriptorSet read_descriptors(const std::filesystem::path& path);
void write_descriptors(const std::filesystem::path& path, const DescriptorSet& set);

// Poses: one frame per line, 12 reals, row-major 3x4 [R|t] sensor-to-world.
// Blank lines are skipped.

std::vector<RigidMotion> parse_poses(std::string_view text, const std::string& source = "<memory>");
std::string format_poses(std::span<const RigidMotion> poses);
std::vector<RigidMotion> read_poses(const std::filesystem::path& path);

/// One timestamp (seconds) per line.
std::vector<double> parse_times(std::string_view text, const std::string& source = "<memory>");
std::vector<double> read_times(const std::filesystem::path& path);

// Pair lists: CSV with header
// sequence_id,src,tgt,r00,r01,r02,r03,r10,r11,r12,r13,r20,r21,r22,r23,overlap,dt

inline constexpr std::string_view kPairListHeader =
    "sequence_id,src,tgt,r00,r01,r02,r03,r10,r11,r12,r13,r20,r21,r22,r23,overlap,dt";

std::vector<PairRecord> parse_pair_list(std::string_view text,
                                        const std::string& source = "<memory>");
std::string format_pair_list(std::span<const PairRecord> pairs);
std::vector<PairRecord> read_pair_list(const std::filesystem::path& path);
void write_pair_list(const std::filesystem::path& path, std::span<const PairRecord> pairs);

/// Shortest text that reads back to the same double.
std::string format_real(double v);

}  // namespace pcreg
