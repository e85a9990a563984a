#pragma once

#include "qpat/imaging.hpp"

#include <filesystem>

namespace qpat {

/// Binary PGM ("P5") reader; accepts maxval 255 (single byte) or 65535
/// (two bytes, big-endian) and '#' comments in the header.
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes intensities quantized to the given maxval (255 or 65535).
void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval = 65535);

/// Mask as an 8-bit PGM, foreground 255.
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace qpat
