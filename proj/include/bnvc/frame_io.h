#ifndef BNVC_FRAME_IO_H_
#define BNVC_FRAME_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bnvc/frame.h"

namespace bnvc {

// Binary PPM (P6, maxval 255).
Image read_ppm(const std::string &path);
void write_ppm(const std::string &path, const Image &image);

// A sequence is either a directory of .ppm files (read in name order,
// written as frame_0000.ppm, ...) or a raw planar RGB file ending in .rgb
// with a sidecar <file>.json holding {width, height, frame_count}.
std::vector<Image> read_sequence(const std::string &path);
void write_sequence(const std::string &path, const std::vector<Image> &frames);

std::vector<std::uint8_t> read_file(const std::string &path);
void write_file(const std::string &path, const std::vector<std::uint8_t> &bytes);

}  // namespace bnvc

#endif  // BNVC_FRAME_IO_H_
