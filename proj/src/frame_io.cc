#include "bnvc/frame_io.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "json.hpp"

#include "bnvc/error.h"

namespace bnvc {

namespace fs = std::filesystem;

namespace {

bool ends_with(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(const std::vector<std::uint8_t> &buf, std::size_t &pos, const std::string &path) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < buf.size() && !std::isspace(buf[pos]) && buf[pos] != '#') tok += static_cast<char>(buf[pos++]);
  if (tok.empty()) throw CorruptionError(path + ": truncated PPM header");
  return tok;
}

int ppm_int(const std::vector<std::uint8_t> &buf, std::size_t &pos, const std::string &path) {
  std::string tok = ppm_token(buf, pos, path);
  if (tok.size() > 6 || !std::all_of(tok.begin(), tok.end(), ::isdigit)) {
    throw CorruptionError(path + ": bad PPM header field '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptionError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string &path, const std::vector<std::uint8_t> &bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw UsageError("write failed: " + path);
}

Image read_ppm(const std::string &path) {
  std::vector<std::uint8_t> buf = read_file(path);
  std::size_t pos = 0;
  if (ppm_token(buf, pos, path) != "P6") throw CorruptionError(path + ": not a binary PPM");
  const int w = ppm_int(buf, pos, path), h = ppm_int(buf, pos, path), maxval = ppm_int(buf, pos, path);
  if (w <= 0 || h <= 0) throw CorruptionError(path + ": empty image");
  if (maxval != 255) throw CorruptionError(path + ": only 8-bit PPM is supported");
  if (pos >= buf.size() || !std::isspace(buf[pos])) throw CorruptionError(path + ": truncated PPM");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (buf.size() - pos != 3 * n) throw CorruptionError(path + ": pixel data size mismatch");
  Image img(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) img.planes[c * n + i] = buf[pos + 3 * i + c];
  }
  return img;
}

void write_ppm(const std::string &path, const Image &image) {
  std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> buf(header.begin(), header.end());
  const std::size_t n = image.pixel_count();
  buf.reserve(buf.size() + 3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) buf.push_back(image.planes[c * n + i]);
  }
  write_file(path, buf);
}

std::vector<Image> read_sequence(const std::string &path) {
  if (ends_with(path, ".rgb")) {
    std::vector<std::uint8_t> meta_bytes = read_file(path + ".json");
    nlohmann::json meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end(), nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) throw CorruptionError(path + ".json: not a JSON object");
    int w = 0, h = 0, n = 0;
    try {
      w = meta.at("width").get<int>();
      h = meta.at("height").get<int>();
      n = meta.at("frame_count").get<int>();
    } catch (const nlohmann::json::exception &) {
      throw CorruptionError(path + ".json: needs integer width, height, frame_count");
    }
    if (w <= 0 || h <= 0 || n <= 0) throw CorruptionError(path + ".json: non-positive dimensions");
    std::vector<std::uint8_t> raw = read_file(path);
    const std::size_t frame_bytes = 3 * static_cast<std::size_t>(w) * h;
    if (raw.size() != frame_bytes * n) throw CorruptionError(path + ": size does not match sidecar");
    std::vector<Image> frames;
    for (int t = 0; t < n; ++t) {
      Image img(w, h);
      std::copy_n(raw.begin() + t * frame_bytes, frame_bytes, img.planes.begin());
      frames.push_back(std::move(img));
    }
    return frames;
  }
  if (!fs::is_directory(path)) throw CorruptionError(path + ": not a directory or .rgb file");
  std::vector<std::string> names;
  for (const auto &e : fs::directory_iterator(path)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") names.push_back(e.path().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw CorruptionError(path + ": no .ppm frames");
  std::vector<Image> frames;
  for (const std::string &n : names) frames.push_back(read_ppm(n));
  for (const Image &f : frames) {
    if (f.width != frames[0].width || f.height != frames[0].height) {
      throw CorruptionError(path + ": frame sizes differ");
    }
  }
  return frames;
}

void write_sequence(const std::string &path, const std::vector<Image> &frames) {
  if (frames.empty()) throw UsageError("write_sequence: no frames");
  if (ends_with(path, ".rgb")) {
    std::vector<std::uint8_t> raw;
    for (const Image &f : frames) {
      if (f.width != frames[0].width || f.height != frames[0].height) {
        throw UsageError("write_sequence: frame sizes differ");
      }
      raw.insert(raw.end(), f.planes.begin(), f.planes.end());
    }
    write_file(path, raw);
    nlohmann::json meta = {{"width", frames[0].width}, {"height", frames[0].height},
                           {"frame_count", frames.size()}};
    std::string s = meta.dump(2) + "\n";
    write_file(path + ".json", {s.begin(), s.end()});
    return;
  }
  fs::create_directories(path);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.ppm", t);
    write_ppm((fs::path(path) / name).string(), frames[t]);
  }
}

}  // namespace bnvc
