#include "bnvc/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "bnvc/error.h"

namespace bnvc {

namespace {

struct Rect {
  double x, y, vx, vy;
  int w, h;
  std::array<int, 3> color, stripe;
};

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

std::vector<Image> generate_sequence(const SynthConfig &cfg, std::uint64_t seed) {
  if (cfg.width < 8 || cfg.height < 8 || cfg.frames < 1 || cfg.objects < 0 ||
      cfg.occlusion_period < 1) {
    throw UsageError("generate_sequence: invalid configuration");
  }
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  std::array<double, 3> base, gx, gy;
  for (int c = 0; c < 3; ++c) {
    base[c] = uni(60, 190);
    gx[c] = uni(-40, 40) / cfg.width;
    gy[c] = uni(-40, 40) / cfg.height;
  }
  std::vector<Rect> rects;
  for (int i = 0; i < cfg.objects; ++i) {
    Rect r;
    r.w = pick(cfg.width / 6 + 1, cfg.width / 3 + 1);
    r.h = pick(cfg.height / 6 + 1, cfg.height / 3 + 1);
    r.x = uni(0, cfg.width - r.w);
    r.y = uni(0, cfg.height - r.h);
    r.vx = uni(-2.0, 2.0);
    r.vy = uni(-2.0, 2.0);
    for (int c = 0; c < 3; ++c) {
      r.color[c] = pick(0, 255);
      r.stripe[c] = pick(0, 255);
    }
    rects.push_back(r);
  }
  const int ps = std::max(4, std::min(cfg.width, cfg.height) / 4);
  const int px = pick(0, cfg.width - ps), py = pick(0, cfg.height - ps);
  std::array<std::array<int, 3>, 2> patch;
  for (auto &col : patch) {
    for (int &v : col) v = pick(0, 255);
  }

  std::vector<Image> out;
  for (int t = 0; t < cfg.frames; ++t) {
    if (cfg.static_scene && t > 0) {
      out.push_back(out.front());
      continue;
    }
    Image img(cfg.width, cfg.height);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) img.at(c, y, x) = to_u8(base[c] + gx[c] * x + gy[c] * y);
      }
    }
    if (cfg.occlusion && t % cfg.occlusion_period == 0) {
      for (int y = py; y < py + ps; ++y) {
        for (int x = px; x < px + ps; ++x) {
          const auto &col = patch[((x - px) / 2 + (y - py) / 2) % 2];
          for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<std::uint8_t>(col[c]);
        }
      }
    }
    for (Rect &r : rects) {
      const int x0 = static_cast<int>(std::lround(r.x)), y0 = static_cast<int>(std::lround(r.y));
      for (int y = std::max(0, y0); y < std::min(cfg.height, y0 + r.h); ++y) {
        for (int x = std::max(0, x0); x < std::min(cfg.width, x0 + r.w); ++x) {
          const auto &col = ((x - x0) / 2) % 2 ? r.stripe : r.color;
          for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<std::uint8_t>(col[c]);
        }
      }
      r.x += r.vx;
      r.y += r.vy;
      if (r.x < 0 || r.x > cfg.width - r.w) {
        r.vx = -r.vx;
        r.x = std::clamp(r.x, 0.0, static_cast<double>(cfg.width - r.w));
      }
      if (r.y < 0 || r.y > cfg.height - r.h) {
        r.vy = -r.vy;
        r.y = std::clamp(r.y, 0.0, static_cast<double>(cfg.height - r.h));
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<std::vector<Image>> generate_dataset(const SynthConfig &config, int count,
                                                 std::uint64_t seed) {
  std::vector<std::vector<Image>> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(generate_sequence(config, seed * 1000003ull + static_cast<std::uint64_t>(i)));
  }
  return out;
}

}  // namespace bnvc
