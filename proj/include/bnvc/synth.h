#ifndef BNVC_SYNTH_H_
#define BNVC_SYNTH_H_

#include <cstdint>
#include <vector>

#include "bnvc/frame.h"

namespace bnvc {

struct SynthConfig {
  int width = 32;
  int height = 32;
  int frames = 20;
  int objects = 2;      // moving rectangles
  bool occlusion = false;
  int occlusion_period = 4;  // patch shown at t = 0, period, 2 * period, ...
  bool static_scene = false;  // every frame equals frame 0
};

// Seeded moving-rectangle sequence on a smooth background. With occlusion,
// a static textured patch appears only on frames t with t % period == 0,
// so a frame coded at such t sees the patch in exactly one of its last
// `period` predecessors.
std::vector<Image> generate_sequence(const SynthConfig &config, std::uint64_t seed);

std::vector<std::vector<Image>> generate_dataset(const SynthConfig &config, int count,
                                                 std::uint64_t seed);

}  // namespace bnvc

#endif  // BNVC_SYNTH_H_
