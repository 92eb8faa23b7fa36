#ifndef BNVC_MOTION_H_
#define BNVC_MOTION_H_

#include "bnvc/frame.h"
#include "bnvc/graph.h"

namespace bnvc {

struct BlockSearch {
  int block = 8;
  int range = 4;
};

// Exhaustive integer-pel block matching on RGB SAD with border clamping.
// Each vector v satisfies current(p) ~ reference(p + v). Ties prefer the
// smallest |v|^2, then candidate raster order (dy outer, dx inner).
MotionField estimate_motion(const Image &current, const Image &reference,
                            const BlockSearch &search = {});

// Sum of absolute RGB differences of one block displaced by (dx, dy).
long block_sad(const Image &current, const Image &reference, int bx, int by,
               int block, int dx, int dy);

// outer(p) + inner(p + outer(p)), inner sampled bilinearly.
MotionField compose_flows(const MotionField &outer, const MotionField &inner);
Var compose_flows(Var outer, Var inner);

}  // namespace bnvc

#endif  // BNVC_MOTION_H_
