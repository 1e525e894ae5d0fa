#pragma once

#include <vector>

#include "tvsvm/types.hpp"

namespace tvsvm {

// Time-ordered skeleton frames. Each frame is a joints x coords matrix
// (coords is 2 or 3) and joint identities are consistent across frames.
struct SkeletonSequence {
  int joints = 0;
  int coords = 0;
  std::vector<RowMatrix> frames;

  int length() const { return static_cast<int>(frames.size()); }
  void validate() const;
  // T x coords trajectory of one joint.
  RowMatrix trajectory(int joint) const;
};

// Splits a T x K trajectory into `chunks` temporal segments and returns the
// chunks x K matrix of per-segment coordinate means.
//
// Frame t (0-based) goes to chunk floor(t * chunks / T). When T < chunks some
// chunks receive no frame; they repeat the closest preceding non-empty chunk.
RowMatrix temporal_chunking(const RowMatrix& trajectory, int chunks);

// Concatenated chunk means of every joint: joints outer, chunks middle,
// coordinates inner. Length joints * coords * chunks.
Vector video_descriptor(const SkeletonSequence& sequence, int chunks);

}  // namespace tvsvm
