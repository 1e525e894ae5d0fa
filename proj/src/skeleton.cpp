#include "tvsvm/skeleton.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "tvsvm/error.hpp"

namespace tvsvm {

void SkeletonSequence::validate() const {
  if (frames.empty()) throw DataError("skeleton sequence has no frames");
  if (joints < 1) throw DataError("skeleton sequence has no joints");
  if (coords != 2 && coords != 3) throw DataError("skeleton coordinates must be 2-D or 3-D");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].rows() != joints || frames[t].cols() != coords)
      throw DataError("frame " + std::to_string(t) + " has shape " +
                      std::to_string(frames[t].rows()) + "x" + std::to_string(frames[t].cols()) +
                      ", expected " + std::to_string(joints) + "x" + std::to_string(coords));
    if (!frames[t].allFinite()) throw DataError("frame " + std::to_string(t) + " has non-finite coordinates");
  }
}

RowMatrix SkeletonSequence::trajectory(int joint) const {
  if (joint < 0 || joint >= joints) throw InvalidArgument("joint index out of range");
  RowMatrix out(length(), coords);
  for (int t = 0; t < length(); ++t) out.row(t) = frames[t].row(joint);
  return out;
}

RowMatrix temporal_chunking(const RowMatrix& trajectory, int chunks) {
  if (chunks < 1) throw InvalidArgument("number of temporal chunks must be >= 1");
  const auto T = trajectory.rows();
  if (T == 0) throw InvalidArgument("trajectory has no frames");
  const auto K = trajectory.cols();

  RowMatrix sums = RowMatrix::Zero(chunks, K);
  std::vector<int> counts(chunks, 0);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto m = static_cast<Eigen::Index>(static_cast<std::int64_t>(t) * chunks / T);
    sums.row(m) += trajectory.row(t);
    ++counts[m];
  }
  // Chunk 0 always holds frame 0, so every empty chunk has a predecessor.
  for (int m = 0; m < chunks; ++m) {
    if (counts[m] > 0)
      sums.row(m) /= counts[m];
    else
      sums.row(m) = sums.row(m - 1);
  }
  return sums;
}

Vector video_descriptor(const SkeletonSequence& sequence, int chunks) {
  sequence.validate();
  const int K = sequence.coords;
  Vector out(static_cast<Eigen::Index>(sequence.joints) * chunks * K);
  for (int j = 0; j < sequence.joints; ++j) {
    const RowMatrix means = temporal_chunking(sequence.trajectory(j), chunks);
    for (int m = 0; m < chunks; ++m)
      for (int k = 0; k < K; ++k) out[(static_cast<Eigen::Index>(j) * chunks + m) * K + k] = means(m, k);
  }
  return out;
}

}  // namespace tvsvm
