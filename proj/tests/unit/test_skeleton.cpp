#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvsvm/error.hpp"
#include "tvsvm/skeleton.hpp"

using namespace tvsvm;

namespace {

// Assign every frame to its chunk by brute force, then average.
RowMatrix reference_chunking(const RowMatrix& traj, int M, std::vector<int>* sizes = nullptr) {
  const int T = static_cast<int>(traj.rows());
  RowMatrix out = RowMatrix::Zero(M, traj.cols());
  std::vector<int> count(static_cast<std::size_t>(M), 0);
  for (int t = 0; t < T; ++t) {
    int chunk = 0;
    while ((chunk + 1) * T <= t * M) ++chunk;  // largest chunk with chunk*T <= t*M
    out.row(chunk) += traj.row(t);
    ++count[static_cast<std::size_t>(chunk)];
  }
  for (int m = 0; m < M; ++m) {
    if (count[static_cast<std::size_t>(m)] > 0) out.row(m) /= count[static_cast<std::size_t>(m)];
    else out.row(m) = m > 0 ? RowMatrix(out.row(m - 1)) : RowMatrix(traj.row(0));
  }
  if (sizes) *sizes = count;
  return out;
}

SkeletonSequence random_sequence(std::mt19937_64& rng, int T, int J, int K) {
  SkeletonSequence s{J, K, {}};
  for (int t = 0; t < T; ++t) s.frames.push_back(tvsvm::testing::random_matrix(rng, J, K, -1, 1));
  return s;
}

}  // namespace

TEST(TemporalChunking, EqualChunks) {
  RowMatrix traj(8, 1);
  for (int t = 0; t < 8; ++t) traj(t, 0) = t + 1;
  const RowMatrix out = temporal_chunking(traj, 4);
  ASSERT_EQ(out.rows(), 4);
  EXPECT_EQ(out(0, 0), 1.5);
  EXPECT_EQ(out(1, 0), 3.5);
  EXPECT_EQ(out(2, 0), 5.5);
  EXPECT_EQ(out(3, 0), 7.5);
}

TEST(TemporalChunking, SingleFrameFillsEveryChunk) {
  RowMatrix traj(1, 3);
  traj << 0.25, -1, 4;
  for (int M : {1, 2, 7}) {
    const RowMatrix out = temporal_chunking(traj, M);
    for (int m = 0; m < M; ++m) EXPECT_EQ(out.row(m), traj.row(0));
  }
}

TEST(TemporalChunking, UnevenChunksMatchBruteForce) {
  std::mt19937_64 rng(1);
  RowMatrix traj = tvsvm::testing::random_matrix(rng, 10, 2, -3, 3);
  std::vector<int> sizes;
  const RowMatrix want = reference_chunking(traj, 4, &sizes);
  EXPECT_EQ(sizes, (std::vector<int>{3, 2, 3, 2}));
  EXPECT_TRUE(temporal_chunking(traj, 4).isApprox(want, 1e-14));
  for (int T = 1; T <= 25; ++T)
    for (int M = 1; M <= 9; ++M) {
      traj = tvsvm::testing::random_matrix(rng, T, 3, -1, 1);
      EXPECT_TRUE(temporal_chunking(traj, M).isApprox(reference_chunking(traj, M), 1e-13)) << T << " " << M;
    }
}

TEST(TemporalChunking, Errors) {
  EXPECT_THROW(temporal_chunking(RowMatrix::Zero(3, 2), 0), InvalidArgument);
  EXPECT_ANY_THROW(temporal_chunking(RowMatrix(0, 2), 3));
}

TEST(VideoDescriptor, LayoutJointsChunksCoords) {
  std::mt19937_64 rng(2);
  const auto seq = random_sequence(rng, 9, 3, 2);
  const Vector v = video_descriptor(seq, 4);
  ASSERT_EQ(v.size(), 3 * 2 * 4);
  for (int j = 0; j < 3; ++j) {
    const RowMatrix c = temporal_chunking(seq.trajectory(j), 4);
    for (int m = 0; m < 4; ++m)
      for (int k = 0; k < 2; ++k) EXPECT_EQ(v[(j * 4 + m) * 2 + k], c(m, k));
  }
}

TEST(VideoDescriptor, SingleJointIsFlattenedChunking) {
  std::mt19937_64 rng(3);
  const auto seq = random_sequence(rng, 6, 1, 3);
  const RowMatrix c = temporal_chunking(seq.trajectory(0), 3);
  EXPECT_EQ(video_descriptor(seq, 3), Eigen::Map<const Vector>(c.data(), c.size()));
}

TEST(VideoDescriptor, TimeOrderMatters) {
  SkeletonSequence s{1, 2, {}};
  RowMatrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 1, 1;
  s.frames = {a, b};
  auto swapped = s;
  std::swap(swapped.frames[0], swapped.frames[1]);
  EXPECT_NE(video_descriptor(s, 2), video_descriptor(swapped, 2));
}

TEST(VideoDescriptor, FrameDuplicationInvariance) {
  std::mt19937_64 rng(4);
  for (int M : {1, 2, 4}) {
    const auto seq = random_sequence(rng, 8, 4, 3);
    auto doubled = seq;
    doubled.frames.clear();
    for (const auto& f : seq.frames) doubled.frames.insert(doubled.frames.end(), {f, f});
    EXPECT_TRUE(video_descriptor(doubled, M).isApprox(video_descriptor(seq, M), 1e-14));
  }
}

TEST(VideoDescriptor, LengthAlwaysJKM) {
  std::mt19937_64 rng(5);
  for (int T : {1, 3, 11})
    for (int J : {1, 5})
      for (int K : {2, 3})
        for (int M : {1, 4, 13}) EXPECT_EQ(video_descriptor(random_sequence(rng, T, J, K), M).size(), J * K * M);
}

TEST(SkeletonSequence, RejectsInconsistentFrames) {
  SkeletonSequence s{2, 3, {RowMatrix::Zero(2, 3), RowMatrix::Zero(3, 3)}};
  EXPECT_ANY_THROW(s.validate());
  EXPECT_ANY_THROW(video_descriptor(s, 2));
  s.frames = {RowMatrix::Zero(2, 3)};
  s.frames[0](0, 0) = NAN;
  EXPECT_ANY_THROW(s.validate());
  s.frames.clear();
  EXPECT_ANY_THROW(s.validate());
  SkeletonSequence wrong_k{1, 4, {RowMatrix::Zero(1, 4)}};
  EXPECT_ANY_THROW(wrong_k.validate());
}
