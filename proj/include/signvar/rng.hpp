#pragma once
//
// Random number streams.
//
// Every stochastic routine takes an `Rng&` supplied by the caller; nothing in
// the library owns global RNG state.
//
// Stream derivation: a stream is identified by the pair (seed, stream_id),
// both 64-bit. The pair is split into four 32-bit words
//   {seed_lo, seed_hi, stream_lo, stream_hi}
// and fed to std::seed_seq, whose output initialises a std::mt19937_64.
// Both std::seed_seq and std::mt19937_64 are specified bit-exactly by the
// C++ standard, and normal variates come from Boost's ziggurat
// implementation (header-only, platform independent), so a given
// (seed, stream_id) yields the same sequence on every conforming platform.
//
// Conventions used by the samplers:
//   * Gibbs chain c of a run with seed s uses stream (s, c).
//   * Accept-reject block b uses stream (s, kAcceptRejectStreamBase + b);
//     blocks are handed to workers in order and merged by block index, so
//     output does not depend on the worker count.
//   * Toy-circle grid point g uses stream (s, kToyStreamBase + g).

#include <Eigen/Core>
#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace signvar {

inline constexpr std::uint64_t kAcceptRejectStreamBase = 1ULL << 32;
inline constexpr std::uint64_t kToyStreamBase = 1ULL << 40;

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Standard normal variate.
  double normal() { return normal_(engine_); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Fills `out` with i.i.d. standard normals in column-major order.
  void fill_normal(Eigen::Ref<Eigen::MatrixXd> out);

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
  Eigen::VectorXd normal_vector(Eigen::Index size);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace signvar
