#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "bilevel/linalg.hpp"

namespace bilevel {

/// Which consumer a random stream feeds. Each (kind, objective) pair owns its own stream so
/// that adding objectives or reordering calls never shifts another stream's draws.
enum class StreamKind : std::uint64_t {
  upper_grad_x = 0,
  upper_grad_y = 1,
  lower_grad_y = 2,
  lower_hvp = 3,
  lower_jvp = 4,
  upper_value = 5,
  selection = 6,
  data = 7,
};

/// Stream identifier for `kind` belonging to objective `objective`.
constexpr std::uint64_t stream_id(StreamKind kind, std::size_t objective = 0) {
  return static_cast<std::uint64_t>(objective) * 16u + static_cast<std::uint64_t>(kind);
}

std::uint64_t splitmix64(std::uint64_t x);

/// A reproducible random stream keyed by (seed, stream_id). The n-th draw of a stream depends
/// only on the key and n, on every platform: the engine is mt19937_64 and normals come from
/// Box-Muller rather than std::normal_distribution.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t id() const noexcept { return id_; }
  /// Raw 64-bit words consumed so far.
  std::uint64_t words_drawn() const noexcept { return words_; }

  std::uint64_t next_word();
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

 private:
  std::uint64_t seed_;
  std::uint64_t id_;
  std::uint64_t words_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace bilevel
