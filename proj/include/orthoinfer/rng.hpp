#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace orthoinfer {

// Counter-based generator: every substream is keyed by (master_seed, role,
// index) through the SplitMix64 finalizer, so replication r's draws are
// identical no matter which worker executes it or in what order.
inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream roles keep independent uses of the same master seed uncorrelated.
enum class Role : std::uint64_t {
  kDesignShared = 1,   // the z0 factor shared across columns
  kDesignNoise = 2,    // the idiosyncratic z matrix, one substream per row
  kReplicationNoise = 3,  // epsilon, one substream per Monte Carlo replication
  kSplit = 4,          // row permutations for sample splitting
  kSearch = 5,         // random-restart optimizer
  kGeneric = 6,
};

class SubStream {
 public:
  SubStream(std::uint64_t master, Role role, std::uint64_t index)
      : state_(splitmix64(splitmix64(master + kGoldenGamma) ^
                          (static_cast<std::uint64_t>(role) * kGoldenGamma)) ^
               splitmix64(index + kGoldenGamma)) {}

  std::uint64_t next_u64() { return splitmix64(state_ += kGoldenGamma); }

  // Uniform on (0,1]: strictly positive so it is always safe inside a log.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the spare keeps draw counts halved.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  // Fisher-Yates permutation of {0..n-1}.
  template <typename Int>
  void shuffle_indices(std::vector<Int>& idx) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_u64() % i);
      std::swap(idx[i - 1], idx[j]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace orthoinfer
