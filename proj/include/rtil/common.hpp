#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace rtil {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Error types. Everything user-facing derives from std::runtime_error so the
// CLI can report any failure with a single catch.
// ---------------------------------------------------------------------------

struct InvalidParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constraint tightening produced an empty interval on some axis.
struct InfeasibleTighteningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergenceError : std::runtime_error {
  NonConvergenceError(const std::string& msg, double residual)
      : std::runtime_error(msg), last_residual(residual) {}
  double last_residual;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The expert controller could not produce an action at the queried state.
struct ExpertInfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic random streams. All randomness in the project flows through
// Rng so that a run is reproducible from its master seed alone. child(k)
// derives an independent stream; derivation depends only on (seed, k), never
// on draw order, so parallel workers stay deterministic.
// ---------------------------------------------------------------------------

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : base_(seed) {
    uint64_t s = seed;
    eng_.seed(splitmix64(s));
  }

  uint64_t next_u64() { return eng_(); }

  // in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // in [0, n); unbiased enough for sampling purposes and fully deterministic
  // (std::uniform_int_distribution is implementation-defined).
  int uniform_int(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >> 64);
  }

  Rng child(uint64_t stream) const {
    uint64_t s = base_;
    uint64_t a = splitmix64(s);
    s = a ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    uint64_t b = splitmix64(s);
    return Rng(b);
  }

  uint64_t base_seed() const { return base_; }

 private:
  uint64_t base_;
  std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Small index-parallel loop. Bodies receive indices; any exception is
// captured and rethrown on the caller thread. workers <= 1 runs inline.
// ---------------------------------------------------------------------------

int default_workers();
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace rtil
