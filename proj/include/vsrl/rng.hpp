#ifndef VSRL_RNG_HPP_
#define VSRL_RNG_HPP_

#include <cstdint>
#include <random>
#include <string>

namespace vsrl {

// Seeded random stream. The complete state (engine plus the cached normal
// deviate) round-trips through serialize()/deserialize(), which is what makes
// checkpoint resumption bit-exact.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Independent stream number `stream` of a master seed.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  double normal();
  double uniform(double lo, double hi);
  std::uint64_t next_u64();

  std::mt19937_64& engine() { return engine_; }

  std::string serialize() const;
  void deserialize(const std::string& text);

  bool operator==(const Rng& other) const;

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Stable 64-bit mixing of several integers into one seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace vsrl

#endif  // VSRL_RNG_HPP_
