#include "vsrl/rng.hpp"

#include <sstream>

#include "vsrl/errors.hpp"

namespace vsrl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix_seed(seed, stream));
}

double Rng::normal() { return normal_(engine_); }

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

std::uint64_t Rng::next_u64() { return engine_(); }

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_ << ' ' << normal_;
  return out.str();
}

void Rng::deserialize(const std::string& text) {
  std::istringstream in(text);
  in >> engine_ >> normal_;
  if (!in) throw IoError("malformed random-stream state");
}

bool Rng::operator==(const Rng& other) const {
  return engine_ == other.engine_ && normal_ == other.normal_;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(a);
  h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

}  // namespace vsrl
