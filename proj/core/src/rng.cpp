#include "pdmp/rng.hpp"

#include <cmath>

namespace pdmp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kTweakSalt = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kSplitSalt = 0x8CB92BA72F3D8DD7ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t key, std::uint64_t counter) noexcept
    : key_(key), tweak_(mix64(key ^ kTweakSalt)), counter_(counter) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  const std::uint64_t c = counter_++;
  return mix64(mix64(key_ + (c + 1) * kGolden) ^ tweak_);
}

double CounterRng::uniform() noexcept {
  // 53 random bits centred in their cell: never 0, never 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::exponential() noexcept { return -std::log(uniform()); }

CounterRng CounterRng::split(std::uint64_t stream_id) const noexcept {
  return CounterRng(mix64(mix64(key_ ^ kSplitSalt) + mix64(stream_id + kGolden)));
}

std::uint64_t StreamFactory::derived_seed(std::uint64_t stream_id) const noexcept {
  return CounterRng(master_).split(stream_id).key();
}

CounterRng StreamFactory::stream(std::uint64_t stream_id) const noexcept {
  return CounterRng(derived_seed(stream_id));
}

}  // namespace pdmp
