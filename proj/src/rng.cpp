#include "interlace/rng.hpp"

namespace interlace {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;
constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t key) {
  key_[0] = static_cast<std::uint32_t>(key);
  key_[1] = static_cast<std::uint32_t>(key >> 32);
}

void Philox4x32::refill() {
  std::array<std::uint32_t, 4> ctr = counter_;
  std::array<std::uint32_t, 2> k = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, ctr[0], lo0, hi0);
    mulhilo(kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0};
    k[0] += kWeylA;
    k[1] += kWeylB;
  }
  block_ = ctr;
  next_word_ = 0;
  // 128-bit counter increment
  for (auto& word : counter_) {
    if (++word != 0) break;
  }
}

Philox4x32::result_type Philox4x32::operator()() {
  if (next_word_ >= 4) refill();
  const std::uint64_t lo = block_[next_word_];
  const std::uint64_t hi = block_[next_word_ + 1];
  next_word_ += 2;
  return (hi << 32) | lo;
}

void Philox4x32::discard(std::uint64_t n) {
  while (n > 0 && next_word_ < 4) {
    next_word_ += 2;
    --n;
  }
  // two outputs per block
  std::uint64_t blocks = n / 2;
  const std::uint64_t rest = n % 2;
  std::uint64_t carry = blocks;
  for (auto& word : counter_) {
    const std::uint64_t sum = std::uint64_t{word} + (carry & 0xFFFFFFFFULL);
    word = static_cast<std::uint32_t>(sum);
    carry = (carry >> 32) + (sum >> 32);
    if (carry == 0) break;
  }
  if (rest) {
    refill();
    next_word_ = 2;
  }
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace interlace
