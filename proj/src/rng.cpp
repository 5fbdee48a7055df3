#include "qaml/rng.hpp"

#include <cmath>
#include <cstdio>

namespace qaml {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::uint64_t key, std::uint64_t stream,
                                           std::uint64_t block) {
    std::array<std::uint32_t, 4> c = {
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return c;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : key_(mix64(seed)), stream_(0) {}

RngStream RngStream::child(std::uint64_t index) const {
    RngStream c;
    c.stream_ = mix64(stream_ ^ mix64(index + 0x9E3779B97F4A7C15ull));
    c.key_ = mix64(key_ + mix64(c.stream_ ^ index));
    return c;
}

void RngStream::refill() {
    buf_ = philox4x32_10(key_, stream_, block_++);
    buf_pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
    if (buf_pos_ > 2) refill();
    std::uint64_t lo = buf_[buf_pos_];
    std::uint64_t hi = buf_[buf_pos_ + 1];
    buf_pos_ += 2;
    return lo | (hi << 32);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    // Rejection sampling on the top of the range keeps the draw unbiased.
    std::uint64_t limit = ~static_cast<std::uint64_t>(0) - (~static_cast<std::uint64_t>(0) % n + 1) % n;
    std::uint64_t v = next_u64();
    while (v > limit) v = next_u64();
    return v % n;
}

double RngStream::normal() {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    // (0,1] for the log argument: shift the 53-bit uniform away from zero.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_normal_ = r * std::sin(a);
    has_spare_normal_ = true;
    return r * std::cos(a);
}

std::string RngStream::cursor_text() const {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%016llx/%016llx/%016llx/%d",
                  static_cast<unsigned long long>(key_),
                  static_cast<unsigned long long>(stream_),
                  static_cast<unsigned long long>(block_), buf_pos_);
    return buf;
}

}  // namespace qaml
