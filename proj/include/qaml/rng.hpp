#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qaml {

// Counter-based splittable random stream (Philox4x32-10).
//
// A stream is identified by a 64-bit key and a 64-bit stream id; the block
// counter walks the remaining 64 bits of Philox counter space. Child streams
// derived via child(index) are statistically independent of the parent and of
// siblings, and every draw is a pure function of (key, stream, position), so
// fan-out across workers is reproducible regardless of scheduling.
//
// All floating-point conversions are pinned here (53-bit uniforms, Box-Muller
// normals) so no implementation-defined standard-library distribution appears
// in any reproducibility-bearing path.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    // Derived stream for a trial/worker index; deterministic, nestable.
    RngStream child(std::uint64_t index) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on [lo, hi).
    double uniform(double lo, double hi);
    // Uniform integer in [0, n); n > 0. Unbiased (rejection on the tail).
    std::uint64_t uniform_index(std::uint64_t n);
    // Standard normal via Box-Muller; one spare value is cached.
    double normal();

    // In-place Fisher-Yates shuffle with pinned draw order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Hex "key/stream/block/buffer-pos" snapshot for checkpoints and logs.
    std::string cursor_text() const;

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~static_cast<result_type>(0); }
    result_type operator()() { return next_u64(); }

private:
    RngStream() = default;

    std::uint64_t key_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;  // 4 marks the buffer empty
    double spare_normal_ = 0.0;
    bool has_spare_normal_ = false;

    void refill();
};

// SplitMix64 finalizer; used for key derivation and as a cheap stable hash.
std::uint64_t mix64(std::uint64_t x);

// Raw Philox4x32-10 block: counter words (block lo/hi, stream lo/hi), 64-bit
// key split into two 32-bit round keys. Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::uint64_t key, std::uint64_t stream,
                                           std::uint64_t block);

}  // namespace qaml
