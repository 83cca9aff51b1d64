#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace adkit {

// splitmix64 step: advances `state` and returns the next output word.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Derives a child seed from (seed, tag) as splitmix64(seed ^ fnv1a64(tag)).
// Used to give cohorts, detectors and epochs independent streams that are
// reproducible from the run seed alone.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

// xoshiro256** generator seeded through splitmix64. The exact update rules
// are documented here so another implementation can reproduce every stream
// byte for byte:
//   seeding:  s[0..3] = four consecutive splitmix64 outputs of the seed
//   output:   rotl(s[1] * 5, 7) * 9
//   uniform double in [0,1): (next_u64() >> 11) * 2^-53
//   uniform double in (0,1]: ((next_u64() >> 11) + 1) * 2^-53
//   gaussian: Box-Muller cosine branch, one value per two uniforms,
//             mean + sd * sqrt(-2 ln u1) * cos(2 pi u2), u1 in (0,1]
//   below(n): next_u64() % n
//   shuffle:  Fisher-Yates, i from n-1 down to 1, j = below(i+1)
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    double next_unit();      // [0,1)
    double next_open_unit(); // (0,1]
    double uniform(double lo, double hi);
    double gaussian(double mean = 0.0, double sd = 1.0);
    std::uint64_t below(std::uint64_t n); // n >= 1

    template <class T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> s_{};
};

} // namespace adkit
