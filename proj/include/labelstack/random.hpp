#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace labelstack {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a child seed from a master seed and a path of stream indices.
/// Every random consumer in the library draws from a seed derived this way,
/// so results never depend on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t h = mix64(master);
    for (auto p : path) {
        h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// Seeded engine with portable bounded draws.
///
/// std::uniform_int_distribution is implementation-defined, so bounded and
/// real draws are done by hand on top of mt19937_64 (whose output sequence is
/// fixed by the standard).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::size_t below(std::size_t bound)
    {
        const std::uint64_t b = bound;
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % b);
        std::uint64_t v = 0;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % b);
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

    /// Moves a uniform sample of k items (without replacement) into the
    /// first k positions. Remaining items are left in unspecified order.
    template <typename T>
    void partial_shuffle(std::span<T> items, std::size_t k)
    {
        const std::size_t n = items.size();
        for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
            std::swap(items[i], items[i + below(n - i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace labelstack
