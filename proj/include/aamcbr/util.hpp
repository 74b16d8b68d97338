#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace aamcbr {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

/// Seeded generator with platform-independent draws (the standard
/// distributions are implementation-defined, which breaks byte-identical output).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle_prefix(std::vector<T>& v, std::size_t k)
    {
        for (std::size_t i = 0; i < k && i + 1 < v.size(); ++i) {
            const auto j = i + below(v.size() - i);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Runs fn(0..count-1) on up to `limit` worker threads. The first exception
/// thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t limit, const std::function<void(std::size_t)>& fn);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace aamcbr
