#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace bab {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Rounded propagation speed; the published link-budget table uses it.
inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kCarrierHz = 915.0e6;

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Position&) const = default;
};

inline Position operator+(Position a, Position b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Position operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Position operator*(double s, Position a) { return {s * a.x, s * a.y, s * a.z}; }

inline double norm(Position a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }
inline double distance(Position a, Position b) { return norm(a - b); }
inline bool finite(Position a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Maps any angle into [0, 2pi).
inline double wrap_phase(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

// splitmix64 finalizer; used to derive independent per-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace bab
