#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bab/types.hpp"

namespace bab::channel {

enum class SegmentKind { Air, SkinBoundary, Muscle, Insertion };
enum class Direction { Inbound, Outbound };

struct MediumSegment {
    SegmentKind kind = SegmentKind::Air;
    double length_m = 0.0;
    // Only meaningful for skin boundaries: entering (3 dB) or leaving (5 dB) tissue.
    Direction direction = Direction::Inbound;
};

MediumSegment air(double length_m);
MediumSegment muscle(double length_m);
MediumSegment skin_in();
MediumSegment skin_out();
MediumSegment insertion();

inline constexpr double kSkinInboundDb = 3.0;
inline constexpr double kSkinOutboundDb = 5.0;
inline constexpr double kInsertionDb = 30.0;
inline constexpr double kMuscleDbPerMeter = 460.0;  // 4.6 dB/cm

struct LinkBudget {
    std::vector<MediumSegment> segments;
    double total_loss_db = 0.0;
    double path_length_m = 0.0;        // geometric length of air + muscle segments
    double electrical_length_m = 0.0;  // muscle segments scaled by the refractive index
    double phase = 0.0;                // 2*pi*electrical_length/lambda mod 2*pi
};

// Free-space loss 20*log10(4*pi*d*f/c). Throws std::domain_error for d <= 0 or f <= 0.
double air_loss(double d_m, double f_hz = kCarrierHz);
// 4.6 dB/cm through the origin (anchors 2 cm -> 9.2 dB, 6 cm -> 27.6 dB).
double muscle_loss(double d_m);
double segment_loss(const MediumSegment& s, double f_hz = kCarrierHz);

// Sums per-segment losses. muscle_index scales the phase length inside tissue.
LinkBudget compose_budget(std::span<const MediumSegment> segments, double f_hz = kCarrierHz,
                          double muscle_index = 1.0);

// Reverses the segment order and swaps skin directions.
std::vector<MediumSegment> mirror(std::span<const MediumSegment> segments);

// Axis-aligned block of muscle tissue.
struct TissueBlock {
    Position lo;
    Position hi;
    double permittivity = 55.0;  // relative permittivity of muscle near 915 MHz

    bool contains(Position p) const;
    double refractive_index() const;
};

struct MediumMap {
    std::vector<TissueBlock> blocks;
};

// Splits the straight path tx->rx into air / skin / muscle segments. Inside tissue the
// ray is refracted toward the crossed face normal (Snell), so the muscle length is the
// depth along that normal divided by cos(theta_t).
std::vector<MediumSegment> trace_path(Position tx, Position rx, const MediumMap& medium);

struct ChannelConfig {
    double frequency_hz = kCarrierHz;
    double tx_gain_dbi = 4.0;
    std::uint64_t seed = 1;
    bool random_phase_offset = true;
    bool rayleigh = false;
    double rayleigh_scale = 0.3;  // std-dev of the scattered term relative to the direct path
};

struct ChannelCoeff {
    double gain = 0.0;
    double phase = 0.0;

    cplx value() const { return std::polar(gain, phase); }
};

LinkBudget path_budget(Position tx, Position rx, const MediumMap& medium,
                       double f_hz = kCarrierHz);

// Complex coefficient of the link. link_id keys the static per-link phase offset so
// it stays fixed while the receiver moves. Throws std::domain_error when tx == rx.
ChannelCoeff channel(Position tx, Position rx, const MediumMap& medium, const ChannelConfig& cfg,
                     std::uint64_t link_id);

// Static offset that channel() adds for this link.
double link_phase_offset(const ChannelConfig& cfg, std::uint64_t link_id);

}  // namespace bab::channel
