#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rnndbn/numerics.hpp"

namespace rnndbn::data {

/// Full piano range: index 0 is A0 (MIDI 21), index 87 is C8 (MIDI 108).
inline constexpr std::size_t kPianoPitches = 88;
inline constexpr int kLowestMidiNote = 21;

/// Active pitch indices of one time step, sorted and unique.
struct Frame {
    std::vector<std::uint32_t> active;

    bool operator==(const Frame &) const = default;
};

struct SequenceData {
    std::vector<Frame> frames;

    bool operator==(const SequenceData &) const = default;
};

struct Dataset {
    std::string name;
    std::size_t num_pitches = kPianoPitches;
    std::vector<SequenceData> sequences;

    /// Throws DataError naming the first offending sequence/frame/value.
    void validate() const;
    std::size_t frame_count() const;

    bool operator==(const Dataset &) const = default;
};

/// Parses the piano-roll JSON document:
/// {"name": str, "num_pitches": int, "sequences": [[[int, ...], ...], ...]}.
/// Pitches within a frame may come in any order and are sorted on load.
Dataset parse_pianoroll(std::string_view text);
Dataset load_pianoroll(const std::filesystem::path &path);

/// Canonical text: fixed key order, sorted pitches, compact, trailing newline.
std::string to_pianoroll_text(const Dataset &d);
void save_pianoroll(const Dataset &d, const std::filesystem::path &path);

std::vector<Vec> to_binary_vectors(const SequenceData &s, std::size_t num_pitches);
Frame from_binary_vector(std::span<const double> v);
SequenceData from_binary_vectors(std::span<const Vec> frames);

/// Every sequence as a list of binary frame vectors.
std::vector<std::vector<Vec>> to_sequences(const Dataset &d);
/// All frames of all sequences, in order.
std::vector<Vec> to_frames(const Dataset &d);

/// Seeded shuffle of sequence order, then contiguous train/valid/test parts.
/// Each fraction must be positive and they must sum to 1 within 1e-9.
std::array<Dataset, 3> split(const Dataset &d, std::array<double, 3> fractions, std::uint64_t seed);

} // namespace rnndbn::data
