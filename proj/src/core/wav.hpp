#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "audio.hpp"
#include "session.hpp"

namespace mrdaw {

// Mono IEEE-float RIFF/WAVE, little-endian.
std::vector<std::uint8_t> encode_wav_float(std::span<const float> samples, std::uint32_t sample_rate);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// One loop period per user, from the loop start with the transport running
// and silent talkback. Throws Error(no_loops) when no loop length exists.
std::vector<std::vector<float>> render_loop_period(const SessionState& state, const LoopStore& loops);

// Writes <prefix>_u<user>.wav for every user and returns the paths.
std::vector<std::filesystem::path> export_wav(const SessionState& state, const LoopStore& loops,
                                              const std::string& path_prefix);

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

}  // namespace mrdaw
