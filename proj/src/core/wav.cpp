#include "wav.hpp"

#include <openssl/evp.h>

#include <bit>
#include <fstream>

#include "error.hpp"

namespace mrdaw {

namespace {

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) { out.insert(out.end(), tag, tag + 4); }

constexpr std::uint16_t kFormatIeeeFloat = 3;

}  // namespace

std::vector<std::uint8_t> encode_wav_float(std::span<const float> samples, std::uint32_t sample_rate) {
  const std::uint64_t data_bytes = std::uint64_t{samples.size()} * 4;
  if (data_bytes > 0xffffffffull - 64) throw Error(Errc::invalid_argument, "WAV data too large");

  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(data_bytes) + 56);
  put_tag(out, "RIFF");
  put_le32(out, static_cast<std::uint32_t>(4 + (8 + 16) + (8 + 4) + (8 + data_bytes)));
  put_tag(out, "WAVE");

  put_tag(out, "fmt ");
  put_le32(out, 16);
  put_le16(out, kFormatIeeeFloat);
  put_le16(out, 1);
  put_le32(out, sample_rate);
  put_le32(out, sample_rate * 4);
  put_le16(out, 4);
  put_le16(out, 32);

  // Non-PCM formats carry a frame count.
  put_tag(out, "fact");
  put_le32(out, 4);
  put_le32(out, static_cast<std::uint32_t>(samples.size()));

  put_tag(out, "data");
  put_le32(out, static_cast<std::uint32_t>(data_bytes));
  for (float s : samples) put_le32(out, std::bit_cast<std::uint32_t>(s));
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(Errc::io, "write failed for " + path.string());
}

std::vector<std::vector<float>> render_loop_period(const SessionState& state, const LoopStore& loops) {
  if (!state.master_len) throw Error(Errc::no_loops, "no loops recorded");
  SessionState s = state;
  s.transport = Transport::playing;
  s.playhead = 0;
  return render_session(s, loops, static_cast<std::size_t>(*state.master_len));
}

std::vector<std::filesystem::path> export_wav(const SessionState& state, const LoopStore& loops,
                                              const std::string& path_prefix) {
  const auto outputs = render_loop_period(state, loops);
  std::vector<std::filesystem::path> paths;
  for (std::size_t u = 0; u < outputs.size(); ++u) {
    std::filesystem::path p = path_prefix + "_u" + std::to_string(u + 1) + ".wav";
    write_file(p, encode_wav_float(outputs[u], state.config.sample_rate));
    paths.push_back(std::move(p));
  }
  return paths;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::io, "SHA-256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace mrdaw
