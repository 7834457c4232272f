#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <vector>

#include "csm/error.hpp"
#include "csm/signal_io.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace csm;
using csm::testing::TempDir;
using csm::testing::error_code_of;

namespace {

// Minimal hand-built RIFF header, independent of write_wav.
std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels,
                                    std::uint32_t rate, std::uint16_t bits,
                                    const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out;
  auto u16 = [&](std::uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8);
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  u32(36 + static_cast<std::uint32_t>(payload.size()));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  tag("data");
  u32(static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

void dump(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("pcm16 samples scale by 1/32768") {
  TempDir dir("io");
  // 0, 16384, -16384 little-endian
  dump(dir / "a.wav", wav_bytes(1, 1, 16000, 16, {0x00, 0x00, 0x00, 0x40, 0x00, 0xC0}));
  const Waveform w = read_wav(dir / "a.wav");
  CHECK(w.sample_rate == 16000);
  REQUIRE(w.size() == 3);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.samples[1] == 0.5);
  CHECK(w.samples[2] == -0.5);
}

TEST_CASE("pcm16 round trip stays within one LSB") {
  TempDir dir("io");
  Waveform w = csm::testing::random_signal(4000, 3);
  for (double& s : w.samples) s = std::clamp(0.3 * s, -1.0, 1.0 - 1.0 / 32768.0);
  const WriteResult r = write_wav(dir / "r.wav", w, WavEncoding::pcm16);
  CHECK(r.clipped == 0);
  const Waveform back = read_wav(dir / "r.wav");
  REQUIRE(back.size() == w.size());
  CHECK(csm::testing::max_abs_diff(back, w) <= 1.0 / 32768.0);
}

TEST_CASE("float32 round trip is bit identical for float-representable samples") {
  TempDir dir("io");
  Waveform w = csm::testing::random_signal(1000, 5, 22050);
  for (double& s : w.samples) s = static_cast<float>(s);
  write_wav(dir / "f.wav", w, WavEncoding::float32);
  const Waveform back = read_wav(dir / "f.wav");
  CHECK(back.sample_rate == 22050);
  CHECK(back.samples == w.samples);
}

TEST_CASE("pcm16 clipping saturates and is counted") {
  TempDir dir("io");
  const Waveform zeros{std::vector<double>(64, 0.0), 8000};
  CHECK(write_wav(dir / "z.wav", zeros).clipped == 0);
  CHECK(read_wav(dir / "z.wav").samples == zeros.samples);

  const Waveform loud{{0.25, 1.5, -2.0, 1.0}, 8000};
  const WriteResult r = write_wav(dir / "c.wav", loud);
  CHECK(r.clipped == 3);
  const Waveform back = read_wav(dir / "c.wav");
  CHECK(back.samples[0] == 0.25);
  CHECK(back.samples[1] == 1.0 - 1.0 / 32768.0);
  CHECK(back.samples[2] == -1.0);
  CHECK(back.samples[3] == 1.0 - 1.0 / 32768.0);
}

TEST_CASE("read errors") {
  TempDir dir("io");
  CHECK(error_code_of([&] { read_wav(dir / "missing.wav"); }) == ErrorCode::FileNotFound);

  dump(dir / "stereo.wav", wav_bytes(1, 2, 16000, 16, {0, 0, 0, 0}));
  CHECK(error_code_of([&] { read_wav(dir / "stereo.wav"); }) == ErrorCode::UnsupportedChannels);

  dump(dir / "pcm24.wav", wav_bytes(1, 1, 16000, 24, {0, 0, 0}));
  CHECK(error_code_of([&] { read_wav(dir / "pcm24.wav"); }) == ErrorCode::UnsupportedEncoding);

  dump(dir / "junk.wav", {'n', 'o', 't', ' ', 'a', ' ', 'w', 'a', 'v', 'e', '!', '!'});
  CHECK(error_code_of([&] { read_wav(dir / "junk.wav"); }) == ErrorCode::MalformedHeader);

  auto truncated = wav_bytes(1, 1, 16000, 16, {0, 0, 0, 0});
  truncated.resize(truncated.size() - 2);
  dump(dir / "trunc.wav", truncated);
  CHECK(error_code_of([&] { read_wav(dir / "trunc.wav"); }) == ErrorCode::MalformedHeader);
}

TEST_CASE("write rejects invalid waveforms") {
  TempDir dir("io");
  const Waveform nan{{0.0, std::numeric_limits<double>::quiet_NaN()}, 16000};
  CHECK(error_code_of([&] { write_wav(dir / "n.wav", nan); }) == ErrorCode::InvalidWaveform);
  const Waveform bad_rate{{0.0}, 0};
  CHECK(error_code_of([&] { write_wav(dir / "r.wav", bad_rate); }) == ErrorCode::InvalidWaveform);
  CHECK(error_code_of([&] { write_wav(dir.path() / "no_such_dir" / "x.wav", Waveform{{0.0}, 8000}); }) ==
        ErrorCode::IoError);
}
