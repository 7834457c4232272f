#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace csm {

/// Mono time-domain signal. Full scale is 1.0.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
};

/// Throws InvalidWaveform on a non-positive rate or non-finite samples.
void validate(const Waveform& w);

enum class WavEncoding { pcm16, float32 };

struct WriteResult {
  std::size_t clipped = 0;
};

/// Reads a mono RIFF/WAVE file, PCM16 (scaled by 1/32768) or IEEE float32.
Waveform read_wav(const std::filesystem::path& path);

/// PCM16 output saturates to [-1, 1 - 1/32768] and reports how many samples
/// were clipped. Float32 output is exact for float-representable samples.
WriteResult write_wav(const std::filesystem::path& path, const Waveform& w,
                      WavEncoding encoding = WavEncoding::pcm16);

}  // namespace csm
