#pragma once

#include <cstdint>
#include <optional>

#include "csm/signal_io.hpp"

namespace csm {

/// noisy = clean + scaled_noise, sample by sample.
struct Mixture {
  Waveform noisy;
  Waveform clean;
  Waveform scaled_noise;
  double target_snr_db = 0.0;
  double achieved_snr_db = 0.0;
  double noise_scale = 0.0;
  std::optional<std::uint64_t> seed;
};

/// Mean power, sum x^2 / L.
double mean_power(const Waveform& w);

/// Scales the first clean.size() samples of `noise` by
/// sqrt(P_clean / (P_noise 10^{snr/10})) and adds them to `clean`.
Mixture mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db);

/// Mixes with gen_white_noise(seed) sized to the clean signal.
Mixture mix_with_white_noise(const Waveform& clean, double snr_db, std::uint64_t seed);

Waveform gen_sine(double freq_hz, double duration_s, int sample_rate, double amplitude = 1.0,
                  double phase = 0.0);

/// Uniform noise in [-amplitude, amplitude]. Each sample takes the top 53 bits
/// of one std::mt19937_64 draw, so the sequence depends only on the seed.
Waveform gen_white_noise(double duration_s, int sample_rate, std::uint64_t seed,
                         double amplitude = 1.0);

/// Sample count for a duration, rounded to the nearest sample.
std::size_t sample_count(double duration_s, int sample_rate);

}  // namespace csm
