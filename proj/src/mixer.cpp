#include "csm/mixer.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "csm/error.hpp"

namespace csm {

namespace {

std::vector<double> uniform_samples(std::size_t n, std::uint64_t seed, double amplitude) {
  std::vector<double> out(n);
  std::mt19937_64 rng(seed);
  for (double& s : out) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    s = amplitude * (2.0 * u - 1.0);
  }
  return out;
}

}  // namespace

double mean_power(const Waveform& w) {
  if (w.empty()) return 0.0;
  double sum = 0.0;
  for (double s : w.samples) sum += s * s;
  return sum / static_cast<double>(w.size());
}

std::size_t sample_count(double duration_s, int sample_rate) {
  if (!(duration_s > 0.0) || sample_rate <= 0)
    throw Error(ErrorCode::InvalidParams, "duration and sample rate must be positive");
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

Mixture mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  validate(clean);
  validate(noise);
  if (clean.sample_rate != noise.sample_rate)
    throw Error(ErrorCode::RateMismatch, std::to_string(clean.sample_rate) + " Hz vs " +
                                             std::to_string(noise.sample_rate) + " Hz");
  if (noise.size() < clean.size())
    throw Error(ErrorCode::NoiseTooShort, "noise has " + std::to_string(noise.size()) +
                                              " samples, clean has " +
                                              std::to_string(clean.size()));
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::InvalidParams, "SNR must be finite");

  Waveform truncated{std::vector<double>(noise.samples.begin(),
                                         noise.samples.begin() +
                                             static_cast<std::ptrdiff_t>(clean.size())),
                     noise.sample_rate};
  const double p_clean = mean_power(clean);
  const double p_noise = mean_power(truncated);
  if (!(p_clean > 0.0)) throw Error(ErrorCode::DegenerateSignal, "clean signal has zero power");
  if (!(p_noise > 0.0)) throw Error(ErrorCode::DegenerateSignal, "noise has zero power");

  Mixture m;
  m.target_snr_db = snr_db;
  m.noise_scale = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  m.clean = clean;
  m.scaled_noise = std::move(truncated);
  for (double& s : m.scaled_noise.samples) s *= m.noise_scale;
  m.noisy = clean;
  for (std::size_t i = 0; i < clean.size(); ++i) m.noisy.samples[i] += m.scaled_noise.samples[i];
  m.achieved_snr_db = 10.0 * std::log10(p_clean / mean_power(m.scaled_noise));
  return m;
}

Mixture mix_with_white_noise(const Waveform& clean, double snr_db, std::uint64_t seed) {
  const Waveform noise{uniform_samples(clean.size(), seed, 1.0), clean.sample_rate};
  Mixture m = mix_at_snr(clean, noise, snr_db);
  m.seed = seed;
  return m;
}

Waveform gen_sine(double freq_hz, double duration_s, int sample_rate, double amplitude,
                  double phase) {
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidParams, "sample rate must be positive");
  if (!(freq_hz > 0.0) || !(freq_hz < sample_rate / 2.0))
    throw Error(ErrorCode::InvalidFrequency,
                std::to_string(freq_hz) + " Hz is outside (0, " +
                    std::to_string(sample_rate / 2.0) + ") Hz");
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(sample_count(duration_s, sample_rate));
  for (std::size_t n = 0; n < w.size(); ++n) {
    w.samples[n] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(n) /
                                            sample_rate +
                                        phase);
  }
  return w;
}

Waveform gen_white_noise(double duration_s, int sample_rate, std::uint64_t seed,
                         double amplitude) {
  return Waveform{uniform_samples(sample_count(duration_s, sample_rate), seed, amplitude),
                  sample_rate};
}

}  // namespace csm
