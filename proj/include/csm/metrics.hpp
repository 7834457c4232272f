#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "csm/signal_io.hpp"
#include "csm/stft.hpp"

namespace csm {

inline constexpr double kSnrCapDb = 300.0;

/// 10 log10(||ref||^2 / ||ref - est||^2), kSnrCapDb when the error vanishes.
double snr_db(const Waveform& ref, const Waveform& est);

struct SegmentalSnrOptions {
  std::size_t frame_len = 256;
  std::size_t hop = 128;
  double floor_db = -10.0;
  double ceil_db = 35.0;
};

/// Mean of clamped per-frame SNRs over full frames; frames of silent reference
/// are skipped. Throws NoValidFrames when nothing is left to average.
double segmental_snr(const Waveform& ref, const Waveform& est, const SegmentalSnrOptions& opts = {});

/// sqrt(sum_f w_f |S1 - S2|^2) with one-sided symmetry weights.
double spectrogram_distance(const Spectrogram& a, const Spectrogram& b);

struct EvalReport {
  double snr_db = 0.0;
  double seg_snr_db = 0.0;
  double spec_dist = 0.0;
  double inconsistency = 0.0;
  std::size_t n_samples = 0;
};

/// Scores `est` against `ref`. spec_dist compares their stfts under `c`;
/// inconsistency is measured on `estimate` when given (the spectrogram that
/// was resynthesized), else on stft(est).
EvalReport evaluate(const Waveform& ref, const Waveform& est, const StftConfig& c,
                    const std::optional<Spectrogram>& estimate = std::nullopt);

/// Flat JSON object, keys in field order.
std::string to_json(const EvalReport& r);
std::string csv_header(const EvalReport&);
std::string to_csv_row(const EvalReport& r);

}  // namespace csm
