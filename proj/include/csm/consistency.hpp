#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "csm/stft.hpp"

namespace csm {

/// C(S) = stft(istft(S)). Uses S.orig_len when present, otherwise the longest
/// signal that frames to S.frames() frames. C is linear and idempotent, and it
/// is the orthogonal projection onto consistent spectrograms under the
/// symmetry-weighted inner product.
Spectrogram consistency_operator(const Spectrogram& S);

/// ||S - C(S)||_F / ||S||_F, zero for an all-zero spectrogram.
double inconsistency(const Spectrogram& S);

enum class InitPhase { zeros, seeded_random };

struct GriffinLimStep {
  std::size_t iteration = 0;
  double magnitude_error = 0.0;  // weighted || |C(S_k)| - A || / || A ||
  double inconsistency = 0.0;    // inconsistency(S_k)
};

using GriffinLimTrace = std::vector<GriffinLimStep>;

struct GriffinLimResult {
  Waveform signal;
  GriffinLimTrace trace;  // iters + 1 entries, one per S_k
};

/// Classic alternating projection: S_0 = A e^{i phi_0},
/// S_{k+1} = A e^{i arg C(S_k)} with arg 0 := 0. Returns istft(S_iters).
/// Throws InvalidMagnitude on negative or non-finite entries.
GriffinLimResult griffin_lim(const Eigen::MatrixXd& magnitude, const StftConfig& c,
                             std::size_t iters, InitPhase init = InitPhase::zeros,
                             std::uint64_t seed = 0, std::optional<std::size_t> signal_len = std::nullopt,
                             int sample_rate = 16000);

}  // namespace csm
