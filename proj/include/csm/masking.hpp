#pragma once

#include <cstddef>

#include "csm/stft.hpp"

namespace csm {

inline constexpr double kDefaultMaskEps = 1e-12;
inline constexpr double kDefaultClipBound = 10.0;

/// Real-valued masks for the real and imaginary spectrogram components.
/// Masks produced by oracle_ratio_masks lie in [-clip_bound, clip_bound];
/// `clipped` counts time-frequency bins where either component hit the bound.
struct MaskPair {
  Eigen::MatrixXd mr;
  Eigen::MatrixXd mi;
  double clip_bound = kDefaultClipBound;
  std::size_t clipped = 0;

  static MaskPair constant(std::size_t frames, std::size_t bins, double value,
                           double clip_bound = kDefaultClipBound);
};

/// Ideal ratio mask in [0, 1], applied to the noisy magnitude.
struct MagnitudeMask {
  Eigen::MatrixXd m;
};

/// Componentwise oracle: MR = Re S / Re Y, MI = Im S / Im Y. A denominator d is
/// replaced by sign(d) max(|d|, eps) (sign(0) := +1) and results are clipped to
/// [-K, K].
MaskPair oracle_ratio_masks(const Spectrogram& clean, const Spectrogram& noisy,
                            double eps = kDefaultMaskEps, double clip_bound = kDefaultClipBound);

/// m = sqrt(|S|^2 / (|S|^2 + |N|^2)), 0 where both vanish.
MagnitudeMask oracle_irm(const Spectrogram& clean, const Spectrogram& noise);

/// S_hat = MR * Re Y + i MI * Im Y. Mask values are used as given.
Spectrogram apply_mask(const Spectrogram& noisy, const MaskPair& mask);

/// S_hat = m |Y| e^{i arg Y}, keeping the noisy phase.
Spectrogram apply_magnitude_mask(const Spectrogram& noisy, const MagnitudeMask& mask);

/// Clamps both masks to [-clip_bound, clip_bound] and refreshes the clip count.
MaskPair clip(MaskPair mask);

}  // namespace csm
