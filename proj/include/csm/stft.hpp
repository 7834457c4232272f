#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "csm/signal_io.hpp"

namespace csm {

enum class WindowKind { hann_periodic, rectangular };

const char* to_string(WindowKind kind) noexcept;
/// Accepts "hann", "hann_periodic" and "rectangular"/"rect"; throws InvalidParams otherwise.
WindowKind parse_window_kind(const std::string& name);

/// Real and imaginary DFT kernels, one row per one-sided bin (F x N):
/// cos_kernel(f, n) = cos(2 pi f n / N), sin_kernel(f, n) = sin(2 pi f n / N).
struct DftKernel {
  Eigen::MatrixXd cos_kernel;
  Eigen::MatrixXd sin_kernel;
};

/// Immutable framing description. Copies share the same window and kernel
/// storage, so a config is cheap to pass around and safe to share across threads.
class StftConfig {
 public:
  std::size_t frame_len() const noexcept;
  std::size_t hop() const noexcept;
  std::size_t n_bins() const noexcept;
  WindowKind window_kind() const noexcept;

  const Eigen::VectorXd& analysis_window() const noexcept;
  const Eigen::VectorXd& synthesis_window() const noexcept;
  const DftKernel& kernels() const noexcept;

  /// One-sided symmetry weights: 1 for bins 0 and N/2, 2 otherwise.
  const Eigen::VectorXd& bin_weights() const noexcept;

  /// Zero padding applied at each end before framing (N - R).
  std::size_t edge_pad() const noexcept { return frame_len() - hop(); }

  /// Frames needed so every sample of a length-`signal_len` signal sees its full
  /// set of overlapping windows.
  std::size_t frame_count(std::size_t signal_len) const noexcept;

  /// Longest signal whose framing yields exactly `frames` frames.
  std::size_t max_signal_len(std::size_t frames) const noexcept;

  bool same_geometry(const StftConfig& other) const noexcept;

  // Internal storage; constructed only by make_config.
  struct Impl;

 private:
  explicit StftConfig(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;

  friend StftConfig make_config(std::size_t, std::size_t, WindowKind);
};

/// Builds windows and kernels. The synthesis window is the canonical dual
/// W_s(k) = W_a(k) / sum_m W_a(k - mR)^2.
///
/// Throws InvalidParams for odd or zero frame length or a hop outside (0, N],
/// and ColaViolation when the overlap-added squared window vanishes or its
/// max/min ratio exceeds kMaxFrameCondition.
StftConfig make_config(std::size_t frame_len = 1024, std::size_t hop = 512,
                       WindowKind kind = WindowKind::hann_periodic);

inline constexpr double kMaxFrameCondition = 20.0;

struct FramePadding {
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t padded_len = 0;
};

struct FramedSignal {
  Eigen::MatrixXd frames;  // T x N, unwindowed
  FramePadding padding;
};

FramedSignal frame_signal(const Waveform& w, const StftConfig& c);

/// One-sided complex spectrogram, frames along rows and bins along columns.
struct Spectrogram {
  Eigen::MatrixXcd data;
  StftConfig config;
  std::optional<std::size_t> orig_len;
  int sample_rate = 16000;

  std::size_t frames() const noexcept { return static_cast<std::size_t>(data.rows()); }
  std::size_t bins() const noexcept { return static_cast<std::size_t>(data.cols()); }
  Eigen::MatrixXd re() const { return data.real(); }
  Eigen::MatrixXd im() const { return data.imag(); }

  static Spectrogram zeros(const StftConfig& c, std::size_t frames,
                           std::optional<std::size_t> orig_len = std::nullopt,
                           int sample_rate = 16000);
};

/// Throws ShapeMismatch unless both spectrograms share geometry and shape.
void require_same_shape(const Spectrogram& a, const Spectrogram& b);

Spectrogram stft(const Waveform& w, const StftConfig& c);

/// Inverse DFT per frame (bins expanded with conjugate symmetry, so imaginary
/// parts of bins 0 and N/2 are ignored), synthesis window, overlap-add, then the
/// analysis padding is stripped. Output length is `target_len`, else S.orig_len,
/// else MissingLength is thrown.
Waveform istft(const Spectrogram& S, std::optional<std::size_t> target_len = std::nullopt);

/// Adjoint of S -> istft(S) under the real inner product on (Re, Im) pairs.
/// `w.size()` must frame to exactly `frames` frames (LengthMismatch otherwise).
Spectrogram istft_adjoint(const Waveform& w, const StftConfig& c, std::size_t frames);

const DftKernel& dft_kernels(const StftConfig& c);

/// Squared norm of a one-sided T x F matrix with bins weighted as in
/// StftConfig::bin_weights, i.e. the norm of the full two-sided spectrum.
double weighted_norm_sq(const Eigen::MatrixXcd& data, const StftConfig& c);
double weighted_norm_sq(const Eigen::MatrixXd& data, const StftConfig& c);

}  // namespace csm
