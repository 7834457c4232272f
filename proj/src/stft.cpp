#include "csm/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csm/error.hpp"

namespace csm {

struct StftConfig::Impl {
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  WindowKind kind = WindowKind::hann_periodic;
  Eigen::VectorXd analysis;
  Eigen::VectorXd synthesis;
  Eigen::VectorXd bin_weights;
  DftKernel kernels;
};

namespace {

// cos/sin of 2 pi k / N with exact values at quarter periods.
void trig_tables(std::size_t N, std::vector<double>& cos_table, std::vector<double>& sin_table) {
  cos_table.resize(N);
  sin_table.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
    cos_table[k] = std::cos(angle);
    sin_table[k] = std::sin(angle);
    if (4 * k == N || 4 * k == 3 * N) cos_table[k] = 0.0;
    if (k == 0 || 2 * k == N) sin_table[k] = 0.0;
    if (k == 0) cos_table[k] = 1.0;
    if (2 * k == N) cos_table[k] = -1.0;
    if (4 * k == N) sin_table[k] = 1.0;
    if (4 * k == 3 * N) sin_table[k] = -1.0;
  }
}

Eigen::VectorXd make_window(std::size_t N, WindowKind kind) {
  Eigen::VectorXd w(N);
  for (std::size_t n = 0; n < N; ++n) {
    switch (kind) {
      case WindowKind::hann_periodic:
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                    static_cast<double>(N));
        break;
      case WindowKind::rectangular:
        w[n] = 1.0;
        break;
    }
  }
  return w;
}

}  // namespace

const char* to_string(WindowKind kind) noexcept {
  switch (kind) {
    case WindowKind::hann_periodic: return "hann_periodic";
    case WindowKind::rectangular: return "rectangular";
  }
  return "unknown";
}

WindowKind parse_window_kind(const std::string& name) {
  if (name == "hann" || name == "hann_periodic") return WindowKind::hann_periodic;
  if (name == "rectangular" || name == "rect") return WindowKind::rectangular;
  throw Error(ErrorCode::InvalidParams, "unknown window '" + name + "'");
}

std::size_t StftConfig::frame_len() const noexcept { return impl_->frame_len; }
std::size_t StftConfig::hop() const noexcept { return impl_->hop; }
std::size_t StftConfig::n_bins() const noexcept { return impl_->frame_len / 2 + 1; }
WindowKind StftConfig::window_kind() const noexcept { return impl_->kind; }
const Eigen::VectorXd& StftConfig::analysis_window() const noexcept { return impl_->analysis; }
const Eigen::VectorXd& StftConfig::synthesis_window() const noexcept { return impl_->synthesis; }
const DftKernel& StftConfig::kernels() const noexcept { return impl_->kernels; }
const Eigen::VectorXd& StftConfig::bin_weights() const noexcept { return impl_->bin_weights; }

std::size_t StftConfig::frame_count(std::size_t signal_len) const noexcept {
  const std::size_t N = frame_len();
  const std::size_t R = hop();
  // Frames start every R samples on the signal padded by N - R at both ends.
  // The last original sample must be covered by the frame that starts on or
  // just before it.
  const std::size_t span = signal_len + N;  // (L + 2(N - R)) - N + 2R, kept unsigned
  if (span <= 2 * R) return 1;
  return (span - 2 * R + R - 1) / R + 1;
}

std::size_t StftConfig::max_signal_len(std::size_t frames) const noexcept {
  const std::size_t top = (frames + 1) * hop();
  return top > frame_len() ? top - frame_len() : 0;
}

bool StftConfig::same_geometry(const StftConfig& other) const noexcept {
  return impl_ == other.impl_ ||
         (frame_len() == other.frame_len() && hop() == other.hop() &&
          window_kind() == other.window_kind());
}

StftConfig make_config(std::size_t frame_len, std::size_t hop, WindowKind kind) {
  if (frame_len < 2 || frame_len % 2 != 0)
    throw Error(ErrorCode::InvalidParams, "frame length must be even and >= 2");
  if (hop == 0 || hop > frame_len)
    throw Error(ErrorCode::InvalidParams, "hop must lie in (0, frame length]");

  const std::size_t N = frame_len;
  const std::size_t R = hop;
  const std::size_t F = N / 2 + 1;

  auto impl = std::make_shared<StftConfig::Impl>();
  impl->frame_len = N;
  impl->hop = R;
  impl->kind = kind;
  impl->analysis = make_window(N, kind);

  // Overlap-added squared analysis window, periodic in R.
  Eigen::VectorXd overlap = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(R));
  for (std::size_t n = 0; n < N; ++n) overlap[n % R] += impl->analysis[n] * impl->analysis[n];
  const double hi = overlap.maxCoeff();
  const double lo = overlap.minCoeff();
  if (!(lo > 1e-9 * hi))
    throw Error(ErrorCode::ColaViolation, "overlap-added window vanishes for N=" +
                                              std::to_string(N) + ", R=" + std::to_string(R));
  if (hi / lo > kMaxFrameCondition)
    throw Error(ErrorCode::ColaViolation,
                "overlap-added window ratio " + std::to_string(hi / lo) + " exceeds " +
                    std::to_string(kMaxFrameCondition) + " for N=" + std::to_string(N) +
                    ", R=" + std::to_string(R));

  impl->synthesis.resize(static_cast<Eigen::Index>(N));
  for (std::size_t n = 0; n < N; ++n) impl->synthesis[n] = impl->analysis[n] / overlap[n % R];

  Eigen::VectorXd pr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(R));
  for (std::size_t n = 0; n < N; ++n) pr[n % R] += impl->analysis[n] * impl->synthesis[n];
  if ((pr.array() - 1.0).abs().maxCoeff() > 1e-9)
    throw Error(ErrorCode::ColaViolation, "perfect-reconstruction sum deviates from 1");

  std::vector<double> cos_table;
  std::vector<double> sin_table;
  trig_tables(N, cos_table, sin_table);
  impl->kernels.cos_kernel.resize(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(N));
  impl->kernels.sin_kernel.resize(static_cast<Eigen::Index>(F), static_cast<Eigen::Index>(N));
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t k = (f * n) % N;
      impl->kernels.cos_kernel(f, n) = cos_table[k];
      impl->kernels.sin_kernel(f, n) = sin_table[k];
    }
  }

  impl->bin_weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(F), 2.0);
  impl->bin_weights[0] = 1.0;
  impl->bin_weights[static_cast<Eigen::Index>(F - 1)] = 1.0;

  return StftConfig(std::move(impl));
}

FramedSignal frame_signal(const Waveform& w, const StftConfig& c) {
  if (w.empty()) throw Error(ErrorCode::InvalidWaveform, "cannot frame an empty signal");
  const std::size_t N = c.frame_len();
  const std::size_t R = c.hop();
  const std::size_t T = c.frame_count(w.size());

  FramedSignal out;
  out.padding.left = c.edge_pad();
  out.padding.padded_len = N + (T - 1) * R;
  out.padding.right = out.padding.padded_len - out.padding.left - w.size();

  std::vector<double> padded(out.padding.padded_len, 0.0);
  std::copy(w.samples.begin(), w.samples.end(),
            padded.begin() + static_cast<std::ptrdiff_t>(out.padding.left));

  out.frames.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(N));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t n = 0; n < N; ++n) out.frames(t, n) = padded[t * R + n];
  }
  return out;
}

Spectrogram Spectrogram::zeros(const StftConfig& c, std::size_t frames,
                               std::optional<std::size_t> orig_len, int sample_rate) {
  return Spectrogram{Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(frames),
                                            static_cast<Eigen::Index>(c.n_bins())),
                     c, orig_len, sample_rate};
}

void require_same_shape(const Spectrogram& a, const Spectrogram& b) {
  if (!a.config.same_geometry(b.config) || a.frames() != b.frames() || a.bins() != b.bins())
    throw Error(ErrorCode::ShapeMismatch,
                "spectrogram shapes differ: " + std::to_string(a.frames()) + "x" +
                    std::to_string(a.bins()) + " vs " + std::to_string(b.frames()) + "x" +
                    std::to_string(b.bins()));
}

Spectrogram stft(const Waveform& w, const StftConfig& c) {
  validate(w);
  const FramedSignal framed = frame_signal(w, c);
  const DftKernel& k = c.kernels();
  const Eigen::MatrixXd windowed = framed.frames * c.analysis_window().asDiagonal();

  Spectrogram S{Eigen::MatrixXcd(windowed.rows(), static_cast<Eigen::Index>(c.n_bins())), c,
                w.size(), w.sample_rate};
  S.data.real() = windowed * k.cos_kernel.transpose();
  S.data.imag() = -(windowed * k.sin_kernel.transpose());
  return S;
}

Waveform istft(const Spectrogram& S, std::optional<std::size_t> target_len) {
  const std::optional<std::size_t> len = target_len ? target_len : S.orig_len;
  if (!len) throw Error(ErrorCode::MissingLength, "spectrogram has no original length");

  const StftConfig& c = S.config;
  const std::size_t N = c.frame_len();
  const std::size_t R = c.hop();
  const std::size_t T = S.frames();

  Waveform out;
  out.sample_rate = S.sample_rate;
  out.samples.assign(*len, 0.0);
  if (T == 0) return out;

  const Eigen::MatrixXd re = S.data.real();
  const Eigen::MatrixXd im = S.data.imag();
  const DftKernel& k = c.kernels();
  const Eigen::VectorXd scale = c.bin_weights() / static_cast<double>(N);
  const Eigen::MatrixXd time =
      (re * scale.asDiagonal() * k.cos_kernel - im * scale.asDiagonal() * k.sin_kernel) *
      c.synthesis_window().asDiagonal();

  std::vector<double> padded(N + (T - 1) * R, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t n = 0; n < N; ++n) padded[t * R + n] += time(t, n);
  }
  const std::size_t left = c.edge_pad();
  for (std::size_t i = 0; i < *len && left + i < padded.size(); ++i) out.samples[i] = padded[left + i];
  return out;
}

Spectrogram istft_adjoint(const Waveform& w, const StftConfig& c, std::size_t frames) {
  if (frames == 0 || c.frame_count(w.size()) != frames)
    throw Error(ErrorCode::LengthMismatch, "signal of length " + std::to_string(w.size()) +
                                               " does not frame to " + std::to_string(frames) +
                                               " frames");
  const std::size_t N = c.frame_len();
  const std::size_t R = c.hop();

  std::vector<double> padded(N + (frames - 1) * R, 0.0);
  std::copy(w.samples.begin(), w.samples.end(),
            padded.begin() + static_cast<std::ptrdiff_t>(c.edge_pad()));

  Eigen::MatrixXd u(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(N));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < N; ++n) u(t, n) = padded[t * R + n] * c.synthesis_window()[n];
  }

  const DftKernel& k = c.kernels();
  const Eigen::VectorXd scale = c.bin_weights() / static_cast<double>(N);
  Spectrogram G{Eigen::MatrixXcd(u.rows(), static_cast<Eigen::Index>(c.n_bins())), c, w.size(),
                w.sample_rate};
  G.data.real() = u * k.cos_kernel.transpose() * scale.asDiagonal();
  G.data.imag() = -(u * k.sin_kernel.transpose() * scale.asDiagonal());
  return G;
}

const DftKernel& dft_kernels(const StftConfig& c) { return c.kernels(); }

double weighted_norm_sq(const Eigen::MatrixXcd& data, const StftConfig& c) {
  return (data.cwiseAbs2() * c.bin_weights()).sum();
}

double weighted_norm_sq(const Eigen::MatrixXd& data, const StftConfig& c) {
  return (data.cwiseAbs2() * c.bin_weights()).sum();
}

}  // namespace csm
