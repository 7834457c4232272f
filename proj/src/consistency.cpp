#include "csm/consistency.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "csm/error.hpp"

namespace csm {

namespace {

std::size_t synthesis_length(const Spectrogram& S) {
  return S.orig_len ? *S.orig_len : S.config.max_signal_len(S.frames());
}

}  // namespace

Spectrogram consistency_operator(const Spectrogram& S) {
  const std::size_t len = synthesis_length(S);
  if (len == 0) return Spectrogram::zeros(S.config, S.frames(), S.orig_len, S.sample_rate);

  Spectrogram out = stft(istft(S, len), S.config);
  if (out.frames() != S.frames())
    throw Error(ErrorCode::ShapeMismatch, "spectrogram has " + std::to_string(S.frames()) +
                                              " frames but its length frames to " +
                                              std::to_string(out.frames()));
  out.orig_len = S.orig_len;
  return out;
}

double inconsistency(const Spectrogram& S) {
  const double norm = S.data.norm();
  if (norm == 0.0) return 0.0;
  return (S.data - consistency_operator(S).data).norm() / norm;
}

GriffinLimResult griffin_lim(const Eigen::MatrixXd& magnitude, const StftConfig& c,
                             std::size_t iters, InitPhase init, std::uint64_t seed,
                             std::optional<std::size_t> signal_len, int sample_rate) {
  if (magnitude.cols() != static_cast<Eigen::Index>(c.n_bins()) || magnitude.rows() == 0)
    throw Error(ErrorCode::ShapeMismatch, "magnitude must be T x " + std::to_string(c.n_bins()));
  if (!magnitude.allFinite() || (magnitude.array() < 0.0).any())
    throw Error(ErrorCode::InvalidMagnitude, "magnitude entries must be finite and nonnegative");

  const auto T = static_cast<std::size_t>(magnitude.rows());
  const std::size_t len = signal_len ? *signal_len : c.max_signal_len(T);
  if (c.frame_count(len) != T)
    throw Error(ErrorCode::LengthMismatch, "signal length " + std::to_string(len) +
                                               " does not frame to " + std::to_string(T) +
                                               " frames");

  Spectrogram S = Spectrogram::zeros(c, T, len, sample_rate);
  if (init == InitPhase::zeros) {
    S.data = magnitude.cast<std::complex<double>>();
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (Eigen::Index t = 0; t < S.data.rows(); ++t)
      for (Eigen::Index f = 0; f < S.data.cols(); ++f)
        S.data(t, f) = std::polar(magnitude(t, f), phase(rng));
  }

  const double ref = std::sqrt(weighted_norm_sq(magnitude, c));
  GriffinLimResult result;
  result.trace.reserve(iters + 1);

  for (std::size_t k = 0;; ++k) {
    const Spectrogram projected = consistency_operator(S);
    GriffinLimStep step;
    step.iteration = k;
    if (ref > 0.0) {
      step.magnitude_error =
          std::sqrt(weighted_norm_sq(Eigen::MatrixXd(projected.data.cwiseAbs() - magnitude), c)) / ref;
      const double norm = S.data.norm();
      step.inconsistency = norm > 0.0 ? (S.data - projected.data).norm() / norm : 0.0;
    }
    result.trace.push_back(step);
    if (k == iters) break;

    for (Eigen::Index t = 0; t < S.data.rows(); ++t) {
      for (Eigen::Index f = 0; f < S.data.cols(); ++f) {
        const std::complex<double> z = projected.data(t, f);
        const double angle = z == 0.0 ? 0.0 : std::arg(z);
        S.data(t, f) = std::polar(magnitude(t, f), angle);
      }
    }
  }

  result.signal = istft(S);
  return result;
}

}  // namespace csm
