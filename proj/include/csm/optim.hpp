#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "csm/masking.hpp"
#include "csm/stft.hpp"

namespace csm {

enum class ObjectiveKind {
  spectrogram,  // || S_hat - stft(x) ||^beta, weighted to the two-sided norm
  time_domain,  // || istft(S_hat) - x ||^beta
};

const char* to_string(ObjectiveKind kind) noexcept;
/// "spec"/"spectrogram" or "time"/"time_domain"; InvalidParams otherwise.
ObjectiveKind parse_objective_kind(const std::string& name);

struct ObjectiveMode {
  ObjectiveKind kind = ObjectiveKind::time_domain;
  double beta = 2.0;  // only 2 is supported
};

enum class MaskInit { ones, zeros };

struct FitOptions {
  double step_size = 0.01;
  std::size_t max_iters = 2000;
  double tol = 1e-10;
  std::size_t block_size = 1;  // consecutive frames sharing one mask row
  MaskInit init = MaskInit::ones;
  double clip_bound = kDefaultClipBound;
};

struct TraceEntry {
  std::size_t iter = 0;
  double loss = 0.0;
  double time_domain_error = 0.0;  // || istft(S_hat) - x ||_2
  double inconsistency = 0.0;      // inconsistency(S_hat)
};

using ConvergenceTrace = std::vector<TraceEntry>;

struct MaskGradient {
  Eigen::MatrixXd d_mr;
  Eigen::MatrixXd d_mi;

  double norm() const { return std::sqrt(d_mr.squaredNorm() + d_mi.squaredNorm()); }
};

struct FitResult {
  MaskPair masks;          // expanded to T x F and clipped
  Eigen::MatrixXd raw_mr;  // unclipped block parameters, ceil(T/B) x F
  Eigen::MatrixXd raw_mi;
  ConvergenceTrace trace;
  double final_step_size = 0.0;
  double initial_gradient_norm = 0.0;
  double final_gradient_norm = 0.0;
};

/// Loss at the given mask values (no clipping). Throws ShapeMismatch,
/// LengthMismatch or UnsupportedBeta.
double loss_value(const MaskPair& mask, const Spectrogram& noisy, const Waveform& clean,
                  const ObjectiveMode& mode);

/// Exact gradient with respect to every entry of mask.mr and mask.mi.
MaskGradient loss_gradient(const MaskPair& mask, const Spectrogram& noisy, const Waveform& clean,
                           const ObjectiveMode& mode);

/// Repeats each parameter row `block` times and keeps the first `frames` rows.
Eigen::MatrixXd expand_blocks(const Eigen::MatrixXd& params, std::size_t frames, std::size_t block);

/// Adjoint of expand_blocks: sums rows within each block.
Eigen::MatrixXd sum_blocks(const Eigen::MatrixXd& full, std::size_t block);

/// Gradient descent on block-shared masks, starting from opts.step_size. Steps
/// are accepted only when the loss does not increase; a rejected step halves
/// the step size, at most kMaxHalvings times per iteration, and an accepted one
/// lets the next iteration try kStepGrowth times the step. Stops at max_iters,
/// when the relative loss decrease drops below tol, or when no halved step can
/// lower the loss at working precision. Throws Divergence when every halved
/// trial is non-finite or exceeds 1e6 times the initial loss.
FitResult fit_masks(const Spectrogram& noisy, const Waveform& clean, const ObjectiveMode& mode,
                    const FitOptions& opts = {});

inline constexpr int kMaxHalvings = 30;
inline constexpr double kStepGrowth = 2.0;

}  // namespace csm
