#include "csm/optim.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "csm/consistency.hpp"
#include "csm/error.hpp"

namespace csm {

namespace {

void check_problem(const Spectrogram& noisy, const Waveform& clean, const ObjectiveMode& mode) {
  if (mode.beta != 2.0)
    throw Error(ErrorCode::UnsupportedBeta, "beta = " + std::to_string(mode.beta) +
                                                 "; only beta = 2 is supported");
  if (noisy.config.frame_count(clean.size()) != noisy.frames())
    throw Error(ErrorCode::LengthMismatch,
                "clean signal of length " + std::to_string(clean.size()) + " does not frame to " +
                    std::to_string(noisy.frames()) + " frames");
}

void check_mask(const MaskPair& mask, const Spectrogram& noisy) {
  for (const Eigen::MatrixXd* m : {&mask.mr, &mask.mi}) {
    if (m->rows() != noisy.data.rows() || m->cols() != noisy.data.cols())
      throw Error(ErrorCode::ShapeMismatch, "mask shape does not match spectrogram");
  }
}

// Everything the loss and its gradient need, evaluated once per mask.
struct Residual {
  Spectrogram estimate;
  Eigen::MatrixXcd spec_residual;  // spectrogram mode: S_hat - stft(x)
  Waveform time_residual;          // time mode: istft(S_hat) - x
  double loss = 0.0;
};

class Problem {
 public:
  Problem(const Spectrogram& noisy, const Waveform& clean, const ObjectiveMode& mode)
      : noisy_(noisy), clean_(clean), mode_(mode) {
    check_problem(noisy, clean, mode);
    if (mode.kind == ObjectiveKind::spectrogram) target_ = stft(clean, noisy.config).data;
  }

  Residual residual(const MaskPair& mask) const {
    Residual r{apply_mask(noisy_, mask), {}, {}, 0.0};
    if (mode_.kind == ObjectiveKind::spectrogram) {
      r.spec_residual = r.estimate.data - target_;
      r.loss = weighted_norm_sq(r.spec_residual, noisy_.config);
    } else {
      r.time_residual = istft(r.estimate, clean_.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < clean_.size(); ++i) {
        r.time_residual.samples[i] -= clean_.samples[i];
        sum += r.time_residual.samples[i] * r.time_residual.samples[i];
      }
      r.loss = sum;
    }
    return r;
  }

  MaskGradient gradient(const Residual& r) const {
    const Eigen::MatrixXd y_re = noisy_.data.real();
    const Eigen::MatrixXd y_im = noisy_.data.imag();
    MaskGradient g;
    if (mode_.kind == ObjectiveKind::spectrogram) {
      const Eigen::VectorXd two_w = 2.0 * noisy_.config.bin_weights();
      g.d_mr = y_re.cwiseProduct(r.spec_residual.real()) * two_w.asDiagonal();
      g.d_mi = y_im.cwiseProduct(r.spec_residual.imag()) * two_w.asDiagonal();
    } else {
      const Spectrogram back = istft_adjoint(r.time_residual, noisy_.config, noisy_.frames());
      g.d_mr = 2.0 * y_re.cwiseProduct(back.data.real());
      g.d_mi = 2.0 * y_im.cwiseProduct(back.data.imag());
    }
    return g;
  }

  double time_domain_error(const Residual& r) const {
    if (mode_.kind == ObjectiveKind::time_domain) return std::sqrt(r.loss);
    const Waveform est = istft(r.estimate, clean_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < clean_.size(); ++i) {
      const double d = est.samples[i] - clean_.samples[i];
      sum += d * d;
    }
    return std::sqrt(sum);
  }

 private:
  const Spectrogram& noisy_;
  const Waveform& clean_;
  ObjectiveMode mode_;
  Eigen::MatrixXcd target_;
};

}  // namespace

const char* to_string(ObjectiveKind kind) noexcept {
  switch (kind) {
    case ObjectiveKind::spectrogram: return "spec";
    case ObjectiveKind::time_domain: return "time";
  }
  return "unknown";
}

ObjectiveKind parse_objective_kind(const std::string& name) {
  if (name == "spec" || name == "spectrogram") return ObjectiveKind::spectrogram;
  if (name == "time" || name == "time_domain") return ObjectiveKind::time_domain;
  throw Error(ErrorCode::InvalidParams, "unknown objective mode '" + name + "'");
}

double loss_value(const MaskPair& mask, const Spectrogram& noisy, const Waveform& clean,
                  const ObjectiveMode& mode) {
  check_mask(mask, noisy);
  return Problem(noisy, clean, mode).residual(mask).loss;
}

MaskGradient loss_gradient(const MaskPair& mask, const Spectrogram& noisy, const Waveform& clean,
                           const ObjectiveMode& mode) {
  check_mask(mask, noisy);
  const Problem problem(noisy, clean, mode);
  return problem.gradient(problem.residual(mask));
}

Eigen::MatrixXd expand_blocks(const Eigen::MatrixXd& params, std::size_t frames,
                              std::size_t block) {
  Eigen::MatrixXd full(static_cast<Eigen::Index>(frames), params.cols());
  for (std::size_t t = 0; t < frames; ++t)
    full.row(static_cast<Eigen::Index>(t)) = params.row(static_cast<Eigen::Index>(t / block));
  return full;
}

Eigen::MatrixXd sum_blocks(const Eigen::MatrixXd& full, std::size_t block) {
  const auto frames = static_cast<std::size_t>(full.rows());
  Eigen::MatrixXd params =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>((frames + block - 1) / block), full.cols());
  for (std::size_t t = 0; t < frames; ++t)
    params.row(static_cast<Eigen::Index>(t / block)) += full.row(static_cast<Eigen::Index>(t));
  return params;
}

FitResult fit_masks(const Spectrogram& noisy, const Waveform& clean, const ObjectiveMode& mode,
                    const FitOptions& opts) {
  if (!(opts.step_size > 0.0) || opts.block_size == 0 || !(opts.tol >= 0.0) ||
      !(opts.clip_bound > 0.0))
    throw Error(ErrorCode::InvalidParams, "invalid fit options");
  const Problem problem(noisy, clean, mode);

  const std::size_t T = noisy.frames();
  const std::size_t B = opts.block_size;
  const double init = opts.init == MaskInit::ones ? 1.0 : 0.0;
  const auto rows = static_cast<Eigen::Index>((T + B - 1) / B);
  const auto cols = static_cast<Eigen::Index>(noisy.bins());
  Eigen::MatrixXd p_mr = Eigen::MatrixXd::Constant(rows, cols, init);
  Eigen::MatrixXd p_mi = Eigen::MatrixXd::Constant(rows, cols, init);

  auto masks_of = [&](const Eigen::MatrixXd& mr, const Eigen::MatrixXd& mi) {
    return MaskPair{expand_blocks(mr, T, B), expand_blocks(mi, T, B), opts.clip_bound, 0};
  };
  auto record = [&](FitResult& out, std::size_t iter, const Residual& r) {
    out.trace.push_back(
        TraceEntry{iter, r.loss, problem.time_domain_error(r), inconsistency(r.estimate)});
  };

  FitResult out;
  Residual current = problem.residual(masks_of(p_mr, p_mi));
  const double initial_loss = current.loss;
  record(out, 0, current);

  auto block_gradient = [&](const Residual& r) {
    const MaskGradient full = problem.gradient(r);
    return MaskGradient{sum_blocks(full.d_mr, B), sum_blocks(full.d_mi, B)};
  };

  MaskGradient grad = block_gradient(current);
  out.initial_gradient_norm = grad.norm();
  double step = opts.step_size;

  for (std::size_t iter = 1; iter <= opts.max_iters && current.loss > 0.0; ++iter) {
    bool accepted = false;
    bool blew_up = false;
    std::optional<Residual> trial;
    Eigen::MatrixXd t_mr;
    Eigen::MatrixXd t_mi;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      t_mr = p_mr - step * grad.d_mr;
      t_mi = p_mi - step * grad.d_mi;
      trial = problem.residual(masks_of(t_mr, t_mi));
      if (!std::isfinite(trial->loss) || trial->loss > 1e6 * initial_loss) blew_up = true;
      if (std::isfinite(trial->loss) && trial->loss <= current.loss) {
        accepted = true;
        break;
      }
      if (halving < kMaxHalvings) step *= 0.5;
    }
    if (!accepted) {
      if (blew_up)
        throw Error(ErrorCode::Divergence, "loss diverged at iteration " + std::to_string(iter) +
                                               " with step size " + std::to_string(step));
      break;  // no representable descent left
    }

    const double previous = current.loss;
    step *= kStepGrowth;
    p_mr = std::move(t_mr);
    p_mi = std::move(t_mi);
    current = std::move(*trial);
    record(out, iter, current);
    grad = block_gradient(current);
    if (previous > 0.0 && (previous - current.loss) / previous < opts.tol) break;
  }

  out.final_gradient_norm = grad.norm();
  out.final_step_size = step;
  out.masks = clip(masks_of(p_mr, p_mi));
  out.raw_mr = std::move(p_mr);
  out.raw_mi = std::move(p_mi);
  return out;
}

}  // namespace csm
