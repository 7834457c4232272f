#include "csm/masking.hpp"

#include <algorithm>
#include <cmath>

#include "csm/error.hpp"

namespace csm {

namespace {

void require_mask_shape(const Spectrogram& S, const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != S.data.rows() || m.cols() != S.data.cols())
    throw Error(ErrorCode::ShapeMismatch, std::string(name) + " is " + std::to_string(m.rows()) +
                                              "x" + std::to_string(m.cols()) +
                                              ", spectrogram is " + std::to_string(S.frames()) +
                                              "x" + std::to_string(S.bins()));
}

double guarded_ratio(double num, double den, double eps) {
  const double mag = std::max(std::abs(den), eps);
  return num / (den < 0.0 ? -mag : mag);
}

}  // namespace

MaskPair MaskPair::constant(std::size_t frames, std::size_t bins, double value, double clip_bound) {
  const auto rows = static_cast<Eigen::Index>(frames);
  const auto cols = static_cast<Eigen::Index>(bins);
  return MaskPair{Eigen::MatrixXd::Constant(rows, cols, value),
                  Eigen::MatrixXd::Constant(rows, cols, value), clip_bound, 0};
}

MaskPair clip(MaskPair mask) {
  const double K = mask.clip_bound;
  mask.clipped = 0;
  for (Eigen::Index i = 0; i < mask.mr.size(); ++i) {
    double& r = mask.mr.data()[i];
    double& m = mask.mi.data()[i];
    if (r > K || r < -K || m > K || m < -K) ++mask.clipped;
    r = std::clamp(r, -K, K);
    m = std::clamp(m, -K, K);
  }
  return mask;
}

MaskPair oracle_ratio_masks(const Spectrogram& clean, const Spectrogram& noisy, double eps,
                            double clip_bound) {
  require_same_shape(clean, noisy);
  if (!(eps > 0.0) || !(clip_bound > 0.0))
    throw Error(ErrorCode::InvalidParams, "eps and clip bound must be positive");

  MaskPair mask = MaskPair::constant(clean.frames(), clean.bins(), 0.0, clip_bound);
  for (Eigen::Index t = 0; t < clean.data.rows(); ++t) {
    for (Eigen::Index f = 0; f < clean.data.cols(); ++f) {
      const auto s = clean.data(t, f);
      const auto y = noisy.data(t, f);
      mask.mr(t, f) = guarded_ratio(s.real(), y.real(), eps);
      mask.mi(t, f) = guarded_ratio(s.imag(), y.imag(), eps);
    }
  }
  return clip(std::move(mask));
}

MagnitudeMask oracle_irm(const Spectrogram& clean, const Spectrogram& noise) {
  require_same_shape(clean, noise);
  const Eigen::ArrayXXd ps = clean.data.cwiseAbs2().array();
  const Eigen::ArrayXXd pn = noise.data.cwiseAbs2().array();
  const Eigen::ArrayXXd total = ps + pn;
  MagnitudeMask mask;
  mask.m = (total > 0.0).select((ps / total).sqrt(), 0.0).matrix();
  return mask;
}

Spectrogram apply_mask(const Spectrogram& noisy, const MaskPair& mask) {
  require_mask_shape(noisy, mask.mr, "real mask");
  require_mask_shape(noisy, mask.mi, "imaginary mask");
  Spectrogram out = noisy;
  out.data.real() = mask.mr.cwiseProduct(noisy.data.real());
  out.data.imag() = mask.mi.cwiseProduct(noisy.data.imag());
  return out;
}

Spectrogram apply_magnitude_mask(const Spectrogram& noisy, const MagnitudeMask& mask) {
  require_mask_shape(noisy, mask.m, "magnitude mask");
  Spectrogram out = noisy;
  // m |Y| e^{i arg Y} == m Y, and avoids a round trip through polar form.
  out.data = noisy.data.cwiseProduct(mask.m.cast<std::complex<double>>());
  return out;
}

}  // namespace csm
