#include "csm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "csm/consistency.hpp"
#include "csm/error.hpp"

namespace csm {

namespace {

void check_pair(const Waveform& ref, const Waveform& est) {
  if (ref.size() != est.size())
    throw Error(ErrorCode::LengthMismatch, "reference has " + std::to_string(ref.size()) +
                                               " samples, estimate has " +
                                               std::to_string(est.size()));
  if (ref.sample_rate != est.sample_rate)
    throw Error(ErrorCode::RateMismatch, "reference and estimate sample rates differ");
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

double snr_db(const Waveform& ref, const Waveform& est) {
  check_pair(ref, est);
  double signal = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = ref.samples[i] - est.samples[i];
    signal += ref.samples[i] * ref.samples[i];
    error += d * d;
  }
  if (!(signal > 0.0)) throw Error(ErrorCode::DegenerateReference, "reference has zero power");
  if (error == 0.0) return kSnrCapDb;
  return std::min(kSnrCapDb, 10.0 * std::log10(signal / error));
}

double segmental_snr(const Waveform& ref, const Waveform& est, const SegmentalSnrOptions& opts) {
  check_pair(ref, est);
  if (opts.frame_len == 0 || opts.hop == 0)
    throw Error(ErrorCode::InvalidParams, "segment length and hop must be positive");

  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t start = 0; start + opts.frame_len <= ref.size(); start += opts.hop) {
    double signal = 0.0;
    double error = 0.0;
    for (std::size_t i = start; i < start + opts.frame_len; ++i) {
      const double d = ref.samples[i] - est.samples[i];
      signal += ref.samples[i] * ref.samples[i];
      error += d * d;
    }
    if (signal == 0.0) continue;
    const double snr = error == 0.0 ? opts.ceil_db : 10.0 * std::log10(signal / error);
    total += std::clamp(snr, opts.floor_db, opts.ceil_db);
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::NoValidFrames, "no full segment with nonzero reference");
  return total / static_cast<double>(used);
}

double spectrogram_distance(const Spectrogram& a, const Spectrogram& b) {
  require_same_shape(a, b);
  return std::sqrt(weighted_norm_sq(Eigen::MatrixXcd(a.data - b.data), a.config));
}

EvalReport evaluate(const Waveform& ref, const Waveform& est, const StftConfig& c,
                    const std::optional<Spectrogram>& estimate) {
  EvalReport r;
  r.snr_db = snr_db(ref, est);
  r.seg_snr_db = segmental_snr(ref, est);
  const Spectrogram est_spec = stft(est, c);
  r.spec_dist = spectrogram_distance(stft(ref, c), est_spec);
  r.inconsistency = inconsistency(estimate ? *estimate : est_spec);
  r.n_samples = ref.size();
  return r;
}

std::string to_json(const EvalReport& r) {
  std::ostringstream os;
  os << "{\"snr_db\":" << format_double(r.snr_db)
     << ",\"seg_snr_db\":" << format_double(r.seg_snr_db)
     << ",\"spec_dist\":" << format_double(r.spec_dist)
     << ",\"inconsistency\":" << format_double(r.inconsistency)
     << ",\"n_samples\":" << r.n_samples << "}";
  return os.str();
}

std::string csv_header(const EvalReport&) {
  return "snr_db,seg_snr_db,spec_dist,inconsistency,n_samples";
}

std::string to_csv_row(const EvalReport& r) {
  std::ostringstream os;
  os << format_double(r.snr_db) << ',' << format_double(r.seg_snr_db) << ','
     << format_double(r.spec_dist) << ',' << format_double(r.inconsistency) << ','
     << r.n_samples;
  return os.str();
}

}  // namespace csm
