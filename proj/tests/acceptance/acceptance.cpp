// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "csm/consistency.hpp"
#include "csm/masking.hpp"
#include "csm/metrics.hpp"
#include "csm/mixer.hpp"
#include "csm/optim.hpp"
#include "csm/stft.hpp"
#include "test_support.hpp"

using namespace csm;
using csm::testing::max_abs_diff;
using csm::testing::random_matrix;
using csm::testing::random_signal;
using csm::testing::random_spectrogram;
using csm::testing::real_inner;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double floor = 0.0) {
  return (a - b).norm() / std::max(floor, b.norm());
}

Outcome perfect_reconstruction() {
  const auto start = std::chrono::steady_clock::now();
  const StftConfig c = make_config(1024, 512);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t len = 1000 + rng() % 49001;
    const Waveform x = random_signal(len, seed);
    worst = std::max(worst, max_abs_diff(x, istft(stft(x, c))));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-10 && secs < 10.0,
          fmt("max |error| %.3g over 20 signals in %.2f s (limits 1e-10, 10 s)", worst, secs)};
}

Outcome consistency_operator_properties() {
  const StftConfig c = make_config(1024, 512);
  const std::size_t frames = 12;
  double idem = 0.0;
  double fixed = 0.0;
  double leak = 0.0;
  double lin = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Spectrogram S = random_spectrogram(c, frames, seed);
    const Spectrogram CS = consistency_operator(S);
    idem = std::max(idem, rel(consistency_operator(CS).data, CS.data, 1.0));

    const Spectrogram X = stft(random_signal(4000 + 100 * seed, seed + 100), c);
    fixed = std::max(fixed, rel(consistency_operator(X).data, X.data));

    const auto t0 = static_cast<Eigen::Index>(1 + seed % (frames - 2));
    Spectrogram P = S;
    P.data.row(t0) += random_spectrogram(c, 1, seed + 200).data.row(0);
    const Eigen::MatrixXcd delta = consistency_operator(P).data - CS.data;
    for (Eigen::Index t = 0; t < delta.rows(); ++t)
      if (std::abs(t - t0) > 1) leak = std::max(leak, delta.row(t).cwiseAbs().maxCoeff());

    const Spectrogram S2 = random_spectrogram(c, frames, seed + 300);
    Spectrogram mix = S;
    mix.data = 1.7 * S.data - 0.4 * S2.data;
    lin = std::max(lin, rel(consistency_operator(mix).data,
                            1.7 * CS.data - 0.4 * consistency_operator(S2).data));
  }
  return {idem <= 1e-10 && fixed <= 1e-10 && leak <= 1e-12 && lin <= 1e-10,
          fmt("idempotence %.3g, fixed point %.3g, leakage outside t0+-1 %.3g, linearity %.3g "
              "(limits 1e-10, 1e-10, 1e-12, 1e-10)",
              idem, fixed, leak, lin)};
}

Outcome adjoint_dot_test() {
  const StftConfig c = make_config(1024, 512);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t len = 3000 + 97 * seed;
    const std::size_t frames = c.frame_count(len);
    const Spectrogram S = random_spectrogram(c, frames, seed, len);
    const Waveform w = random_signal(len, seed + 1000);
    const Waveform AS = istft(S);
    double lhs = 0.0;
    double as_sq = 0.0;
    double w_sq = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      lhs += AS.samples[i] * w.samples[i];
      as_sq += AS.samples[i] * AS.samples[i];
      w_sq += w.samples[i] * w.samples[i];
    }
    const double rhs = real_inner(S.data, istft_adjoint(w, c, frames).data);
    const double scale = std::max(1.0, std::sqrt(as_sq * w_sq));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return {worst <= 1e-10, fmt("max |<As,w> - <s,A*w>| / scale %.3g over 50 pairs (limit 1e-10)", worst)};
}

Outcome gradient_check() {
  const StftConfig c = make_config(8, 4);
  const Waveform clean = random_signal(20, 1);
  Waveform noisy = clean;
  const Waveform noise = random_signal(20, 2);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy.samples[i] += noise.samples[i];
  const Spectrogram Y = stft(noisy, c);
  const auto T = static_cast<Eigen::Index>(Y.frames());
  const auto F = static_cast<Eigen::Index>(Y.bins());
  const MaskPair m{random_matrix(T, F, 3, -2, 2), random_matrix(T, F, 4, -2, 2)};
  const double h = 1e-6;
  double worst = 0.0;
  for (ObjectiveKind kind : {ObjectiveKind::spectrogram, ObjectiveKind::time_domain}) {
    const ObjectiveMode mode{kind, 2.0};
    const MaskGradient g = loss_gradient(m, Y, clean, mode);
    std::mt19937_64 rng(kind == ObjectiveKind::spectrogram ? 5 : 6);
    for (int k = 0; k < 20; ++k) {
      const auto t = static_cast<Eigen::Index>(rng() % T);
      const auto f = static_cast<Eigen::Index>(rng() % F);
      const bool re = (rng() & 1) != 0;
      MaskPair p = m;
      Eigen::MatrixXd& target = re ? p.mr : p.mi;
      target(t, f) += h;
      const double up = loss_value(p, Y, clean, mode);
      target(t, f) -= 2.0 * h;
      const double down = loss_value(p, Y, clean, mode);
      const double fd = (up - down) / (2.0 * h);
      const double an = re ? g.d_mr(t, f) : g.d_mi(t, f);
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-300});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return {worst <= 1e-6, fmt("T = %d, max relative error %.3g over 2 x 20 coordinates (limit 1e-6)",
                             static_cast<int>(T), worst)};
}

Outcome oracle_exactness() {
  const StftConfig c = make_config(1024, 512);
  const Waveform clean = gen_sine(440.0, 1.0, 16000, 0.5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mixture mix = mix_with_white_noise(clean, 0.0, seed);
    const Spectrogram S = stft(clean, c);
    const Spectrogram Y = stft(mix.noisy, c);
    const MaskPair m = oracle_ratio_masks(S, Y);
    const double frac = static_cast<double>(m.clipped) / static_cast<double>(S.frames() * S.bins());
    if (frac >= 1e-3) continue;
    const double snr = snr_db(clean, istft(apply_mask(Y, m)));
    return {snr >= 50.0, fmt("seed %d, %.4f%% bins clipped, enhanced SNR %.2f dB (limit 50 dB)",
                             static_cast<int>(seed), 100.0 * frac, snr)};
  }
  return {false, "no seed in 0..9 clipped fewer than 0.1% of bins"};
}

Outcome phase_artifact_ordering() {
  const StftConfig c = make_config(1024, 512);
  const Waveform clean = gen_sine(440.0, 1.0, 16000, 0.5);
  int wins = 0;
  double min_gap = 1e300;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mixture mix = mix_with_white_noise(clean, 0.0, seed);
    const Spectrogram S = stft(clean, c);
    const Spectrogram Y = stft(mix.noisy, c);
    const double csm = snr_db(clean, istft(apply_mask(Y, oracle_ratio_masks(S, Y))));
    const double irm = snr_db(clean, istft(apply_magnitude_mask(Y, oracle_irm(S, stft(mix.scaled_noise, c)))));
    wins += csm > irm;
    min_gap = std::min(min_gap, csm - irm);
  }
  return {wins == 10, fmt("ratio mask beats IRM in %d/10 seeds, smallest margin %.2f dB", wins, min_gap)};
}

Outcome convergence_comparison() {
  const StftConfig c = make_config(64, 32);
  const Waveform clean = gen_sine(440.0, 0.25, 8000, 0.5);
  const FitOptions opts{.max_iters = 500, .block_size = 4};
  int wins = 0;
  double worst_gap = 0.0;
  double worst_incons = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mixture mix = mix_with_white_noise(clean, 0.0, seed);
    const Spectrogram Y = stft(mix.noisy, c);
    const FitResult time = fit_masks(Y, clean, {ObjectiveKind::time_domain, 2.0}, opts);
    const FitResult spec = fit_masks(Y, clean, {ObjectiveKind::spectrogram, 2.0}, opts);
    wins += time.trace.back().time_domain_error <= spec.trace.back().time_domain_error;

    const MaskPair fitted{expand_blocks(time.raw_mr, Y.frames(), 4), expand_blocks(time.raw_mi, Y.frames(), 4)};
    const Spectrogram est = apply_mask(Y, fitted);
    const Spectrogram projected = consistency_operator(est);
    const Waveform y = istft(projected, clean.size());
    double projected_loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) projected_loss += std::pow(y.samples[i] - clean.samples[i], 2);
    const double loss = time.trace.back().loss;
    worst_gap = std::max(worst_gap, std::abs(loss - projected_loss) / std::max(1.0, loss));
    worst_incons = std::max(worst_incons, inconsistency(projected));
  }
  return {wins >= 9 && worst_gap <= 1e-10 && worst_incons <= 1e-10,
          fmt("time objective ends no worse in %d/10 seeds (need 9); projected-loss gap %.3g, "
              "inconsistency of C(S_hat) %.3g (limits 1e-10)",
              wins, worst_gap, worst_incons)};
}

Outcome griffin_lim_criterion() {
  const StftConfig big = make_config(1024, 512);
  const Eigen::MatrixXd A = stft(random_signal(16000, 3), big).data.cwiseAbs();
  const GriffinLimResult mono = griffin_lim(A, big, 100, InitPhase::zeros, 0, 16000);
  double worst_rise = -1e300;
  for (std::size_t k = 1; k < mono.trace.size(); ++k)
    worst_rise = std::max(worst_rise, mono.trace[k].magnitude_error - mono.trace[k - 1].magnitude_error);

  const StftConfig c = make_config(512, 256);
  const Waveform x = gen_sine(440.0, 1.0, 16000);
  const GriffinLimResult sine = griffin_lim(stft(x, c).data.cwiseAbs(), c, 50, InitPhase::zeros, 0, x.size());
  const double ratio = sine.trace.back().magnitude_error / sine.trace.front().magnitude_error;
  return {worst_rise <= 1e-12 && ratio <= 0.1,
          fmt("largest step increase %.3g over 100 iterations (slack 1e-12); sine error ratio after 50 "
              "iterations %.4f (limit 0.1)",
              worst_rise, ratio)};
}

Outcome mixer_grid() {
  const Waveform clean = gen_sine(440.0, 1.0, 16000, 0.5);
  double worst = 0.0;
  for (double snr : {-6.0, -3.0, 0.0, 3.0, 6.0}) {
    const Mixture m = mix_with_white_noise(clean, snr, 7);
    worst = std::max(worst, std::abs(snr_db(clean, m.noisy) - snr));
  }
  return {worst <= 0.01, fmt("max |achieved - target| %.3g dB over {-6,-3,0,3,6} (limit 0.01 dB)", worst)};
}

Outcome resynthesis_identity() {
  const StftConfig c = make_config(1024, 512);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t len = 5000 + 211 * seed;
    const Spectrogram Y = stft(random_signal(len, seed), c);
    const auto T = static_cast<Eigen::Index>(Y.frames());
    const MaskPair m{random_matrix(T, 513, seed + 40, -3, 3), random_matrix(T, 513, seed + 80, -3, 3)};
    const Spectrogram est = apply_mask(Y, m);
    worst = std::max(worst, max_abs_diff(istft(est), istft(consistency_operator(est))));
  }
  return {worst <= 1e-10, fmt("max |istft(S_hat) - istft(C(S_hat))| %.3g over 20 masked spectrograms (limit 1e-10)", worst)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"perfect reconstruction", perfect_reconstruction},
      {"consistency operator", consistency_operator_properties},
      {"adjoint dot-test", adjoint_dot_test},
      {"gradient check", gradient_check},
      {"oracle exactness", oracle_exactness},
      {"phase-artifact ordering", phase_artifact_ordering},
      {"convergence comparison", convergence_comparison},
      {"griffin-lim", griffin_lim_criterion},
      {"mixer SNR grid", mixer_grid},
      {"resynthesis identity", resynthesis_identity},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o{false, ""};
    try {
      o = check();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
