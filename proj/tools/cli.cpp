#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "csm/consistency.hpp"
#include "csm/error.hpp"
#include "csm/masking.hpp"
#include "csm/metrics.hpp"
#include "csm/mixer.hpp"
#include "csm/optim.hpp"
#include "csm/signal_io.hpp"
#include "csm/stft.hpp"
#include "json.hpp"

namespace csm::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct FramingArgs {
  std::size_t n = 1024;
  std::size_t hop = 512;
  std::string window = "hann";

  void add_to(CLI::App& app) {
    app.add_option("--n", n, "Frame length N")->capture_default_str();
    app.add_option("--hop", hop, "Hop R")->capture_default_str();
    app.add_option("--window", window, "hann | rectangular")->capture_default_str();
  }

  StftConfig config() const { return make_config(n, hop, parse_window_kind(window)); }

  Json to_json() const { return Json{{"n", n}, {"hop", hop}, {"window", window}}; }
};

WavEncoding parse_encoding(const std::string& name) {
  if (name == "float32") return WavEncoding::float32;
  if (name == "pcm16") return WavEncoding::pcm16;
  throw Error(ErrorCode::InvalidParams, "unknown encoding '" + name + "'");
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return fs::path(p.string() + suffix);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  file << text;
  if (!file) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

Json manifest(const std::string& subcommand, Json params, Json inputs, Json outputs) {
  return Json{{"tool", "csm"},
              {"version", kToolVersion},
              {"subcommand", subcommand},
              {"params", std::move(params)},
              {"inputs", std::move(inputs)},
              {"outputs", std::move(outputs)}};
}

void write_manifest(const fs::path& out, const Json& m) {
  write_text(sibling(out, ".manifest.json"), m.dump(2) + "\n");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void require_same_rate(const Waveform& a, const Waveform& b) {
  if (a.sample_rate != b.sample_rate)
    throw Error(ErrorCode::RateMismatch, std::to_string(a.sample_rate) + " Hz vs " +
                                             std::to_string(b.sample_rate) + " Hz");
  if (a.size() != b.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(a.size()) + " vs " +
                                               std::to_string(b.size()) + " samples");
}

std::string canonical_mask(const std::string& name) {
  if (name == "csm" || name == "crm") return "csm";
  if (name == "irm") return "irm";
  throw Error(ErrorCode::InvalidParams, "unknown mask '" + name + "' (csm, crm, irm)");
}

// Oracle-masked spectrogram of the noisy signal under the named mask.
Spectrogram oracle_enhance(const std::string& mask, const Waveform& noisy, const Waveform& clean,
                           const StftConfig& c, double eps, double clip_bound,
                           std::size_t* clipped) {
  const Spectrogram Y = stft(noisy, c);
  const Spectrogram S = stft(clean, c);
  if (mask == "csm") {
    const MaskPair m = oracle_ratio_masks(S, Y, eps, clip_bound);
    if (clipped) *clipped = m.clipped;
    return apply_mask(Y, m);
  }
  Waveform noise = noisy;
  for (std::size_t i = 0; i < noise.size(); ++i) noise.samples[i] -= clean.samples[i];
  if (clipped) *clipped = 0;
  return apply_magnitude_mask(Y, oracle_irm(S, stft(noise, c)));
}

// --- mix --------------------------------------------------------------------

struct MixArgs {
  std::string clean;
  std::string noise;
  std::optional<std::uint64_t> noise_seed;
  std::vector<double> snr;
  std::string out;
  std::string encoding = "float32";
};

void cmd_mix(const MixArgs& a, std::ostream& out) {
  if (a.noise.empty() == !a.noise_seed)
    throw Error(ErrorCode::InvalidParams, "give exactly one of --noise or --noise-seed");
  const Waveform clean = read_wav(a.clean);
  std::optional<Waveform> noise;
  if (!a.noise.empty()) noise = read_wav(a.noise);

  for (double snr : a.snr) {
    const Mixture m = noise ? mix_at_snr(clean, *noise, snr)
                            : mix_with_white_noise(clean, snr, *a.noise_seed);
    fs::path path = a.out;
    if (a.snr.size() > 1) {
      std::ostringstream tag;
      tag << "_snr" << snr;
      path = sibling(a.out, tag.str() + fs::path(a.out).extension().string());
    }
    const WriteResult written = write_wav(path, m.noisy, parse_encoding(a.encoding));

    Json params{{"snr_db", snr}, {"encoding", a.encoding}};
    if (a.noise_seed) params["noise_seed"] = *a.noise_seed;
    Json inputs{{"clean", a.clean}};
    if (!a.noise.empty()) inputs["noise"] = a.noise;
    write_manifest(path, manifest("mix", params, inputs,
                                  Json{{"noisy", path.string()},
                                       {"achieved_snr_db", m.achieved_snr_db},
                                       {"noise_scale", m.noise_scale},
                                       {"clipped_samples", written.clipped}}));
    out << path.string() << ": achieved SNR " << fmt(m.achieved_snr_db) << " dB\n";
  }
}

// --- enhance-oracle ---------------------------------------------------------

struct EnhanceArgs {
  std::string noisy;
  std::string clean;
  std::string mask = "csm";
  std::string out;
  std::string report;
  double eps = kDefaultMaskEps;
  double clip_bound = kDefaultClipBound;
  std::string encoding = "float32";
  FramingArgs framing;
};

void cmd_enhance(const EnhanceArgs& a, std::ostream& out) {
  const std::string mask = canonical_mask(a.mask);
  const StftConfig c = a.framing.config();
  const Waveform noisy = read_wav(a.noisy);
  const Waveform clean = read_wav(a.clean);
  require_same_rate(noisy, clean);

  std::size_t clipped = 0;
  const Spectrogram enhanced_spec =
      oracle_enhance(mask, noisy, clean, c, a.eps, a.clip_bound, &clipped);
  const Waveform enhanced = istft(enhanced_spec);
  write_wav(a.out, enhanced, parse_encoding(a.encoding));

  const EvalReport report = evaluate(clean, enhanced, c, enhanced_spec);
  const fs::path report_path = a.report.empty() ? sibling(a.out, ".report.json") : fs::path(a.report);
  write_text(report_path, to_json(report) + "\n");

  Json params = a.framing.to_json();
  params["mask"] = mask;
  params["eps"] = a.eps;
  params["clip_bound"] = a.clip_bound;
  params["encoding"] = a.encoding;
  write_manifest(a.out, manifest("enhance-oracle", params,
                                 Json{{"noisy", a.noisy}, {"clean", a.clean}},
                                 Json{{"enhanced", a.out},
                                      {"report", report_path.string()},
                                      {"clipped_bins", clipped}}));
  out << to_json(report) << "\n";
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string noisy;
  std::string clean;
  std::string mode = "time";
  std::string trace;
  std::string out;
  std::string report;
  std::string init = "ones";
  std::string encoding = "float32";
  double beta = 2.0;
  FitOptions opts;
  FramingArgs framing;
};

void cmd_fit(const FitArgs& a, std::ostream& out) {
  const ObjectiveMode mode{parse_objective_kind(a.mode), a.beta};
  FitOptions opts = a.opts;
  if (a.init == "ones") {
    opts.init = MaskInit::ones;
  } else if (a.init == "zeros") {
    opts.init = MaskInit::zeros;
  } else {
    throw Error(ErrorCode::InvalidParams, "unknown init '" + a.init + "'");
  }
  const StftConfig c = a.framing.config();
  const Waveform noisy = read_wav(a.noisy);
  const Waveform clean = read_wav(a.clean);
  require_same_rate(noisy, clean);

  const Spectrogram Y = stft(noisy, c);
  const FitResult fit = fit_masks(Y, clean, mode, opts);
  const Spectrogram enhanced_spec = apply_mask(Y, fit.masks);
  const Waveform enhanced = istft(enhanced_spec);
  write_wav(a.out, enhanced, parse_encoding(a.encoding));

  std::ostringstream csv;
  csv << "iter,loss,time_domain_error,inconsistency\n";
  for (const TraceEntry& e : fit.trace)
    csv << e.iter << ',' << fmt(e.loss) << ',' << fmt(e.time_domain_error) << ','
        << fmt(e.inconsistency) << '\n';
  write_text(a.trace, csv.str());

  const EvalReport report = evaluate(clean, enhanced, c, enhanced_spec);
  const fs::path report_path = a.report.empty() ? sibling(a.out, ".report.json") : fs::path(a.report);
  write_text(report_path, to_json(report) + "\n");

  Json params = a.framing.to_json();
  params["mode"] = to_string(mode.kind);
  params["beta"] = mode.beta;
  params["eta"] = opts.step_size;
  params["iters"] = opts.max_iters;
  params["tol"] = opts.tol;
  params["block"] = opts.block_size;
  params["init"] = a.init;
  params["clip_bound"] = opts.clip_bound;
  params["encoding"] = a.encoding;
  write_manifest(a.out, manifest("fit", params, Json{{"noisy", a.noisy}, {"clean", a.clean}},
                                 Json{{"enhanced", a.out},
                                      {"trace", a.trace},
                                      {"report", report_path.string()},
                                      {"iterations_run", fit.trace.size() - 1}}));
  out << to_json(report) << "\n";
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string in;
  bool spec_from_wav = false;
  std::string mask;
  std::string clean;
  double eps = kDefaultMaskEps;
  double clip_bound = kDefaultClipBound;
  FramingArgs framing;
};

void cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const StftConfig c = a.framing.config();
  const Waveform input = read_wav(a.in);
  const Spectrogram S = stft(input, c);

  Json result{{"input", a.in},
              {"frames", S.frames()},
              {"bins", S.bins()},
              {"inconsistency", inconsistency(S)}};
  Json params = a.framing.to_json();
  Json inputs{{"in", a.in}};
  if (!a.mask.empty()) {
    if (a.clean.empty()) throw Error(ErrorCode::InvalidParams, "--mask requires --clean");
    const std::string mask = canonical_mask(a.mask);
    const Waveform clean = read_wav(a.clean);
    require_same_rate(input, clean);
    std::size_t clipped = 0;
    const Spectrogram masked = oracle_enhance(mask, input, clean, c, a.eps, a.clip_bound, &clipped);
    result["masked"] = Json{{"mask", mask}, {"inconsistency", inconsistency(masked)},
                            {"clipped_bins", clipped}};
    params["mask"] = mask;
    params["eps"] = a.eps;
    params["clip_bound"] = a.clip_bound;
    inputs["clean"] = a.clean;
  }
  result["manifest"] = manifest("analyze", params, inputs, Json::object());
  out << result.dump(2) << "\n";
}

// --- griffin-lim ------------------------------------------------------------

struct GriffinLimArgs {
  std::string in;
  std::size_t iters = 100;
  std::string out;
  std::string trace;
  std::string init = "zeros";
  std::uint64_t seed = 0;
  std::string encoding = "float32";
  FramingArgs framing;
};

void cmd_griffin_lim(const GriffinLimArgs& a, std::ostream& out) {
  InitPhase init = InitPhase::zeros;
  if (a.init == "random") {
    init = InitPhase::seeded_random;
  } else if (a.init != "zeros") {
    throw Error(ErrorCode::InvalidParams, "unknown init '" + a.init + "' (zeros, random)");
  }
  const StftConfig c = a.framing.config();
  const Waveform input = read_wav(a.in);
  const Eigen::MatrixXd magnitude = stft(input, c).data.cwiseAbs();
  const GriffinLimResult gl =
      griffin_lim(magnitude, c, a.iters, init, a.seed, input.size(), input.sample_rate);
  write_wav(a.out, gl.signal, parse_encoding(a.encoding));

  std::ostringstream csv;
  csv << "iter,magnitude_error,inconsistency\n";
  for (const GriffinLimStep& s : gl.trace)
    csv << s.iteration << ',' << fmt(s.magnitude_error) << ',' << fmt(s.inconsistency) << '\n';
  write_text(a.trace, csv.str());

  Json params = a.framing.to_json();
  params["iters"] = a.iters;
  params["init"] = a.init;
  params["seed"] = a.seed;
  params["encoding"] = a.encoding;
  write_manifest(a.out, manifest("griffin-lim", params, Json{{"in", a.in}},
                                 Json{{"reconstruction", a.out}, {"trace", a.trace}}));
  out << "magnitude error " << fmt(gl.trace.front().magnitude_error) << " -> "
      << fmt(gl.trace.back().magnitude_error) << "\n";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Divergence:
    case ErrorCode::ColaViolation:
      return 3;
    default:
      return 2;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consistency spectrogram masking toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  MixArgs mix;
  auto* mix_cmd = app.add_subcommand("mix", "Mix a clean signal with noise at target SNRs");
  mix_cmd->add_option("--clean", mix.clean, "Clean WAV")->required();
  auto* noise_opt = mix_cmd->add_option("--noise", mix.noise, "Noise WAV");
  auto* seed_opt = mix_cmd->add_option("--noise-seed", mix.noise_seed, "Seed for white noise");
  noise_opt->excludes(seed_opt);
  mix_cmd->add_option("--snr", mix.snr, "Target SNR in dB (repeatable)")->required();
  mix_cmd->add_option("--out", mix.out, "Output WAV")->required();
  mix_cmd->add_option("--encoding", mix.encoding, "float32 | pcm16")->capture_default_str();

  EnhanceArgs enhance;
  auto* enhance_cmd =
      app.add_subcommand("enhance-oracle", "Apply an oracle mask computed from the clean signal");
  enhance_cmd->add_option("--noisy", enhance.noisy, "Noisy WAV")->required();
  enhance_cmd->add_option("--clean", enhance.clean, "Clean WAV")->required();
  enhance_cmd->add_option("--mask", enhance.mask, "csm (alias crm) | irm")->capture_default_str();
  enhance_cmd->add_option("--out", enhance.out, "Enhanced WAV")->required();
  enhance_cmd->add_option("--report", enhance.report, "Report JSON (default <out>.report.json)");
  enhance_cmd->add_option("--eps", enhance.eps, "Ratio denominator guard")->capture_default_str();
  enhance_cmd->add_option("--clip", enhance.clip_bound, "Mask clip bound K")->capture_default_str();
  enhance_cmd->add_option("--encoding", enhance.encoding, "float32 | pcm16")->capture_default_str();
  enhance.framing.add_to(*enhance_cmd);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit masks by gradient descent on one objective");
  fit_cmd->add_option("--noisy", fit.noisy, "Noisy WAV")->required();
  fit_cmd->add_option("--clean", fit.clean, "Clean WAV")->required();
  fit_cmd->add_option("--mode", fit.mode, "spec | time")->capture_default_str();
  fit_cmd->add_option("--iters", fit.opts.max_iters, "Iteration budget")->capture_default_str();
  fit_cmd->add_option("--block", fit.opts.block_size, "Frames sharing one mask row")
      ->capture_default_str();
  fit_cmd->add_option("--eta", fit.opts.step_size, "Initial step size")->capture_default_str();
  fit_cmd->add_option("--tol", fit.opts.tol, "Relative decrease stop")->capture_default_str();
  fit_cmd->add_option("--init", fit.init, "ones | zeros")->capture_default_str();
  fit_cmd->add_option("--clip", fit.opts.clip_bound, "Clip bound K")->capture_default_str();
  fit_cmd->add_option("--beta", fit.beta, "Objective exponent (2 only)")->capture_default_str();
  fit_cmd->add_option("--trace", fit.trace, "Trace CSV")->required();
  fit_cmd->add_option("--out", fit.out, "Enhanced WAV")->required();
  fit_cmd->add_option("--report", fit.report, "Report JSON (default <out>.report.json)");
  fit_cmd->add_option("--encoding", fit.encoding, "float32 | pcm16")->capture_default_str();
  fit.framing.add_to(*fit_cmd);

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Report spectrogram inconsistency as JSON");
  analyze_cmd->add_option("--in", analyze.in, "Input WAV")->required();
  analyze_cmd->add_flag("--spec-from-wav", analyze.spec_from_wav,
                        "Analyze stft(input) (the default)");
  analyze_cmd->add_option("--mask", analyze.mask, "Also analyze an oracle-masked spectrogram");
  analyze_cmd->add_option("--clean", analyze.clean, "Clean WAV for the oracle mask");
  analyze_cmd->add_option("--eps", analyze.eps, "Ratio denominator guard")->capture_default_str();
  analyze_cmd->add_option("--clip", analyze.clip_bound, "Mask clip bound K")->capture_default_str();
  analyze.framing.add_to(*analyze_cmd);

  GriffinLimArgs gl;
  auto* gl_cmd = app.add_subcommand("griffin-lim", "Rebuild a signal from its STFT magnitude");
  gl_cmd->add_option("--in", gl.in, "Input WAV")->required();
  gl_cmd->add_option("--iters", gl.iters, "Iterations")->capture_default_str();
  gl_cmd->add_option("--out", gl.out, "Output WAV")->required();
  gl_cmd->add_option("--trace", gl.trace, "Trace CSV")->required();
  gl_cmd->add_option("--init", gl.init, "zeros | random")->capture_default_str();
  gl_cmd->add_option("--seed", gl.seed, "Seed for random init")->capture_default_str();
  gl_cmd->add_option("--encoding", gl.encoding, "float32 | pcm16")->capture_default_str();
  gl.framing.add_to(*gl_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*mix_cmd) cmd_mix(mix, out);
    if (*enhance_cmd) cmd_enhance(enhance, out);
    if (*fit_cmd) cmd_fit(fit, out);
    if (*analyze_cmd) cmd_analyze(analyze, out);
    if (*gl_cmd) cmd_griffin_lim(gl, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"csm"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace csm::cli
