// btristd: batch front-end for the detection library.
//
//   btristd synth        --out DIR [--height --width --frames --background --noise --target ...]
//   btristd detect       --input FRAMES --out DIR
//   btristd analyze-corr --input FRAMES|TENSOR --out DIR
//   btristd eval         --input TARGET_MAPS --gt FILE --out DIR
//   btristd pipeline     --out DIR            (synth -> detect -> eval)
//
// Flags may appear before or after the subcommand; --config FILE reads flat
// `key = value` lines whose keys are the long flag names.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "btristd.hpp"

namespace fs = std::filesystem;
using namespace btristd;

namespace {

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) fail(ErrorKind::Parameter, "bad " + what + " value '" + text + "'");
    out.push_back(v);
  }
  return out;
}

BtrRanks parse_ranks(const std::string& text) {
  const auto v = split_numbers(text, "--ranks");
  if (v.size() != 3) fail(ErrorKind::Parameter, "--ranks expects R1,R,R2");
  for (double x : v)
    if (!(x >= 1.0) || x != std::floor(x)) fail(ErrorKind::Parameter, "ranks must be positive integers");
  return {static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), static_cast<std::size_t>(v[2])};
}

SynthTarget parse_target(const std::string& text) {
  const auto v = split_numbers(text, "--target");
  if (v.size() != 6) fail(ErrorKind::Parameter, "--target expects row,col,v_row,v_col,amplitude,radius");
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

/// Removes everything it recorded unless disarmed; keeps a failed run from
/// leaving half-written outputs behind.
class OutputGuard {
 public:
  fs::path dir(const fs::path& p) {
    std::vector<fs::path> fresh;
    for (fs::path q = p; !q.empty() && !fs::exists(q); q = q.parent_path()) fresh.push_back(q);
    fs::create_directories(p);
    created_.insert(created_.end(), fresh.rbegin(), fresh.rend());
    return p;
  }
  fs::path file(const fs::path& p) {
    if (!fs::exists(p)) created_.push_back(p);
    return p;
  }
  void commit() { armed_ = false; }
  ~OutputGuard() {
    if (!armed_) return;
    std::error_code ec;
    for (auto it = created_.rbegin(); it != created_.rend(); ++it) fs::remove_all(*it, ec);
  }

 private:
  std::vector<fs::path> created_;
  bool armed_ = true;
};

struct Options {
  RunConfig run;
  std::vector<std::string> ranks{"6", "3", "30"};
  std::string overlap = "mean";
  std::string side = "left";
  int bits = 16;
  std::size_t window_start = 0;

  std::size_t height = 256, width = 256, frames = 100;
  std::string background = "smooth";
  double level = 0.3;
  double noise = 0.02;
  std::vector<std::string> targets;
  std::size_t num_targets = 1;
  double amplitude = 0.4;
  double radius = 2.0;
};

void finalize(Options& o) {
  std::string joined;
  for (const auto& r : o.ranks) joined += (joined.empty() ? "" : ",") + r;
  o.run.solver.ranks = parse_ranks(joined);
  if (o.overlap == "mean") o.run.overlap = Overlap::Mean;
  else if (o.overlap == "median") o.run.overlap = Overlap::Median;
  else fail(ErrorKind::Parameter, "--overlap must be mean or median");
  if (o.side == "left") o.run.corr_side = Side::Left;
  else if (o.side == "right") o.run.corr_side = Side::Right;
  else fail(ErrorKind::Parameter, "--side must be left or right");
  if (o.bits != 8 && o.bits != 16) fail(ErrorKind::Parameter, "--bits must be 8 or 16");
  o.run.validate();
}

SynthSpec synth_spec(const Options& o) {
  SynthSpec s;
  s.height = o.height;
  s.width = o.width;
  s.frames = o.frames;
  s.level = o.level;
  s.noise_sigma = o.noise;
  s.seed = o.run.seed;
  s.btr_patch = o.run.patch.patch_size;
  s.btr_temporal = o.run.patch.temporal_size;
  s.btr_ranks = o.run.solver.ranks;
  if (o.background == "smooth") s.background = Background::Smooth;
  else if (o.background == "btr") s.background = Background::LowRankBtr;
  else if (o.background == "constant") s.background = Background::Constant;
  else fail(ErrorKind::Parameter, "--background must be smooth, btr or constant");

  for (const auto& t : o.targets) s.targets.push_back(parse_target(t));
  if (o.targets.empty() && o.num_targets > 0) {
    // Start inside the central half and move slowly enough to stay in frame.
    std::mt19937_64 rng(o.run.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double n = static_cast<double>(o.frames > 1 ? o.frames - 1 : 1);
    for (std::size_t k = 0; k < o.num_targets; ++k) {
      const double r0 = (0.25 + 0.5 * u(rng)) * static_cast<double>(o.height - 1);
      const double c0 = (0.25 + 0.5 * u(rng)) * static_cast<double>(o.width - 1);
      const double speed_r = 0.2 * static_cast<double>(o.height) / n;
      const double speed_c = 0.2 * static_cast<double>(o.width) / n;
      s.targets.push_back({r0, c0, speed_r * (2.0 * u(rng) - 1.0), speed_c * (2.0 * u(rng) - 1.0), o.amplitude, o.radius});
    }
  }
  return s;
}

void print_aucs(const RocCurve& c) {
  std::cout << std::setprecision(6) << "AUC_DF   " << c.auc_df << "\nAUC_Dtau " << c.auc_dtau << "\nAUC_Ftau "
            << c.auc_ftau << "\nAUC_SNPR " << c.family.snpr << (c.family.snpr_capped ? " (capped)" : "")
            << "\nAUC_TDBS " << c.family.tdbs << "\nAUC_ODP  " << c.family.odp << "\n";
}

void write_detection(const DetectionResult& det, const fs::path& out, int bits, OutputGuard& guard) {
  const fs::path bg = guard.dir(out / "background");
  const fs::path tg = guard.dir(out / "target");
  for (std::size_t k = 0; k < det.background.size(); ++k) {
    write_pgm(guard.file(bg / frame_name(k)), det.background[k], bits);
    write_pgm(guard.file(tg / frame_name(k)), det.target[k], bits);
  }
  write_timing_csv(guard.file(out / "timing.csv"), det.timing);
}

CorrelationReport correlation_of(const fs::path& input, const Options& o) {
  if (fs::is_regular_file(input)) return analyze(read_tensor(input), o.run.corr_side);
  const auto frames = load_frames(input);
  return analyze(build_tensor(frames, o.run.patch, o.window_start).tensor, o.run.corr_side);
}

void require(const fs::path& p, const char* flag) {
  if (p.empty()) fail(ErrorKind::Parameter, std::string(flag) + " is required");
}

int run_synth(const Options& o) {
  OutputGuard guard;
  const auto seq = synth_sequence(synth_spec(o));
  const fs::path frames = guard.dir(o.run.output / "frames");
  for (std::size_t k = 0; k < seq.frames.size(); ++k) write_pgm(guard.file(frames / frame_name(k)), seq.frames[k], o.bits);
  write_ground_truth(guard.file(o.run.output / "gt.txt"), seq.truth);
  guard.commit();
  std::cout << "wrote " << seq.frames.size() << " frames to " << frames.string() << "\n";
  return 0;
}

int run_detect(const Options& o) {
  require(o.run.input, "--input");
  const auto frames = load_frames(o.run.input);
  OutputGuard guard;
  guard.dir(o.run.output);
  const auto det = detect_sequence(frames, o.run);
  write_detection(det, o.run.output, o.bits, guard);
  guard.commit();
  double total = 0.0;
  for (const auto& t : det.timing) total += t.seconds;
  std::cout << "processed " << det.timing.size() << " windows, solve time " << total << " s\n";
  return 0;
}

int run_corr(const Options& o) {
  require(o.run.input, "--input");
  const auto report = correlation_of(o.run.input, o);
  OutputGuard guard;
  guard.dir(o.run.output);
  write_corr_csv(guard.file(o.run.output / "corr.csv"), report);
  guard.commit();
  for (const auto& p : report.pairs)
    std::cout << p.pair.label() << " mean_energy " << p.mean_energy << " mean_cos " << p.mean_cos << "\n";
  return 0;
}

int run_eval(const Options& o) {
  require(o.run.input, "--input");
  require(o.run.ground_truth, "--gt");
  const auto gt = read_ground_truth(o.run.ground_truth);
  const auto scores = normalize_scores(load_frames(o.run.input));
  const auto curve = roc_sweep(scores, gt, o.run.eval);
  OutputGuard guard;
  guard.dir(o.run.output);
  write_metrics_csv(guard.file(o.run.output / "metrics.csv"), curve);
  guard.commit();
  print_aucs(curve);
  return 0;
}

int run_pipeline(const Options& o) {
  OutputGuard guard;
  const auto seq = synth_sequence(synth_spec(o));
  const fs::path frames_dir = guard.dir(o.run.output / "frames");
  for (std::size_t k = 0; k < seq.frames.size(); ++k)
    write_pgm(guard.file(frames_dir / frame_name(k)), seq.frames[k], o.bits);
  write_ground_truth(guard.file(o.run.output / "gt.txt"), seq.truth);

  // Detection reads the frames back so the run matches `detect` on the same directory.
  const auto frames = load_frames(frames_dir);
  const auto det = detect_sequence(frames, o.run);
  write_detection(det, o.run.output, o.bits, guard);

  const auto curve = roc_sweep(normalize_scores(det.target), seq.truth, o.run.eval);
  write_metrics_csv(guard.file(o.run.output / "metrics.csv"), curve);
  write_corr_csv(guard.file(o.run.output / "corr.csv"),
                 analyze(build_tensor(frames, o.run.patch, 0).tensor, o.run.corr_side));
  guard.commit();
  print_aucs(curve);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infrared small-target detection with bilateral tensor-ring decomposition"};
  app.set_config("--config", "", "Read flags from a key = value file");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  auto& s = o.run.solver;
  auto& p = o.run.patch;
  app.add_option("--input", o.run.input, "Frame directory (or tensor file for analyze-corr)");
  app.add_option("--gt", o.run.ground_truth, "Ground-truth file: frame row col [box_h box_w]");
  app.add_option("--out", o.run.output, "Output directory")->capture_default_str();
  app.add_option("--nw", p.patch_size, "Patch size Nw")->capture_default_str();
  app.add_option("--stride", p.stride, "Patch stride")->capture_default_str();
  app.add_option("--nt", p.temporal_size, "Temporal window Nt")->capture_default_str();
  app.add_option("--ranks", o.ranks, "R1,R,R2")->delimiter(',')->expected(3)->capture_default_str();
  app.add_option("--alpha", s.alpha)->capture_default_str();
  app.add_option("--lambda1", s.lambda1)->capture_default_str();
  app.add_option("--H", s.H, "If set, lambda1 = H / sqrt(Nw*Nw*Nt)");
  app.add_option("--beta1", s.beta1)->capture_default_str();
  app.add_option("--beta2", s.beta2)->capture_default_str();
  app.add_option("--beta3", s.beta3)->capture_default_str();
  app.add_option("--rho", s.rho)->capture_default_str();
  app.add_option("--max-iter", s.max_iter)->capture_default_str();
  app.add_option("--tol", s.tol, "Stop when T and B4D change less than this (0: never)")->capture_default_str();
  app.add_option("--thresholds", o.run.eval.thresholds)->capture_default_str();
  app.add_option("--hit-radius", o.run.eval.hit_radius)->capture_default_str();
  app.add_option("--overlap", o.overlap, "mean or median")->capture_default_str();
  app.add_option("--side", o.side, "Singular vector side for analyze-corr: left or right")->capture_default_str();
  app.add_option("--window-start", o.window_start, "First frame of the window analyze-corr uses")->capture_default_str();
  app.add_option("--jobs", o.run.jobs, "Windows solved in parallel")->capture_default_str();
  app.add_option("--seed", o.run.seed)->capture_default_str();
  app.add_option("--bits", o.bits, "PGM output depth, 8 or 16")->capture_default_str();

  app.add_option("--height", o.height)->capture_default_str();
  app.add_option("--width", o.width)->capture_default_str();
  app.add_option("--frames", o.frames)->capture_default_str();
  app.add_option("--background", o.background, "smooth, btr or constant")->capture_default_str();
  app.add_option("--level", o.level, "Background level")->capture_default_str();
  app.add_option("--noise", o.noise, "Noise sigma")->capture_default_str();
  app.add_option("--target", o.targets, "row,col,v_row,v_col,amplitude,radius (repeatable)");
  app.add_option("--num-targets", o.num_targets, "Seeded targets when no --target is given")->capture_default_str();
  app.add_option("--amplitude", o.amplitude, "Amplitude of seeded targets")->capture_default_str();
  app.add_option("--radius", o.radius, "Radius of seeded targets")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence and ground truth");
  auto* detect = app.add_subcommand("detect", "Separate background and targets");
  auto* corr = app.add_subcommand("analyze-corr", "Dimension-pair correlation report");
  auto* eval = app.add_subcommand("eval", "ROC sweep and AUC family of target maps");
  auto* pipeline = app.add_subcommand("pipeline", "synth, detect and eval in one run");

  CLI11_PARSE(app, argc, argv);

  try {
    finalize(o);
    if (synth->parsed()) return run_synth(o);
    if (detect->parsed()) return run_detect(o);
    if (corr->parsed()) return run_corr(o);
    if (eval->parsed()) return run_eval(o);
    if (pipeline->parsed()) return run_pipeline(o);
  } catch (const btristd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
