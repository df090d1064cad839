// Acceptance gate: one PASS/FAIL line per criterion A1..A10.
//
//   acceptance [--cache DIR] [--only A1,A3,...]
//
// Pre-trained checkpoints are cached in DIR (keyed by their training
// recipe); adaptation runs are memoized so criteria that share clips share
// the work.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "gradcheck_cases.hpp"
#include "oracles.hpp"
#include "radapt/adapt.hpp"
#include "radapt/metrics.hpp"
#include "radapt/resample.hpp"
#include "radapt/synthvideo.hpp"

using namespace radapt;
using namespace radapt::testing;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, v...);
  return buf;
}

// Clip protocol shared by A3..A7.
constexpr std::uint64_t kClipSeeds[] = {42, 43, 44};
constexpr int kClipFrames = 64;
constexpr int kClipSize = 256;
constexpr int kIterations = 1000;
const char* const kModes[] = {"random:0.8:0.95", "fixed:0.95", "none", "upscale:1.05:1.2"};

// Pre-training recipe; the corpus seeds are disjoint from the clip seeds.
constexpr int kPretrainSteps = 2000;
constexpr std::uint64_t kPretrainSeed = 3;
constexpr std::uint64_t kInitSeed = 7;

std::vector<VideoClip> pretrain_corpus() {
  std::vector<VideoClip> corpus;
  for (int i = 0; i < 8; ++i) {
    const auto rec = i % 2 ? Recurrence::low : Recurrence::high;
    corpus.push_back(generate_clip(SceneSpec::zoom_sweep(1000 + i, 8, 128, 1.0, 1.0 + 0.1 * i, rec, 3.0 * i)).hr);
  }
  return corpus;
}

struct Pretrained {
  VsrModel model;
  json report;
};

Pretrained pretrained(const ModelConfig& cfg, const std::string& name, const fs::path& cache) {
  const fs::path ckpt = cache / (name + ".bin");
  const fs::path meta = cache / (name + ".json");
  const json recipe = {{"channels", cfg.channels}, {"blocks", cfg.blocks},       {"steps", kPretrainSteps},
                       {"seed", kPretrainSeed},    {"init_seed", kInitSeed},     {"corpus", "zoom_sweep 1000..1007"}};
  if (fs::exists(ckpt) && fs::exists(meta)) {
    std::ifstream f(meta);
    const json stored = json::parse(f);
    if (stored.value("recipe", json()) == recipe) {
      VsrModel m = load_model(ckpt);
      if (m.config == cfg) return {std::move(m), stored};
    }
  }
  std::printf("pre-training %s (%d steps)...\n", name.c_str(), kPretrainSteps);
  std::fflush(stdout);
  VsrModel m = VsrModel::create(cfg, kInitSeed);
  PretrainConfig pc;
  pc.steps = kPretrainSteps;
  pc.seed = kPretrainSeed;
  const auto t0 = Clock::now();
  const PretrainReport r = pretrain(m, pretrain_corpus(), pc);
  fs::create_directories(cache);
  save_params(m.params, ckpt);
  json stored = {{"recipe", recipe},
                 {"validation_psnr_before", r.validation_psnr_before},
                 {"validation_psnr_after", r.validation_psnr_after},
                 {"bicubic_validation_psnr", r.bicubic_validation_psnr},
                 {"seconds", seconds_since(t0)}};
  std::ofstream(meta) << stored.dump(2) << "\n";
  return {std::move(m), stored};
}

struct Run {
  EvalResult before;
  EvalResult after;
  double seconds = 0.0;
  std::uint64_t restored_checksum = 0;
  double gain() const { return after.psnr_y - before.psnr_y; }
};

/// Memoized adaptation runs keyed by (kind, clip, mode, frames_per_adapt).
class Lab {
 public:
  explicit Lab(fs::path cache) : cache_(std::move(cache)) {}

  const ClipPair& clip(std::uint64_t seed, Recurrence rec) {
    const auto key = std::make_pair(seed, rec);
    auto it = clips_.find(key);
    if (it == clips_.end())
      it = clips_.emplace(key, generate_clip(SceneSpec::zoom_sweep(seed, kClipFrames, kClipSize, 1.0, 1.6, rec)))
               .first;
    return it->second;
  }

  Pretrained& teacher() {
    if (!teacher_) teacher_ = pretrained(ModelConfig::teacher(), "teacher", cache_);
    return *teacher_;
  }
  Pretrained& student() {
    if (!student_) student_ = pretrained(ModelConfig::student(), "student", cache_);
    return *student_;
  }

  static AdaptConfig config(std::uint64_t seed, const std::string& mode, int fpa) {
    AdaptConfig cfg;
    cfg.iterations = kIterations;
    cfg.seed = seed;
    cfg.frames_per_adapt = fpa;
    cfg.sampler = make_scale_mode(ScaleMode::parse(mode), cfg.sampler);
    return cfg;
  }

  /// kind: "self" (teacher), "student" (student self-adapted) or "distill".
  const Run& run(const std::string& kind, std::uint64_t seed, Recurrence rec, const std::string& mode, int fpa) {
    const std::string key = kind + "|" + std::to_string(seed) + "|" + (rec == Recurrence::high ? "h" : "l") + "|" +
                            mode + "|" + std::to_string(fpa);
    if (auto it = runs_.find(key); it != runs_.end()) return it->second;
    const ClipPair& c = clip(seed, rec);
    const AdaptConfig cfg = config(seed, mode, fpa);
    // Load (or pre-train) the models before the clock starts.
    const VsrModel& base = kind == "student" ? student().model : teacher().model;
    const VsrModel* pupil = kind == "distill" ? &student().model : nullptr;
    const auto t0 = Clock::now();
    AdaptResult r = pupil != nullptr ? distill_adapt(base, *pupil, c.lr, cfg) : self_adapt(base, c.lr, cfg);
    Run out;
    out.seconds = seconds_since(t0);
    out.before = evaluate_clip(c.hr, kind == "distill" ? restore_clip(student().model, c.lr) : r.initial, 4);
    out.after = evaluate_clip(c.hr, r.restored, 4);
    out.restored_checksum = checksum(r.restored);
    std::printf("  run %-40s %7.1fs  psnr %.4f -> %.4f (%+.4f)  ssim %.5f -> %.5f  tof %.4f -> %.4f\n",
                key.c_str(), out.seconds, out.before.psnr_y, out.after.psnr_y, out.gain(), out.before.ssim,
                out.after.ssim, out.before.tof, out.after.tof);
    std::fflush(stdout);
    if (kind == "self" && mode == kModes[0] && fpa == 0 && rec == Recurrence::high && !first_model_)
      first_model_ = r.model;
    return runs_.emplace(key, out).first->second;
  }

  const Run& a3(std::uint64_t seed) { return run("self", seed, Recurrence::high, kModes[0], 0); }

  /// Teacher adapted on the first A3 clip.
  const VsrModel& adapted_model() {
    a3(kClipSeeds[0]);
    return *first_model_;
  }

 private:
  fs::path cache_;
  std::map<std::pair<std::uint64_t, Recurrence>, ClipPair> clips_;
  std::optional<Pretrained> teacher_, student_;
  std::map<std::string, Run> runs_;
  std::optional<VsrModel> first_model_;
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string joined(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

// A1: every differentiable operator and the assembled network.
Verdict a1() {
  const auto t0 = Clock::now();
  int cases = 0;
  double worst = 0.0;
  std::string worst_name;
  for (std::uint64_t seed : {11u, 12u}) {
    auto all = grad_cases<float>(seed);
    all.push_back(model_grad_case(seed));
    for (auto& gc : all) {
      const GradCaseResult r = run_grad_case(gc, 1e-3);
      ++cases;
      if (r.worst_relative_error > worst) {
        worst = r.worst_relative_error;
        worst_name = r.name + "/" + r.worst_leaf;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {cases >= 20 && worst < 1e-3 && secs < 60.0,
          fmt("%d cases, worst relative error %.2e (%s), %.1fs", cases, worst, worst_name.c_str(), secs)};
}

// A2: conflicting targets drive the output to their pixel-wise mean.
Verdict a2() {
  const auto t0 = Clock::now();
  Rng rng(mix_seed(2, 0xa2));
  const Image input = random_image(3, 8, 8, rng, 0.2, 0.8);
  const AdamHyper hyper{1e-2, 0.9, 0.999, 1e-8};
  std::string detail;
  bool pass = true;
  for (int n : {2, 3, 5}) {
    std::vector<Image> targets;
    for (int k = 0; k < n; ++k) targets.push_back(random_image(3, 32, 32, rng, 0.2, 0.8));
    Image mean = targets[0];
    for (int k = 1; k < n; ++k) mean.data += targets[static_cast<std::size_t>(k)].data;
    mean.data /= static_cast<float>(n);
    VsrModel model = VsrModel::create(ModelConfig{3, 16, 2, 4, 3, SizeClass::student}, 20 + n);
    const Theorem1Result r = theorem1_oracle(model, input, targets, 3000, hyper);
    const double rms = std::sqrt((r.output.data - mean.data).square().cast<double>().mean());
    pass = pass && rms < 1e-2;
    detail += fmt("n=%d rms %.2e; ", n, rms);
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 300.0, detail + fmt("%.1fs", secs)};
}

Verdict a3(Lab& lab) {
  bool pass = true;
  double secs = 0.0;
  std::string detail;
  for (auto seed : kClipSeeds) {
    const Run& r = lab.a3(seed);
    secs += r.seconds;
    pass = pass && r.gain() >= 0.10 && r.after.ssim >= r.before.ssim;
    detail += fmt("seed %llu %+.3f dB ssim %+.4f; ", static_cast<unsigned long long>(seed), r.gain(),
                  r.after.ssim - r.before.ssim);
  }
  return {pass && secs < 1800.0, detail + fmt("adaptation %.0fs", secs)};
}

Verdict a4(Lab& lab) {
  double high = 0.0, low = 0.0, per_frame = 0.0;
  for (auto seed : kClipSeeds) {
    high += lab.a3(seed).gain();
    low += lab.run("self", seed, Recurrence::low, kModes[0], 0).gain();
    per_frame += lab.run("self", seed, Recurrence::high, kModes[0], 1).gain();
  }
  const double n = std::size(kClipSeeds);
  high /= n;
  low /= n;
  per_frame /= n;
  return {high > low && per_frame < high,
          fmt("mean gain high %+.3f low %+.3f; per-frame %+.3f vs all %+.3f dB", high, low, per_frame, high)};
}

Verdict a5(Lab& lab) {
  double mean[4] = {};
  for (int m = 0; m < 4; ++m) {
    for (auto seed : kClipSeeds) mean[m] += lab.run("self", seed, Recurrence::high, kModes[m], 0).after.psnr_y;
    mean[m] /= static_cast<double>(std::size(kClipSeeds));
  }
  const bool pass = mean[0] >= mean[1] && mean[1] >= mean[2] && mean[3] < mean[0] && mean[3] < mean[1] &&
                    mean[3] < mean[2];
  return {pass, fmt("random %.4f, fixed %.4f, none %.4f, upscale %.4f dB", mean[0], mean[1], mean[2], mean[3])};
}

Verdict a6(Lab& lab) {
  bool pass = true;
  std::vector<std::string> parts;
  for (auto seed : kClipSeeds) {
    const Run& r = lab.a3(seed);
    pass = pass && r.after.tof <= r.before.tof;
    parts.push_back(fmt("seed %llu %.4f -> %.4f", static_cast<unsigned long long>(seed), r.before.tof, r.after.tof));
  }
  return {pass, joined(parts)};
}

Verdict a7(Lab& lab) {
  double distilled = 0.0, self = 0.0, distill_secs = 0.0, teacher_secs = 0.0;
  for (auto seed : kClipSeeds) {
    distilled += lab.run("distill", seed, Recurrence::high, kModes[0], 0).after.psnr_y;
    self += lab.run("student", seed, Recurrence::high, kModes[0], 0).after.psnr_y;
    distill_secs += lab.run("distill", seed, Recurrence::high, kModes[0], 0).seconds;
    teacher_secs += lab.a3(seed).seconds;
  }
  const double n = std::size(kClipSeeds);
  return {distilled > self && distill_secs < teacher_secs,
          fmt("student psnr distilled %.4f vs self %.4f dB; wall distill %.0fs vs teacher self-adapt %.0fs",
              distilled / n, self / n, distill_secs, teacher_secs)};
}

Verdict a8() {
  bool exact = cubic_kernel(0.0) == 1.0 && cubic_kernel(0.5) == 0.5625 && cubic_kernel(1.0) == 0.0 &&
               cubic_kernel(1.5) == -0.0625 && cubic_kernel(2.0) == 0.0;
  double constant_err = 0.0, unity_err = 0.0;
  for (double s : {0.25, 0.5, 0.8, 0.95, 1.0, 1.2, 2.0, 4.0}) {
    const Image img(3, 23, 19, 0.37f);
    constant_err = std::max(constant_err, static_cast<double>((resize(img, s).data - 0.37f).abs().maxCoeff()));
    for (const auto& tap : resample_taps(41, scaled_extent(41, s), s)) {
      double total = 0.0;
      for (double w : tap.weight) total += w;
      unity_err = std::max(unity_err, std::abs(total - 1.0));
    }
  }
  return {exact && constant_err <= 1e-6 && unity_err <= 1e-6,
          fmt("kernel samples %s, constant error %.1e, partition error %.1e", exact ? "exact" : "WRONG", constant_err,
              unity_err)};
}

Verdict a9(Lab& lab) {
  const VsrModel& m = lab.adapted_model();
  const ClipPair& c = lab.clip(kClipSeeds[0], Recurrence::high);
  // Two frames that are bit-identical copies give bit-identical restorations.
  const std::vector<Image> w1 = window_at(c.lr, 10, m.config.frames);
  const std::vector<Image> w2(w1.begin(), w1.end());
  const bool same = forward(m, w1) == forward(m, w2);

  Rng rng(mix_seed(9, 0xa9));
  std::vector<Image> window, shifted;
  const Index h = 80, w = 112, dx = 4;
  for (int t = 0; t < m.config.frames; ++t) {
    window.push_back(random_image(3, h, w, rng));
    Image s(3, h, w);
    for (Index ch = 0; ch < 3; ++ch)
      for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) s.at(ch, y, (x + dx) % w) = window.back().at(ch, y, x);
    shifted.push_back(s);
  }
  const Image a = forward(m, window);
  const Image b = forward(m, shifted);
  const int sc = m.config.scale;
  const Index band = sc * (m.config.receptive_radius() + 2);
  double worst = 0.0;
  for (Index ch = 0; ch < 3; ++ch)
    for (Index y = band; y < a.height - band; ++y)
      for (Index x = band; x + sc * dx < a.width - band; ++x)
        worst = std::max(worst, static_cast<double>(std::abs(a.at(ch, y, x) - b.at(ch, y, x + sc * dx))));
  return {same && worst < 1e-4,
          fmt("identical inputs %s, interior equivariance error %.2e", same ? "identical" : "DIFFER", worst)};
}

/// Report of a short adaptation run minus its wall time.
std::string run_report(const VsrModel& model, const ClipPair& c, const AdaptConfig& cfg) {
  const AdaptResult r = self_adapt(model, c.lr, cfg);
  const EvalResult e = evaluate_clip(c.hr, r.restored, 4);
  json j = {{"restored", checksum(r.restored)},
            {"initial", checksum(r.initial)},
            {"params", r.report.params_checksum},
            {"loss_curve", r.report.loss_curve},
            {"psnr_y", e.psnr_y},
            {"ssim", e.ssim},
            {"tof", e.tof}};
  return j.dump();
}

Verdict a10(Lab& lab) {
  const SceneSpec spec = SceneSpec::zoom_sweep(kClipSeeds[0], kClipFrames, kClipSize, 1.0, 1.6, Recurrence::high);
  const ClipPair again = generate_clip(spec);
  const ClipPair& c = lab.clip(kClipSeeds[0], Recurrence::high);
  const bool frames = checksum(again.hr) == checksum(c.hr) && checksum(again.lr) == checksum(c.lr);
  ClipPair short_clip{{{c.hr.frames.begin(), c.hr.frames.begin() + 4}, c.hr.color},
                      {{c.lr.frames.begin(), c.lr.frames.begin() + 4}, c.lr.color},
                      c.spec};
  AdaptConfig cfg = Lab::config(kClipSeeds[0], kModes[0], 0);
  cfg.iterations = 40;
  const bool reports = run_report(lab.teacher().model, short_clip, cfg) ==
                       run_report(lab.teacher().model, short_clip, cfg);
  cfg.frames_per_adapt = 1;
  const bool grouped = run_report(lab.teacher().model, short_clip, cfg) ==
                       run_report(lab.teacher().model, short_clip, cfg);
  return {frames && reports && grouped, fmt("clip frames %s, adapt reports %s, per-frame reports %s",
                                            frames ? "identical" : "DIFFER", reports ? "identical" : "DIFFER",
                                            grouped ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria A1-A10"};
  std::string cache = RADAPT_ACCEPTANCE_CACHE;
  std::string only;
  app.add_option("--cache", cache, "Directory for pre-trained checkpoints")->capture_default_str();
  app.add_option("--only", only, "Comma-separated subset, e.g. A1,A8");
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> selected;
  std::stringstream ss(only);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) selected.insert(item);
  auto wanted = [&](const std::string& id) { return selected.empty() || selected.count(id) > 0; };

  Lab lab(cache);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"A8", [] { return a8(); }},
      {"A1", [] { return a1(); }},
      {"A2", [] { return a2(); }},
      {"A3", [&] { return a3(lab); }},
      {"A6", [&] { return a6(lab); }},
      {"A9", [&] { return a9(lab); }},
      {"A10", [&] { return a10(lab); }},
      {"A4", [&] { return a4(lab); }},
      {"A5", [&] { return a5(lab); }},
      {"A7", [&] { return a7(lab); }},
  };

  // Progress lines are indented; the verdicts follow, one line each.
  std::vector<std::pair<std::string, Verdict>> results;
  bool teacher_shown = false;
  for (const auto& [id, check] : criteria) {
    if (!wanted(id)) continue;
    Verdict v;
    try {
      if (!teacher_shown && (id == "A3" || id == "A9" || id == "A10")) {
        const json& t = lab.teacher().report;
        std::printf("  teacher pre-training: validation %.3f dB vs bicubic %.3f dB\n",
                    t.value("validation_psnr_after", 0.0), t.value("bicubic_validation_psnr", 0.0));
        teacher_shown = true;
      }
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("  %s done\n", id.c_str());
    std::fflush(stdout);
    results.emplace_back(id, v);
  }

  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    return std::stoi(a.first.substr(1)) < std::stoi(b.first.substr(1));
  });
  int failed = 0;
  for (const auto& [id, v] : results) {
    std::printf("%-4s %s  %s\n", id.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
