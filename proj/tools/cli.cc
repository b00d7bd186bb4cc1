// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "mprnn/checkpoint.h"
#include "mprnn/config.h"
#include "mprnn/error.h"
#include "mprnn/eval_report.h"
#include "mprnn/mixture.h"
#include "mprnn/segmentation.h"
#include "mprnn/separator.h"
#include "mprnn/trainer.h"
#include "mprnn/wav.h"

namespace mprnn::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSections = {"separator", "train", "data"};
const std::vector<std::string> kDataKeys = {"num", "duration_s", "frame_s", "seed", "format",
                                            "gain_jitter_db", "crossfade_ms", "jobs"};

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string DefaultOutDir(const std::string &sub) {
  const char *env = std::getenv(kOutDirEnv);
  const fs::path base = (env && *env) ? fs::path(env) : fs::path("mprnn_out");
  return (base / sub).string();
}

// File values first, then --set overrides in order.
KeyValueConfig ResolveConfig(const std::string &path, const std::vector<std::string> &sets) {
  KeyValueConfig cfg = path.empty() ? KeyValueConfig() : KeyValueConfig::Load(path);
  for (const auto &s : sets) cfg.ApplyOverride(s);
  for (const auto &[key, value] : cfg.values()) {
    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
      throw InvalidArgument("config key '" + key +
                            "' is outside the separator.*, train.* and data.* sections");
    }
  }
  return cfg;
}

void Echo(std::ostream &out, const KeyValueConfig &cfg) {
  out << "# effective config\n" << cfg.ToText();
  out.flush();
}

void EnsureDir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir + (ec ? ": " + ec.message() : ""));
  }
}

void WriteFile(const fs::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("short write to " + path.string());
}

WavFormat FormatFor(bool use_float) { return use_float ? WavFormat::kFloat32 : WavFormat::kPcm16; }

// ---------------------------------------------------------------- gen-data

struct GenArgs {
  std::string config, out;
  std::vector<std::string> sets;
  std::optional<int64_t> num;
  std::optional<double> duration, frame;
  std::optional<uint64_t> seed;
  bool use_float = false;
  int jobs = 1;
};

int GenData(const GenArgs &a, std::ostream &out, std::ostream &err) {
  KeyValueConfig cfg = ResolveConfig(a.config, a.sets);
  const auto unknown = cfg.UnknownKeys("data", kDataKeys);
  if (!unknown.empty()) throw InvalidArgument("unknown config key 'data." + unknown[0] + "'");
  if (a.num) cfg.Set("data.num", std::to_string(*a.num));
  if (a.duration) cfg.Set("data.duration_s", Num(*a.duration));
  if (a.seed) cfg.Set("data.seed", std::to_string(*a.seed));
  if (a.use_float) cfg.Set("data.format", "float32");
  if (a.frame) cfg.Set("data.frame_s", Num(*a.frame));

  DialogueSpec spec;
  const KeyValueConfig d = cfg.Section("data");
  if (!d.Has("num")) throw InvalidArgument("--num is required (or data.num in the config)");
  const int64_t num = d.GetInt("num", 0);
  MPRNN_CHECK(num >= 1, "--num must be at least 1, got " << num);
  spec.duration_s = d.GetDouble("duration_s", spec.duration_s);
  MPRNN_CHECK(spec.duration_s > 0, "--duration must be positive");
  spec.seed = static_cast<uint64_t>(d.GetInt("seed", 0));
  spec.gain_jitter_db = d.GetDouble("gain_jitter_db", spec.gain_jitter_db);
  spec.crossfade_ms = d.GetDouble("crossfade_ms", spec.crossfade_ms);
  if (d.Has("frame_s")) {
    spec.frame_s = d.GetDouble("frame_s", spec.frame_s);
  } else {
    const double ratio = spec.duration_s / spec.frame_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
      spec.frame_s = std::abs(spec.duration_s - std::round(spec.duration_s)) < 1e-9
                         ? 1.0
                         : spec.duration_s;
      err << "note: duration " << spec.duration_s << " s is not a multiple of 5 s; using "
          << spec.frame_s << " s activity frames\n";
    }
  }
  cfg.Set("data.frame_s", Num(spec.frame_s));
  const std::string format = d.GetString("format", "pcm16");
  MPRNN_CHECK(format == "pcm16" || format == "float32",
              "data.format must be pcm16 or float32, got '" << format << "'");
  cfg.Set("data.format", format);
  cfg.Set("data.duration_s", Num(spec.duration_s));
  cfg.Set("data.seed", std::to_string(spec.seed));
  cfg.Set("data.gain_jitter_db", Num(spec.gain_jitter_db));
  cfg.Set("data.crossfade_ms", Num(spec.crossfade_ms));
  spec.Validate();

  GenOptions opts;
  opts.format = format == "float32" ? WavFormat::kFloat32 : WavFormat::kPcm16;
  opts.jobs = a.jobs;
  const std::string dir = a.out.empty() ? DefaultOutDir("data") : a.out;
  Echo(out, cfg);
  const Manifest m = GenerateDataset(spec, num, dir, opts);
  WriteFile(fs::path(dir) / "config.txt", cfg.ToText());
  out << "wrote " << m.entries.size() << " examples of " << spec.num_samples()
      << " samples to " << dir << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string config, train_manifest, val_manifest, out;
  std::vector<std::string> sets;
};

int TrainCmd(const TrainArgs &a, std::ostream &out, std::ostream &) {
  KeyValueConfig cfg = ResolveConfig(a.config, a.sets);
  const ModelConfig model_config = ModelConfig::FromConfig(cfg);
  TrainConfig tc = TrainConfig::FromConfig(cfg);
  KeyValueConfig resolved = model_config.ToConfig();
  const KeyValueConfig train_cfg = tc.ToConfig();
  for (const auto &[k, v] : train_cfg.values()) resolved.Set(k, v);
  Echo(out, resolved);

  const Manifest train_m = LoadManifest(a.train_manifest);
  const Manifest val_m = LoadManifest(a.val_manifest);
  const auto train = LoadExamples(train_m);
  const auto val = LoadExamples(val_m);
  for (const auto *set : {&train, &val}) {
    for (const auto &ex : *set) {
      if (ex.sample_rate != model_config.sample_rate) {
        throw InvalidArgument(ex.id + " is at " + std::to_string(ex.sample_rate) +
                              " Hz, model expects " + std::to_string(model_config.sample_rate));
      }
    }
  }
  tc.out_dir = a.out.empty() ? DefaultOutDir("train") : a.out;
  EnsureDir(tc.out_dir);
  WriteFile(fs::path(tc.out_dir) / "config.txt", resolved.ToText());
  out << "training " << model_config.separator << " (" << ModelParamCount(model_config)
      << " parameters) on " << train.size() << " examples, validating on " << val.size()
      << "\n";

  const TrainResult r = Train(model_config, tc, train, val);
  for (const auto &e : r.log.epochs) {
    out << "epoch " << e.epoch << "  train_loss " << Num(e.train_loss) << "  val_"
        << MetricName(tc.selection_metric) << " " << Num(e.val_score) << "\n";
  }
  out << "best epoch " << r.log.best_epoch << " (" << MetricName(tc.selection_metric) << " "
      << Num(r.log.best_score) << " dB); artifacts in " << tc.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- separate

struct SeparateArgs {
  std::string ckpt, in, out;
  bool use_float = false;
};

int SeparateCmd(const SeparateArgs &a, std::ostream &out, std::ostream &) {
  const Separator<float> model = LoadCheckpoint(a.ckpt);
  Echo(out, model.config().ToConfig());
  const Wav wav = ReadWav(a.in);
  if (wav.sample_rate != model.config().sample_rate) {
    throw InvalidArgument(a.in + " is sampled at " + std::to_string(wav.sample_rate) +
                          " Hz; the model expects " +
                          std::to_string(model.config().sample_rate) + " Hz");
  }
  MPRNN_CHECK(!wav.samples.empty(), a.in << " holds no samples");
  const auto est = Separate(model, wav.samples);
  const std::string dir = a.out.empty() ? DefaultOutDir("separate") : a.out;
  EnsureDir(dir);
  for (size_t c = 0; c < est.size(); ++c) {
    const fs::path p = fs::path(dir) / ("est" + std::to_string(c + 1) + ".wav");
    WriteWav(p.string(), est[c], wav.sample_rate, FormatFor(a.use_float));
    out << "wrote " << p.string() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string ckpt, manifest, metrics = "si-sdr,sd-sdr", out;
  bool oracle = false;
  int jobs = 1;
};

int EvaluateCmd(const EvaluateArgs &a, std::ostream &out, std::ostream &) {
  if (a.oracle == !a.ckpt.empty()) {
    throw InvalidArgument("pass exactly one of --ckpt and --oracle");
  }
  EvalOptions opts;
  opts.metrics = ParseMetricList(a.metrics);
  opts.jobs = a.jobs;
  const Manifest m = LoadManifest(a.manifest);
  EvalReport report;
  if (a.oracle) {
    opts.separator = "oracle";
    opts.framework = "-";
    report = EvaluateManifest(m, OracleEstimator(), opts);
  } else {
    const Separator<float> model = LoadCheckpoint(a.ckpt);
    Echo(out, model.config().ToConfig());
    report = EvaluateModel(model, m, opts);
  }
  const std::string dir = a.out.empty() ? DefaultOutDir("evaluate") : a.out;
  EnsureDir(dir);
  WriteFile(fs::path(dir) / "report.csv", report.CellsCsv());
  WriteFile(fs::path(dir) / "report_examples.csv", report.ExamplesCsv());
  WriteFile(fs::path(dir) / "report.txt", report.Table());
  out << report.Table();
  return kExitOk;
}

// ----------------------------------------------------------------- inspect

struct InspectArgs {
  std::string config, ckpt;
  std::vector<std::string> sets;
  double duration = 30;
};

int InspectCmd(const InspectArgs &a, std::ostream &out, std::ostream &) {
  ModelConfig mc;
  std::string source;
  if (!a.ckpt.empty()) {
    MPRNN_CHECK(a.config.empty() && a.sets.empty(), "--ckpt cannot be combined with --config/--set");
    mc = LoadCheckpoint(a.ckpt).config();
    source = a.ckpt;
  } else {
    mc = ModelConfig::FromConfig(ResolveConfig(a.config, a.sets));
    source = a.config.empty() ? "defaults" : a.config;
  }
  MPRNN_CHECK(a.duration > 0, "--duration must be positive");
  Echo(out, mc.ToConfig());
  const int64_t samples = static_cast<int64_t>(std::llround(a.duration * mc.sample_rate));
  const int64_t frames = EncodedFrames(mc, samples);
  const SegMeta meta = Plan(frames, mc.seg, mc.features);
  const int64_t params = ModelParamCount(mc);
  const DelayReport delay = AlgorithmicDelay(mc, samples);

  char buf[256];
  out << "model: " << mc.separator << " (" << (mc.online ? "online" : "offline") << ", "
      << FrameworkName(mc.framework) << ") from " << source << "\n";
  std::snprintf(buf, sizeof(buf), "parameters: %lld (%.2fM)\n", static_cast<long long>(params),
                params / 1e6);
  out << buf;
  out << "blocks: " << mc.blocks << ", features " << mc.features << ", hidden " << mc.hidden
      << "\n";
  out << "input: " << Num(a.duration) << " s = " << samples << " samples -> " << frames
      << " frames\n";
  const std::vector<bool> dirs = mc.Directionality();
  for (int m = 1; m <= mc.levels(); ++m) {
    out << "level " << m << ": chunk " << mc.seg.chunk[m - 1] << ", hop " << mc.seg.hop[m - 1]
        << ", input " << meta.InputLength(m) << ", padded " << meta.PaddedLength(m) << ", steps "
        << meta.counts[m - 1] << ", " << (dirs[m - 1] ? "bidirectional" : "unidirectional")
        << "\n";
  }
  out << "top level: " << (dirs.back() ? "bidirectional" : "unidirectional") << "\n";
  out << "hierarchical tensor: " << ShapeString(meta.TensorShape()) << "\n";
  out << "inter-chunk steps: " << meta.counts.back() << "\n";
  if (delay.offline) {
    std::snprintf(buf, sizeof(buf), "delay: offline, whole input (%lld samples, %.4f s)\n",
                  static_cast<long long>(delay.worst_samples), delay.worst_seconds);
  } else {
    std::snprintf(buf, sizeof(buf),
                  "delay: worst %lld samples (%.4f s), average %.4f s, limited by level %d "
                  "(%lld frames)\n",
                  static_cast<long long>(delay.worst_samples), delay.worst_seconds,
                  delay.average_seconds, delay.limiting_level,
                  static_cast<long long>(delay.lookahead_frames));
  }
  out << buf;
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Multi-path RNN source separation toolkit", "mprnn"};
  app.require_subcommand(1);

  GenArgs gen;
  auto *g = app.add_subcommand("gen-data", "Generate a synthetic dialogue dataset");
  g->add_option("--num", gen.num, "Number of examples");
  g->add_option("--duration", gen.duration, "Example duration in seconds (default 30)");
  g->add_option("--frame", gen.frame, "Activity frame length in seconds (default 5)");
  g->add_option("--seed", gen.seed, "Dataset seed (default 0)");
  g->add_option("--out", gen.out, "Output directory");
  g->add_flag("--float", gen.use_float, "Write 32-bit float WAVs instead of 16-bit PCM");
  g->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);
  g->add_option("--config", gen.config, "Config file");
  g->add_option("--set", gen.sets, "key=value override (repeatable)");

  TrainArgs tr;
  auto *t = app.add_subcommand("train", "Train a separator");
  t->add_option("--config", tr.config, "Config file");
  t->add_option("--set", tr.sets, "key=value override (repeatable)");
  t->add_option("--train-manifest", tr.train_manifest, "Training manifest")->required();
  t->add_option("--val-manifest", tr.val_manifest, "Validation manifest")->required();
  t->add_option("--out", tr.out, "Output directory");

  SeparateArgs sep;
  auto *s = app.add_subcommand("separate", "Separate one mixture WAV");
  s->add_option("--ckpt", sep.ckpt, "Checkpoint")->required();
  s->add_option("--in", sep.in, "Input mixture WAV")->required();
  s->add_option("--out", sep.out, "Output directory");
  s->add_flag("--float", sep.use_float, "Write 32-bit float WAVs");

  EvaluateArgs ev;
  auto *e = app.add_subcommand("evaluate", "Score a checkpoint on a manifest");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint");
  e->add_flag("--oracle", ev.oracle, "Score the reference streams themselves");
  e->add_option("--manifest", ev.manifest, "Manifest to evaluate")->required();
  e->add_option("--metrics", ev.metrics, "Comma-separated: si-sdr,sd-sdr,bss-sdr,si-sdri");
  e->add_option("--out", ev.out, "Output directory");
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);

  InspectArgs in;
  auto *i = app.add_subcommand("inspect", "Print parameter count, shapes and delay");
  auto *ic = i->add_option("--config", in.config, "Config file");
  auto *ik = i->add_option("--ckpt", in.ckpt, "Checkpoint");
  ic->excludes(ik);
  i->add_option("--set", in.sets, "key=value override (repeatable)");
  i->add_option("--duration", in.duration, "Input duration in seconds (default 30)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (g->parsed()) return GenData(gen, out, err);
    if (t->parsed()) return TrainCmd(tr, out, err);
    if (s->parsed()) return SeparateCmd(sep, out, err);
    if (e->parsed()) return EvaluateCmd(ev, out, err);
    if (i->parsed()) return InspectCmd(in, out, err);
  } catch (const InvalidArgument &ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const IoError &ex) {
    err << "I/O error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const NumericError &ex) {
    err << "numeric error: " << ex.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception &ex) {
    err << "internal error: " << ex.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace mprnn::cli
