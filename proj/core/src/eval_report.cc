// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/eval_report.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "mprnn/error.h"

namespace mprnn {

namespace {

const std::vector<std::string> &KnownColumns() {
  static const std::vector<std::string> k = {"si-sdr", "sd-sdr", "bss-sdr", "si-sdri"};
  return k;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string DurationLabel(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", d);
  return buf;
}

double MeanPair(const PermutationResult &r) {
  return r.total / static_cast<double>(r.pair_scores.size());
}

}  // namespace

std::vector<std::string> ParseMetricList(const std::string &csv) {
  std::vector<std::string> out;
  for (const std::string &raw : SplitString(csv, ',')) {
    const std::string m = Trim(raw);
    if (m.empty()) continue;
    const auto &known = KnownColumns();
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw InvalidArgument("unknown metric '" + m + "' (expected si-sdr, sd-sdr, bss-sdr, si-sdri)");
    }
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  MPRNN_CHECK(!out.empty(), "metric list is empty");
  return out;
}

EvalExample ScoreExample(const LoadedExample &example,
                         const std::vector<std::vector<float>> &estimates,
                         const std::vector<std::string> &metrics) {
  EvalExample row;
  row.id = example.id;
  row.duration_s = example.sample_rate > 0
                       ? static_cast<double>(example.mixture.size()) / example.sample_rate
                       : 0.0;
  for (const std::string &m : metrics) {
    if (m == "si-sdri") {
      const PermutationResult r = UpitScore(estimates, example.sources, Metric::kSiSdr);
      double base = 0;
      for (const auto &src : example.sources) {
        base += SiSdr<float>(example.mixture, src);
      }
      base /= static_cast<double>(example.sources.size());
      row.scores.push_back(MeanPair(r) - base);
    } else {
      row.scores.push_back(MeanPair(UpitScore(estimates, example.sources, ParseMetric(m))));
    }
  }
  return row;
}

void EvalReport::Aggregate() {
  using Key = std::tuple<std::string, std::string, double>;
  std::map<Key, std::vector<const EvalExample *>> groups;
  for (const auto &e : examples) groups[{e.separator, e.framework, e.duration_s}].push_back(&e);
  cells.clear();
  for (const auto &[key, rows] : groups) {
    EvalCell c;
    std::tie(c.separator, c.framework, c.duration_s) = key;
    c.count = static_cast<int64_t>(rows.size());
    c.means.assign(metrics.size(), 0.0);
    for (size_t m = 0; m < metrics.size(); ++m) {
      double s = 0;
      for (const EvalExample *r : rows) s += r->scores[m];
      c.means[m] = s / static_cast<double>(rows.size());
    }
    cells.push_back(std::move(c));
  }
}

void EvalReport::Merge(const EvalReport &other) {
  if (examples.empty() && metrics.empty()) metrics = other.metrics;
  MPRNN_CHECK(metrics == other.metrics, "cannot merge reports with different metric columns");
  examples.insert(examples.end(), other.examples.begin(), other.examples.end());
  Aggregate();
}

std::string EvalReport::CellsCsv() const {
  std::ostringstream os;
  os << "separator,framework,duration_s,examples";
  for (const auto &m : metrics) os << ',' << m;
  os << '\n';
  for (const auto &c : cells) {
    os << c.separator << ',' << c.framework << ',' << DurationLabel(c.duration_s) << ','
       << c.count;
    for (double v : c.means) os << ',' << Fixed(v, 6);
    os << '\n';
  }
  return os.str();
}

std::string EvalReport::ExamplesCsv() const {
  std::ostringstream os;
  os << "id,separator,framework,duration_s";
  for (const auto &m : metrics) os << ',' << m;
  os << '\n';
  for (const auto &e : examples) {
    os << e.id << ',' << e.separator << ',' << e.framework << ',' << DurationLabel(e.duration_s);
    for (double v : e.scores) os << ',' << Fixed(v, 6);
    os << '\n';
  }
  return os.str();
}

std::string EvalReport::Table() const {
  std::vector<std::string> header = {"Separator", "Framework", "Duration [s]", "N"};
  for (const auto &m : metrics) header.push_back(m + " [dB]");
  std::vector<std::vector<std::string>> rows;
  for (const auto &c : cells) {
    std::vector<std::string> r = {c.separator, c.framework, DurationLabel(c.duration_s),
                                  std::to_string(c.count)};
    for (double v : c.means) r.push_back(Fixed(v, 2));
    rows.push_back(std::move(r));
  }
  std::vector<size_t> width(header.size());
  for (size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto &r : rows) {
    for (size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string> &cols) {
    for (size_t i = 0; i < cols.size(); ++i) {
      if (i) os << "  ";
      const size_t pad = width[i] - cols[i].size();
      if (i < 2) {
        os << cols[i] << std::string(pad, ' ');
      } else {
        os << std::string(pad, ' ') << cols[i];
      }
    }
    os << '\n';
  };
  line(header);
  size_t total = 0;
  for (size_t w : width) total += w;
  os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto &r : rows) line(r);
  return os.str();
}

EvalReport EvaluateManifest(const Manifest &manifest, const Estimator &estimator,
                            const EvalOptions &options) {
  MPRNN_CHECK(!manifest.entries.empty(), "manifest has no examples");
  MPRNN_CHECK(options.jobs >= 1, "jobs must be at least 1");
  for (const auto &m : options.metrics) ParseMetricList(m);

  const size_t n = manifest.entries.size();
  std::vector<EvalExample> rows(n);
  std::vector<std::string> load_errors(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      LoadedExample ex;
      try {
        ex = LoadExample(manifest, manifest.entries[i]);
      } catch (const Error &e) {
        load_errors[i] = manifest.entries[i].id + " (" + e.what() + ")";
        continue;
      }
      try {
        rows[i] = ScoreExample(ex, estimator(ex), options.metrics);
        rows[i].separator = options.separator;
        rows[i].framework = options.framework;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = static_cast<int>(std::min<size_t>(options.jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }

  std::string offenders;
  int bad = 0;
  for (const auto &e : load_errors) {
    if (e.empty()) continue;
    offenders += "\n  " + e;
    ++bad;
  }
  if (bad) throw IoError(std::to_string(bad) + " unreadable manifest entries:" + offenders);
  for (const auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EvalReport report;
  report.metrics = options.metrics;
  report.examples = std::move(rows);
  report.Aggregate();
  return report;
}

EvalReport EvaluateModel(const Separator<float> &model, const Manifest &manifest,
                         EvalOptions options) {
  options.separator = model.config().separator;
  options.framework = std::string(model.config().online ? "online " : "offline ") +
                      FrameworkName(model.config().framework);
  const int rate = model.config().sample_rate;
  Estimator est = [&model, rate](const LoadedExample &ex) {
    if (ex.sample_rate != rate) {
      throw InvalidArgument(ex.id + ": sample rate " + std::to_string(ex.sample_rate) +
                            " Hz does not match the model's " + std::to_string(rate) + " Hz");
    }
    return Separate(model, ex.mixture);
  };
  return EvaluateManifest(manifest, est, options);
}

Estimator OracleEstimator() {
  return [](const LoadedExample &ex) { return ex.sources; };
}

}  // namespace mprnn
