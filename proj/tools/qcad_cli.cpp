/*
 * Copyright 2026 The QCAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// qcad: command-line front end over the C API.
//
//   qcad synth    generate a synthetic dataset (CSV + schema)
//   qcad inject   normalize a dataset and inject labelled anomalies
//   qcad detect   score every object, write JSONL
//   qcad explain  explanation JSON and SVG plots for selected objects
//   qcad eval     repeated injection trials, metrics CSV
//   qcad sweep    trials over a range of k, eta or scaling settings
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcad/qcad.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown to unwind out of a command with a given exit code.
struct Exit {
  int code;
};

void check(qcad_status status) {
  if (status == QCAD_OK) return;
  std::fprintf(stderr, "qcad: %s: %s\n", qcad_status_string(status),
               qcad_last_error());
  throw Exit{status == QCAD_ERR_ARGUMENT ? kExitUsage : kExitRuntime};
}

[[noreturn]] void usage_error(const std::string& message) {
  std::fprintf(stderr, "qcad: %s\n", message.c_str());
  throw Exit{kExitUsage};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<qcad_dataset, Deleter<qcad_dataset, qcad_dataset_free>>;
using Scores = std::unique_ptr<qcad_scores, Deleter<qcad_scores, qcad_scores_free>>;
using Injection =
    std::unique_ptr<qcad_injection, Deleter<qcad_injection, qcad_injection_free>>;
using Trials = std::unique_ptr<qcad_trials, Deleter<qcad_trials, qcad_trials_free>>;
using Sweep = std::unique_ptr<qcad_sweep, Deleter<qcad_sweep, qcad_sweep_free>>;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_none(const std::string& s) { return lower(s) == "none"; }

double parse_number(const std::string& s, const std::string& what) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno != 0 || !std::isfinite(v))
    usage_error("invalid " + what + ": " + s);
  return v;
}

// Options shared by every command that scores objects.
struct ScoreOptions {
  std::size_t k = 0;
  std::string eta = "10";
  std::size_t trees = 10;
  std::size_t nq = 100;
  std::size_t max_features = 0;
  std::size_t min_split = 10;
  bool no_scaling = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void add_to(CLI::App* app) {
    app->add_option("--k", k, "Reference group size (0: min(N/2, 500))");
    app->add_option("--eta", eta, "Clipping constant, or 'none'");
    app->add_option("--trees", trees, "Trees per quantile forest");
    app->add_option("--nq", nq, "Quantile grid size");
    app->add_option("--max-features", max_features,
                    "Contextual features tried per split (0: all)");
    app->add_option("--min-split", min_split, "Minimum node size for a split");
    app->add_flag("--no-scaling", no_scaling,
                  "Do not scale out-of-support widths by the IQR");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--threads", threads, "Worker threads (0: all cores)");
  }

  qcad_params params() const {
    qcad_params p;
    qcad_params_init(&p);
    p.k = k;
    p.n_trees = trees;
    p.n_q = nq;
    p.max_features = max_features;
    p.min_samples_split = min_split;
    if (is_none(eta)) {
      p.clip = 0;
    } else {
      p.clip = 1;
      p.eta = parse_number(eta, "--eta");
    }
    p.scaling = no_scaling ? 0 : 1;
    p.seed = seed;
    p.threads = threads;
    return p;
  }
};

struct SchemeOptions {
  std::string scheme = "s1";
  std::size_t n = 2000;
  std::size_t p = 5;
  std::size_t pcat = 2;
  std::size_t q = 5;

  void add_to(CLI::App* app) {
    app->add_option("--scheme", scheme, "Generating scheme s1..s5");
    app->add_option("--n", n, "Number of objects");
    app->add_option("--p", p, "Contextual features");
    app->add_option("--pcat", pcat, "Categorical contextual features");
    app->add_option("--q", q, "Behavioral features");
  }

  qcad_scheme_spec spec(std::uint64_t seed) const {
    qcad_scheme_spec s;
    qcad_scheme_spec_init(&s);
    check(qcad_scheme_parse(scheme.c_str(), &s.scheme));
    s.n = n;
    s.p = p;
    s.p_cat = pcat;
    s.q = q;
    s.seed = seed;
    return s;
  }
};

std::string join(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

void make_dir(const std::string& dir) {
  if (dir.empty() || dir == ".") return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "qcad: cannot create %s: %s\n", dir.c_str(),
                 ec.message().c_str());
    throw Exit{kExitRuntime};
  }
}

void print_warnings(const qcad_dataset* ds) {
  for (size_t i = 0; i < qcad_dataset_warning_count(ds); ++i)
    std::fprintf(stderr, "warning: %s\n", qcad_dataset_warning(ds, i));
}

Dataset load(const std::string& data, const std::string& schema, bool normalize) {
  if (data.empty() || schema.empty()) usage_error("--data and --schema are required");
  qcad_dataset* raw = nullptr;
  check(qcad_dataset_load_csv(data.c_str(), schema.c_str(), &raw));
  Dataset ds(raw);
  print_warnings(ds.get());
  if (!normalize) return ds;
  qcad_dataset* norm = nullptr;
  check(qcad_dataset_normalize(ds.get(), &norm));
  Dataset out(norm);
  // Constant-column notices from normalization.
  for (size_t i = qcad_dataset_warning_count(ds.get());
       i < qcad_dataset_warning_count(out.get()); ++i)
    std::fprintf(stderr, "warning: %s\n", qcad_dataset_warning(out.get(), i));
  return out;
}

// ---------------------------------------------------------------- commands

struct SynthCommand {
  SchemeOptions scheme;
  std::uint64_t seed = 0;
  std::string out = ".";

  void add_to(CLI::App* app) {
    scheme.add_to(app);
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--out", out, "Output directory");
  }

  void run() const {
    auto spec = scheme.spec(seed);
    qcad_dataset* raw = nullptr;
    check(qcad_dataset_synthesize(&spec, &raw));
    Dataset ds(raw);
    make_dir(out);
    std::string data = join(out, "data.csv");
    std::string schema = join(out, "schema.txt");
    check(qcad_dataset_save(ds.get(), data.c_str(), schema.c_str()));
    std::printf("wrote %s (%zu rows) and %s\n", data.c_str(),
                qcad_dataset_rows(ds.get()), schema.c_str());
  }
};

struct InjectCommand {
  std::string data, schema;
  std::string rate = "0.025";
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string out = ".";

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "Input CSV");
    app->add_option("--schema", schema, "Input schema");
    app->add_option("--inject-rate", rate, "Fraction of objects to perturb");
    app->add_option("--count", count, "Number of objects to perturb (overrides the rate)");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--out", out, "Output directory");
  }

  void run() const {
    Dataset ds = load(data, schema, true);
    std::size_t n = qcad_dataset_rows(ds.get());
    std::size_t m = count;
    if (m == 0) {
      double r = parse_number(rate, "--inject-rate");
      if (!(r > 0.0 && r < 1.0)) usage_error("--inject-rate must be in (0, 1)");
      m = static_cast<std::size_t>(std::llround(r * static_cast<double>(n)));
      if (m == 0) m = 1;
    }
    qcad_dataset* raw = nullptr;
    qcad_injection* rec = nullptr;
    check(qcad_dataset_inject(ds.get(), m, seed, &raw, &rec));
    Dataset injected(raw);
    Injection record(rec);
    make_dir(out);
    std::string csv = join(out, "data.csv");
    std::string sch = join(out, "schema.txt");
    std::string json = join(out, "injection.json");
    check(qcad_dataset_save(injected.get(), csv.c_str(), sch.c_str()));
    check(qcad_injection_save_json(record.get(), json.c_str()));
    std::printf("injected %zu anomalies; wrote %s, %s and %s\n", m, csv.c_str(),
                sch.c_str(), json.c_str());
  }
};

struct DetectCommand {
  std::string data, schema;
  bool no_normalize = false;
  ScoreOptions score;
  std::string cache;
  std::string out = "scores.jsonl";
  std::size_t show = 10;

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "Input CSV");
    app->add_option("--schema", schema, "Input schema");
    app->add_flag("--no-normalize", no_normalize,
                  "Use behavioral values as given (already normalized data)");
    score.add_to(app);
    app->add_option("--distance-cache", cache, "Binary Gower distance cache file");
    app->add_option("--out", out, "Output JSONL file");
    app->add_option("--show", show, "Rows in the printed ranking");
  }

  void run() const {
    Dataset ds = load(data, schema, !no_normalize);
    auto params = score.params();
    qcad_scores* raw = nullptr;
    check(qcad_detect(ds.get(), &params, cache.empty() ? nullptr : cache.c_str(),
                      &raw));
    Scores scores(raw);
    check(qcad_scores_save_jsonl(scores.get(), out.c_str()));

    std::size_t n = qcad_scores_count(scores.get());
    std::size_t top = std::min(show, n);
    std::vector<size_t> order(top);
    check(qcad_scores_top(scores.get(), top, order.data()));
    std::printf("%4s  %8s  %8s\n", "rank", "index", "score");
    for (std::size_t r = 0; r < top; ++r)
      std::printf("%4zu  %8zu  %8.3f\n", r + 1, order[r],
                  100.0 * qcad_scores_final(scores.get(), order[r]));
    std::printf("wrote %zu scores to %s\n", n, out.c_str());
  }
};

struct ExplainCommand {
  std::string data, schema, scores_path = "scores.jsonl";
  bool no_normalize = false;
  ScoreOptions score;
  std::optional<std::size_t> index;
  std::size_t top = 0;
  std::size_t h = 0;
  std::string out = "explanations";

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "Input CSV");
    app->add_option("--schema", schema, "Input schema");
    app->add_flag("--no-normalize", no_normalize,
                  "Use behavioral values as given (already normalized data)");
    app->add_option("--scores", scores_path, "Scores JSONL from detect");
    score.add_to(app);
    app->add_option("--index", index, "Object to explain");
    app->add_option("--top", top, "Explain the highest-scored objects");
    app->add_option("--features", h, "Top behavioral features listed (0: min(Q, 3))");
    app->add_option("--out", out, "Output directory");
  }

  void run() const {
    if (index.has_value() == (top > 0))
      usage_error("exactly one of --index and --top is required");
    Dataset ds = load(data, schema, !no_normalize);
    qcad_scores* raw = nullptr;
    check(qcad_scores_load_jsonl(scores_path.c_str(), &raw));
    Scores scores(raw);
    std::vector<size_t> targets;
    if (index) {
      targets.push_back(*index);
    } else {
      targets.resize(top);
      check(qcad_scores_top(scores.get(), top, targets.data()));
    }
    auto params = score.params();
    for (size_t i : targets) {
      check(qcad_explain(ds.get(), scores.get(), i, &params, h, out.c_str()));
      std::printf("object %zu: score %.3f, written to %s\n", i,
                  100.0 * qcad_scores_final(scores.get(), i), out.c_str());
    }
  }
};

// Base dataset for eval / sweep: a CSV when --data is given, otherwise a
// synthetic dataset.
struct ExperimentOptions {
  std::string data, schema;
  SchemeOptions scheme;
  ScoreOptions score;
  std::size_t trials = 10;
  std::string rate = "0.025";

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "Input CSV (default: synthetic data)");
    app->add_option("--schema", schema, "Input schema");
    scheme.add_to(app);
    score.add_to(app);
    app->add_option("--trials", trials, "Number of injection trials");
    app->add_option("--inject-rate", rate, "Fraction of objects to perturb");
  }

  Dataset base() const {
    if (!data.empty()) return load(data, schema, true);
    auto spec = scheme.spec(score.seed);
    qcad_dataset* raw = nullptr;
    check(qcad_dataset_synthesize(&spec, &raw));
    return Dataset(raw);
  }

  double inject_rate() const { return parse_number(rate, "--inject-rate"); }
};

void print_trials(const qcad_trials* t) {
  const char* names[] = {"roc_auc", "pr_auc", "p_at_n"};
  for (int m = 0; m < 3; ++m) {
    auto metric = static_cast<qcad_metric>(m);
    std::printf("%-8s %.4f +- %.4f\n", names[m], qcad_trials_mean(t, metric),
                qcad_trials_std(t, metric));
  }
}

struct EvalCommand {
  ExperimentOptions exp;
  std::string out = "eval.csv";

  void add_to(CLI::App* app) {
    exp.add_to(app);
    app->add_option("--out", out, "Output CSV");
  }

  void run() const {
    Dataset base = exp.base();
    auto params = exp.score.params();
    qcad_trials* raw = nullptr;
    check(qcad_run_trials(base.get(), &params, exp.trials, exp.inject_rate(),
                          exp.score.seed, &raw));
    Trials t(raw);
    check(qcad_trials_save_csv(t.get(), out.c_str()));
    print_trials(t.get());
    std::printf("wrote %s\n", out.c_str());
  }
};

struct SweepCommand {
  ExperimentOptions exp;
  std::string kind;
  std::string values;
  std::string out = "sweep.csv";

  void add_to(CLI::App* app) {
    exp.add_to(app);
    app->add_option("--sweep", kind, "Swept parameter: k, eta or scaling")->required();
    app->add_option("--values", values, "Comma separated values ('none' for eta)")
        ->required();
    app->add_option("--out", out, "Output CSV");
  }

  void run() const {
    qcad_sweep_kind k;
    std::string which = lower(kind);
    if (which == "k")
      k = QCAD_SWEEP_K;
    else if (which == "eta")
      k = QCAD_SWEEP_ETA;
    else if (which == "scaling")
      k = QCAD_SWEEP_SCALING;
    else
      usage_error("unknown sweep: " + kind);

    std::vector<double> vals;
    std::stringstream ss(values);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::string v = lower(item);
      if (k == QCAD_SWEEP_ETA && v == "none")
        vals.push_back(std::nan(""));
      else if (k == QCAD_SWEEP_SCALING && (v == "on" || v == "off"))
        vals.push_back(v == "on" ? 1.0 : 0.0);
      else
        vals.push_back(parse_number(item, "--values entry"));
    }
    if (vals.empty()) usage_error("--values is empty");

    Dataset base = exp.base();
    auto params = exp.score.params();
    qcad_sweep* raw = nullptr;
    check(qcad_run_sweep(base.get(), &params, k, vals.data(), vals.size(),
                         exp.trials, exp.inject_rate(), exp.score.seed, &raw));
    Sweep s(raw);
    check(qcad_sweep_save_csv(s.get(), out.c_str()));
    std::fputs(qcad_sweep_table(s.get()), stdout);
    std::printf("wrote %s\n", out.c_str());
  }
};

// --------------------------------------------------------- configuration

// Reads flat key=value lines. Keys are long option names without dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "qcad: cannot read config %s\n", path.c_str());
    throw Exit{kExitRuntime};
  }
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      usage_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

bool truthy(const std::string& v) {
  std::string s = lower(v);
  return s == "1" || s == "true" || s == "yes" || s == "on";
}

// Splits off --config (both "--config X" and "--config=X").
std::optional<std::string> take_config(std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) usage_error("--config requires a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
    } else {
      ++i;
    }
  }
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual anomaly detection with quantile regression forests"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Help for every command");

  SynthCommand synth;
  InjectCommand inject;
  DetectCommand detect;
  ExplainCommand explain;
  EvalCommand eval;
  SweepCommand sweep;
  std::vector<std::pair<CLI::App*, std::function<void()>>> commands;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--config", "key=value file; command line flags take precedence");
    cmd.add_to(sub);
    commands.emplace_back(sub, [&cmd] { cmd.run(); });
  };
  add("synth", "Generate a synthetic dataset", synth);
  add("inject", "Normalize a dataset and inject anomalies", inject);
  add("detect", "Score every object", detect);
  add("explain", "Explain selected objects", explain);
  add("eval", "Injection trials with ROC AUC, PR AUC and precision at n", eval);
  add("sweep", "Trials over a parameter range", sweep);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    auto config = take_config(args);
    if (config && !args.empty()) {
      // Config values go right after the subcommand name so that later
      // command line flags win.
      CLI::App* sub = nullptr;
      for (auto& [s, run] : commands)
        if (s->get_name() == args[0]) sub = s;
      if (sub == nullptr) usage_error("--config needs a command first");
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config(*config)) {
        CLI::Option* opt = nullptr;
        try {
          opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
          usage_error("unknown config key: " + key);
        }
        if (opt->get_expected_min() == 0) {
          if (truthy(value)) injected.push_back("--" + key);
        } else {
          injected.push_back("--" + key);
          injected.push_back(value);
        }
      }
      args.insert(args.begin() + 1, injected.begin(), injected.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Exit& e) {
    return e.code;
  }

  try {
    for (auto& [sub, run] : commands)
      if (sub->parsed()) run();
  } catch (const Exit& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qcad: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
