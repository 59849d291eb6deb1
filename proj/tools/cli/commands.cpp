#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "cli/json_io.hpp"
#include "locreward/analytics.hpp"
#include "locreward/mask2box.hpp"
#include "locreward/pgm.hpp"
#include "locreward/scoring.hpp"
#include "locreward/simulator.hpp"
#include "locreward/version.hpp"

namespace locreward::cli {

namespace {

std::size_t default_jobs() {
  if (const char* env = std::getenv(kJobsEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

// Runs task(i) for i in [0, count) on up to `jobs` threads. The first
// exception in index order is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(jobs, count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Output sink: a file when a path is given, otherwise the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw InputError(path + ": cannot open for writing");
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

// ---------------------------------------------------------------- score

struct ScoreOptions {
  std::string samples_path;
  std::string responses_path;
  std::string out_path = "-";
  std::string report_path;
  std::size_t group_size = 6;
  std::size_t jobs = 1;
  RewardConfig cfg;
  std::string scheme_name = "cls_loc_format";
};

struct GroupJob {
  std::size_t group_id = 0;
  std::size_t ordinal = 0;  // group index within its sample's run
  std::size_t first_line = 0;
  std::vector<ResponseRecord> records;
};

struct GroupResult {
  std::vector<std::string> lines;
  std::vector<double> totals;
};

GroupResult score_group(const GroupJob& job, const Sample& sample, const RewardConfig& cfg) {
  const auto scored = scoring::score_group(sample, job.records, cfg, job.ordinal);
  GroupResult res;
  res.totals = scored.signal.rewards;
  for (std::size_t i = 0; i < job.records.size(); ++i) {
    res.lines.push_back(scored_line(job.group_id, sample.id, i, cfg.scheme, scored.parsed[i],
                                    scored.breakdowns[i], scored.signal.advantages[i],
                                    scored.signal.zero_variance,
                                    scored.has_losses ? &scored.signal : nullptr)
                            .dump());
  }
  return res;
}

int cmd_score(const ScoreOptions& o, std::ostream& out, std::ostream& err) {
  const SampleTable samples = load_samples(o.samples_path);
  std::ifstream in(o.responses_path, std::ios::binary);
  if (!in) throw InputError(o.responses_path + ": cannot open file");
  Sink sink(o.out_path, out);

  std::vector<std::vector<double>> all_totals;
  std::vector<GroupJob> batch;
  const std::size_t batch_limit = std::max<std::size_t>(64, o.jobs * 16);

  const auto flush = [&] {
    std::vector<GroupResult> results(batch.size());
    parallel_for(batch.size(), o.jobs, [&](std::size_t i) {
      const GroupJob& job = batch[i];
      const Sample& sample = samples.at(job.records.front().sample_id);
      try {
        results[i] = score_group(job, sample, o.cfg);
      } catch (const Error& e) {
        throw InputError(o.responses_path + ":" + std::to_string(job.first_line) + ": " + e.what());
      }
    });
    for (auto& r : results) {
      for (const auto& line : r.lines) sink.stream() << line << '\n';
      all_totals.push_back(std::move(r.totals));
    }
    batch.clear();
  };

  std::unordered_set<std::string> finished;
  std::string current;
  std::size_t run_count = 0;
  std::size_t next_group_id = 0;
  GroupJob pending;
  std::size_t run_start_line = 0;

  const auto close_run = [&](std::size_t line_no) {
    if (current.empty() && run_count == 0) return;
    if (!pending.records.empty()) {
      throw InputError(o.responses_path + ":" + std::to_string(line_no) + ": sample '" + current +
                       "' has " + std::to_string(run_count) +
                       " responses, not a multiple of the group size " +
                       std::to_string(o.group_size));
    }
    finished.insert(current);
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = o.responses_path + ":" + std::to_string(line_no);
    ResponseRecord rec = parse_response_line(line, where);
    if (!samples.contains(rec.sample_id)) {
      throw InputError(where + ": unknown sample_id '" + rec.sample_id + "'");
    }
    if (run_count == 0 || rec.sample_id != current) {
      if (run_count > 0) close_run(line_no);
      if (finished.contains(rec.sample_id)) {
        throw InputError(where + ": responses for sample '" + rec.sample_id +
                         "' are not contiguous (first run started at line " +
                         std::to_string(run_start_line) + " of a different sample)");
      }
      current = rec.sample_id;
      run_count = 0;
      run_start_line = line_no;
      pending = GroupJob{};
      pending.ordinal = 0;
    }
    if (pending.records.empty()) pending.first_line = line_no;
    pending.records.push_back(std::move(rec));
    ++run_count;
    if (pending.records.size() == o.group_size) {
      const std::size_t ordinal = pending.ordinal;
      pending.group_id = next_group_id++;
      batch.push_back(std::move(pending));
      pending = GroupJob{};
      pending.ordinal = ordinal + 1;
      if (batch.size() >= batch_limit) flush();
    }
  }
  if (run_count > 0) close_run(line_no + 1);
  flush();
  sink.stream().flush();

  const auto rep = analytics::report(all_totals, o.cfg.std_eps, o.cfg.scheme);
  if (!o.report_path.empty()) {
    Sink report(o.report_path, out);
    report.stream() << report_to_json(rep).dump(2) << '\n';
  }
  err << analytics::format_table(std::span(&rep, 1));
  return kExitOk;
}

// ---------------------------------------------------------------- mask2box

struct MaskOptions {
  std::vector<std::string> paths;
  mask2box::Options box;
  std::string out_path = "-";
  std::size_t jobs = 1;
};

Json boxes_json(const std::vector<BBox>& boxes) {
  Json arr = Json::array();
  for (const BBox& b : boxes) {
    arr.push_back(Json::array({static_cast<long long>(b.x1), static_cast<long long>(b.y1),
                               static_cast<long long>(b.x2), static_cast<long long>(b.y2)}));
  }
  return arr;
}

int cmd_mask2box(const MaskOptions& o, std::ostream& out) {
  std::vector<std::vector<BBox>> results(o.paths.size());
  parallel_for(o.paths.size(), o.jobs, [&](std::size_t i) {
    try {
      results[i] = mask2box::to_boxes(pgm::read(o.paths[i]), o.box);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EvenKernel) throw;
      throw InputError(e.detail());
    }
  });
  Json doc;
  if (o.paths.size() == 1) {
    doc = boxes_json(results.front());
  } else {
    doc = Json::object();
    for (std::size_t i = 0; i < o.paths.size(); ++i) doc[o.paths[i]] = boxes_json(results[i]);
  }
  Sink sink(o.out_path, out);
  sink.stream() << doc.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string scored_path;
  std::string format = "table";
  std::string csv_path;
  double std_eps = 1e-6;
};

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out) {
  std::ifstream in(o.scored_path, std::ios::binary);
  if (!in) throw InputError(o.scored_path + ": cannot open file");
  static const std::unordered_set<std::string> kKnown = {
      "group_id", "sample_id", "index",   "scheme",  "format_ok",     "pred_label",
      "r_cls",    "r_count_or_focus",    "r_giou_mean", "r_loc",     "r_format",
      "r_random", "total",   "m",       "n",       "matched_pairs", "match_cost",
      "advantage", "zero_variance", "kl_mean", "loss_rew", "loss_reg", "loss_total"};

  std::vector<std::vector<double>> groups;
  std::optional<RewardScheme> scheme;
  bool mixed = false;
  std::optional<std::size_t> current;
  std::unordered_set<std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = o.scored_path + ":" + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw InputError(where + ": invalid JSON");
    }
    if (!j.is_object()) throw InputError(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!kKnown.contains(key)) throw InputError(where + ": unknown field '" + key + "'");
    }
    if (!j.contains("group_id") || !j["group_id"].is_number_unsigned()) {
      throw InputError(where + ": missing or invalid 'group_id'");
    }
    if (!j.contains("total") || !j["total"].is_number()) {
      throw InputError(where + ": missing or invalid 'total'");
    }
    const auto gid = j["group_id"].get<std::size_t>();
    if (!current || *current != gid) {
      if (seen.contains(gid)) throw InputError(where + ": group " + std::to_string(gid) + " is not contiguous");
      seen.insert(gid);
      current = gid;
      groups.emplace_back();
    }
    groups.back().push_back(j["total"].get<double>());
    if (j.contains("scheme")) {
      const auto s = j["scheme"].is_string() ? parse_scheme(j["scheme"].get<std::string>())
                                             : std::nullopt;
      if (!s) throw InputError(where + ": invalid 'scheme'");
      if (scheme && *scheme != *s) mixed = true;
      scheme = s;
    }
  }
  analytics::VarianceReport rep;
  try {
    rep = analytics::report(groups, o.std_eps, mixed ? std::nullopt : scheme);
  } catch (const Error& e) {
    throw InputError(o.scored_path + ": " + e.detail());
  }
  if (o.format == "json") {
    out << report_to_json(rep).dump(2) << '\n';
  } else {
    out << analytics::format_table(std::span(&rep, 1));
  }
  if (!o.csv_path.empty()) {
    Sink csv(o.csv_path, out);
    csv.stream() << analytics::format_csv(rep, o.std_eps);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string scenario_path;
  std::vector<std::string> schemes;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::string trace_path;
  std::string summary_path;
  std::size_t jobs = 1;
};

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  sim::Scenario sc = load_scenario(o.scenario_path);
  if (o.epochs) sc.epochs = *o.epochs;
  if (o.lr) sc.learning_rate = *o.lr;
  if (o.seed) sc.cfg.seed = *o.seed;

  std::vector<RewardScheme> schemes;
  for (const auto& name : o.schemes) {
    const auto s = parse_scheme(name);
    if (!s) throw InputError("--schemes: unknown reward scheme '" + name + "'");
    schemes.push_back(*s);
  }
  if (schemes.empty()) schemes.push_back(sc.cfg.scheme);

  std::vector<sim::TrainTrace> traces(schemes.size());
  parallel_for(schemes.size(), o.jobs, [&](std::size_t i) {
    sim::Scenario run = sc;
    run.cfg.scheme = schemes[i];
    traces[i] = sim::train(run);
  });
  const auto survey = sim::variance_survey(sc, schemes);

  std::ostringstream csv;
  csv << "scheme,epoch,mean_reward,zero_variance_fraction,accuracy,greedy_accuracy,mean_kl\n";
  for (const auto& t : traces) {
    for (const auto& e : t.epochs) {
      csv << to_string(t.scheme) << ',' << e.epoch << ',' << csv_number(e.mean_reward) << ','
          << csv_number(e.zero_variance_fraction) << ',' << csv_number(e.accuracy) << ','
          << csv_number(e.greedy_accuracy) << ',' << csv_number(e.mean_kl) << '\n';
    }
  }

  Json summary = Json::object();
  summary["samples"] = sc.samples.size();
  summary["templates"] = sc.templates.size();
  summary["group_size"] = sc.group_size;
  summary["epochs"] = sc.epochs;
  summary["learning_rate"] = sc.learning_rate;
  summary["seed"] = sc.cfg.seed;
  Json runs = Json::array();
  for (const auto& t : traces) {
    Json r = Json::object();
    r["scheme"] = std::string(to_string(t.scheme));
    double zv = 0.0;
    for (const auto& e : t.epochs) zv += e.zero_variance_fraction;
    r["mean_zero_variance_fraction"] = t.epochs.empty() ? 0.0 : zv / static_cast<double>(t.epochs.size());
    r["final"] = t.epochs.empty() ? Json(nullptr) : epoch_to_json(t.epochs.back());
    r["modal_mean_r_loc"] = t.modal_mean_r_loc;
    r["modal_count_optimal"] = t.modal_count_optimal;
    runs.push_back(std::move(r));
  }
  summary["runs"] = std::move(runs);
  Json surv = Json::array();
  for (const auto& rep : survey) {
    Json j = report_to_json(rep);
    j.erase("per_group_variance");
    surv.push_back(std::move(j));
  }
  summary["variance_survey"] = std::move(surv);

  if (!o.trace_path.empty()) {
    Sink s(o.trace_path, out);
    s.stream() << csv.str();
  }
  if (!o.summary_path.empty()) {
    Sink s(o.summary_path, out);
    s.stream() << summary.dump(2) << '\n';
  }
  if (o.trace_path.empty() && o.summary_path.empty()) out << csv.str();
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Localization-aware reward scoring and GRPO signal engine", "locreward"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "locreward " + std::string(kVersion));

  const std::size_t jobs_default = default_jobs();

  ScoreOptions score;
  score.jobs = jobs_default;
  auto* sc = app.add_subcommand("score", "Score grouped responses and compute group advantages");
  sc->add_option("--samples", score.samples_path, "Samples JSON file")->required();
  sc->add_option("--responses", score.responses_path, "Responses JSONL file")->required();
  sc->add_option("-o,--out", score.out_path, "Scored JSONL output ('-' for stdout)");
  sc->add_option("--report", score.report_path, "Write the variance report as JSON here");
  sc->add_option("--group-size", score.group_size, "Responses per group")
      ->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  sc->add_option("--alpha", score.cfg.alpha, "Weight of the count term in r_loc")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  sc->add_option("--beta", score.cfg.beta, "KL weight")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  sc->add_option("--scheme", score.scheme_name,
                 "cls | cls_count | cls_loc | cls_loc_format | cls_random")
      ->capture_default_str();
  sc->add_option("--std-eps", score.cfg.std_eps, "Zero-variance threshold on the group std")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sc->add_option("--sigma", score.cfg.random_sigma, "Noise std for cls_random")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  sc->add_option("--seed", score.cfg.seed, "Seed for cls_random noise")->capture_default_str();
  sc->add_option("-j,--jobs", score.jobs, std::string("Worker threads (default from ") + kJobsEnv + ")")
      ->capture_default_str()->check(CLI::PositiveNumber);

  MaskOptions mask;
  mask.jobs = jobs_default;
  auto* mk = app.add_subcommand("mask2box", "Convert binary PGM anomaly masks into boxes");
  mk->add_option("masks", mask.paths, "PGM mask files (P2 or P5; value > 127 is foreground)")
      ->required()->expected(1, -1);
  mk->add_option("--kernel", mask.box.kernel, "Odd side of the square dilation kernel")
      ->capture_default_str();
  mk->add_option("--iterations", mask.box.iterations, "Dilation passes")->capture_default_str();
  mk->add_option("--min-area", mask.box.min_area, "Drop boxes with a smaller area")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  mk->add_option("-o,--out", mask.out_path, "Boxes JSON output ('-' for stdout)");
  mk->add_option("-j,--jobs", mask.jobs, "Worker threads")->check(CLI::PositiveNumber);

  AnalyzeOptions analyze;
  auto* an = app.add_subcommand("analyze", "Zero-variance report over a scored JSONL file");
  an->add_option("scored", analyze.scored_path, "Scored JSONL produced by 'score'")->required();
  an->add_option("--std-eps", analyze.std_eps, "Zero-variance threshold on the group std")
      ->capture_default_str()->check(CLI::PositiveNumber);
  an->add_option("--format", analyze.format, "table | json")
      ->capture_default_str()->check(CLI::IsMember({"table", "json"}));
  an->add_option("--csv", analyze.csv_path, "Write per-group variances as CSV here");

  SimulateOptions simulate;
  simulate.jobs = jobs_default;
  auto* sm = app.add_subcommand("simulate", "Run the toy-policy GRPO simulator");
  sm->add_option("--scenario", simulate.scenario_path, "Scenario JSON file")->required();
  sm->add_option("--schemes", simulate.schemes, "Comma-separated reward schemes")->delimiter(',');
  sm->add_option("--epochs", simulate.epochs, "Override the scenario's epoch count");
  sm->add_option("--lr", simulate.lr, "Override the scenario's learning rate")
      ->check(CLI::NonNegativeNumber);
  sm->add_option("--seed", simulate.seed, "Override the scenario's seed");
  sm->add_option("--trace", simulate.trace_path, "Per-epoch CSV output");
  sm->add_option("--summary", simulate.summary_path, "Summary JSON output");
  sm->add_option("-j,--jobs", simulate.jobs, "Worker threads (one scheme per thread)")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sc->parsed()) {
      const auto s = parse_scheme(score.scheme_name);
      if (!s) {
        err << "score: unknown reward scheme '" << score.scheme_name << "'\n";
        return kExitUsage;
      }
      score.cfg.scheme = *s;
      return cmd_score(score, out, err);
    }
    if (mk->parsed()) {
      if (mask.box.kernel == 0 || mask.box.kernel % 2 == 0) {
        err << "mask2box: --kernel must be odd and >= 1\n";
        return kExitUsage;
      }
      return cmd_mask2box(mask, out);
    }
    if (an->parsed()) return cmd_analyze(analyze, out);
    if (sm->parsed()) return cmd_simulate(simulate, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace locreward::cli
