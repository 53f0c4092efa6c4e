// Command-line front end: `run` launches seeded simulation batches and emits
// CSV/JSON artifacts, `oracle` exposes the offline assortment/price optimizer
// on inline utilities, `report` summarizes previously written trace files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mnl_lab/errors.hpp"
#include "mnl_lab/harness.hpp"
#include "mnl_lab/optimize.hpp"
#include "mnl_lab/policies.hpp"

namespace {

constexpr const char* kCsvHeader = "run_id,seed,t,optimal_revenue,policy_revenue,gap,cum_regret";

// All floating-point artifacts use 17 significant digits so parsed values
// round-trip exactly.
std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Minimal deterministic JSON emitter: fixed key order (caller-driven),
// two-space indentation, 17-significant-digit numbers.
class JsonWriter {
 public:
  std::string take() { return std::move(out_); }

  void open_object(const char* key = nullptr) { open(key, '{'); }
  void close_object() { close('}'); }
  void open_array(const char* key = nullptr) { open(key, '['); }
  void close_array() { close(']'); }

  void field(const char* key, const std::string& value) {
    item(key, "\"" + json_escape(value) + "\"");
  }
  void field(const char* key, const char* value) { field(key, std::string(value)); }
  void field(const char* key, double value) { item(key, fmt17(value)); }
  void field(const char* key, long value) { item(key, std::to_string(value)); }
  void field(const char* key, int value) { item(key, std::to_string(value)); }
  void field_u64(const char* key, std::uint64_t value) { item(key, std::to_string(value)); }
  void field(const char* key, bool value) { item(key, value ? "true" : "false"); }
  void field_null(const char* key) { item(key, "null"); }

  void element(double value) { item(nullptr, fmt17(value)); }
  void element(long value) { item(nullptr, std::to_string(value)); }
  void element_u64(std::uint64_t value) { item(nullptr, std::to_string(value)); }
  void element(const std::string& value) { item(nullptr, "\"" + json_escape(value) + "\""); }

 private:
  void open(const char* key, char bracket) {
    prefix(key);
    out_ += bracket;
    ++depth_;
    fresh_scope_ = true;
  }

  void close(char bracket) {
    --depth_;
    if (!fresh_scope_) {
      out_ += '\n';
      indent();
    }
    out_ += bracket;
    fresh_scope_ = false;
  }

  void item(const char* key, const std::string& rendered) {
    prefix(key);
    out_ += rendered;
  }

  void prefix(const char* key) {
    if (depth_ > 0) {
      out_ += fresh_scope_ ? "\n" : ",\n";
      fresh_scope_ = false;
      indent();
    }
    if (key != nullptr) {
      out_ += '"';
      out_ += json_escape(key);
      out_ += "\": ";
    }
  }

  void indent() { out_.append(static_cast<std::size_t>(2 * depth_), ' '); }

  std::string out_;
  int depth_ = 0;
  bool fresh_scope_ = true;
};

struct RunOptions {
  int items = 5;
  int cap = 2;
  int dim = 2;
  double l0 = 0.25;
  long horizon = 256;
  std::string policy = "cap";
  std::vector<std::uint64_t> seeds = {1};
  std::string t0 = "auto";
  double t0_scale = 2.0;
  double alpha_scale = 1.0;
  double sigma0 = 0.0;  // 0 = derive d * ((lo + hi) / 2)^2 from the entry interval
  double gamma = 0.0;   // 0 = derive log 2 / (8 (1 + P))
  double epsilon = 0.0; // 0 = auto per solve
  std::string l0_mode = "known";
  double l0_floor = 0.05;
  int refit_every = 1;
  std::string out_dir = ".";
  std::string format = "both";
  std::string trace = "summary";
};

mnl_lab::RunSpec to_spec(const RunOptions& o) {
  mnl_lab::RunSpec spec;
  spec.gen.n_items = o.items;
  spec.gen.assort_cap = o.cap;
  spec.gen.dim = o.dim;
  spec.gen.l0 = o.l0;
  spec.gen.horizon = o.horizon;
  spec.policy = mnl_lab::policy_kind_from_string(o.policy);
  spec.seeds = o.seeds;
  spec.trace_level =
      o.trace == "per_round" ? mnl_lab::TraceLevel::kPerRound : mnl_lab::TraceLevel::kSummary;

  mnl_lab::PolicyConfig& pc = spec.policy_config;
  if (o.t0 != "auto") {
    try {
      std::size_t pos = 0;
      pc.t0 = std::stol(o.t0, &pos);
      if (pos != o.t0.size() || pc.t0 < 1) {
        throw std::invalid_argument("not a positive integer");
      }
    } catch (const std::exception&) {
      throw mnl_lab::ConfigError("--t0 must be 'auto' or a positive integer, got '" + o.t0 + "'");
    }
  }
  pc.t0_scale = o.t0_scale;
  pc.epsilon_opt = o.epsilon;
  pc.l0_mode = o.l0_mode == "estimated" ? mnl_lab::L0Mode::kEstimated : mnl_lab::L0Mode::kKnown;
  pc.l0_floor = o.l0_floor;
  pc.mle_refit_every = o.refit_every;
  pc.estimator.alpha_scale = o.alpha_scale;
  pc.estimator.gamma = o.gamma;
  if (o.sigma0 > 0.0) {
    pc.estimator.sigma0 = o.sigma0;
  } else {
    const mnl_lab::EntryInterval iv = mnl_lab::entry_interval(o.dim, o.l0);
    const double mid = iv.midpoint();
    pc.estimator.sigma0 = static_cast<double>(o.dim) * mid * mid;
  }
  return spec;
}

int threads_from_env() {
  const char* raw = std::getenv("MNL_LAB_THREADS");
  if (raw == nullptr || *raw == '\0') {
    return 0;  // harness default: hardware concurrency
  }
  try {
    std::size_t pos = 0;
    const int n = std::stoi(raw, &pos);
    if (pos != std::string(raw).size() || n < 1) {
      throw std::invalid_argument("not a positive integer");
    }
    return n;
  } catch (const std::exception&) {
    throw mnl_lab::ConfigError(std::string("MNL_LAB_THREADS must be a positive integer, got '") +
                               raw + "'");
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw mnl_lab::ConfigError("cannot open for writing: " + path.string());
  }
  out << content;
  if (!out) {
    throw mnl_lab::ConfigError("write failed: " + path.string());
  }
}

std::string render_csv(const mnl_lab::BatchResult& batch) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const mnl_lab::RunResult& run : batch.runs) {
    for (const mnl_lab::TraceRow& row : run.trace.rows) {
      out += run.trace.run_id;
      out += ',';
      out += std::to_string(run.trace.seed);
      out += ',';
      out += std::to_string(row.t);
      out += ',';
      out += fmt17(row.optimal_revenue);
      out += ',';
      out += fmt17(row.policy_revenue);
      out += ',';
      out += fmt17(row.gap);
      out += ',';
      out += fmt17(row.cum_regret);
      out += '\n';
    }
  }
  return out;
}

std::string render_summary_json(const RunOptions& o, const mnl_lab::RunSpec& spec,
                                const mnl_lab::BatchResult& batch) {
  JsonWriter w;
  w.open_object();

  w.open_object("config");
  w.field("items", o.items);
  w.field("cap", o.cap);
  w.field("dim", o.dim);
  w.field("l0", o.l0);
  w.field("horizon", o.horizon);
  w.field("policy", o.policy);
  w.open_array("seeds");
  for (std::uint64_t s : spec.seeds) {
    w.element_u64(s);
  }
  w.close_array();
  w.field("t0", o.t0);
  w.field("t0_scale", o.t0_scale);
  w.field("alpha_scale", o.alpha_scale);
  w.field("sigma0", spec.policy_config.estimator.sigma0);
  w.field("gamma", o.gamma);
  w.field("epsilon", o.epsilon);
  w.field("l0_mode", o.l0_mode);
  w.field("l0_floor", o.l0_floor);
  w.field("refit_every", o.refit_every);
  w.field("trace", o.trace);
  w.field("format", o.format);
  w.close_object();

  double slope_sum = 0.0;
  long slope_count = 0;
  w.open_array("runs");
  for (const mnl_lab::RunResult& run : batch.runs) {
    const mnl_lab::RunSummary& s = run.summary;
    w.open_object();
    w.field("run_id", s.run_id);
    w.field_u64("seed", s.seed);
    w.field("t0", s.t0);
    w.field("final_cum_regret", s.final_cum_regret);
    w.field("wall_seconds", s.wall_seconds);
    w.open_array("checkpoints");
    for (long t : s.checkpoints) {
      w.element(t);
    }
    w.close_array();
    w.open_array("cum_regret");
    for (double r : s.cum_regret_at) {
      w.element(r);
    }
    w.close_array();
    std::optional<double> slope;
    try {
      slope = mnl_lab::fit_slope(s.checkpoints, s.cum_regret_at, s.horizon);
    } catch (const mnl_lab::Error&) {
      // regret too flat or too short for a slope; reported as null
    }
    if (slope) {
      w.field("slope", *slope);
      slope_sum += *slope;
      ++slope_count;
    } else {
      w.field_null("slope");
    }
    if (s.has_estimator) {
      w.open_object("diagnostics");
      w.field("min_eig_v_init_end", s.min_eig_v_init_end);
      w.field("theta_err_final", s.theta_err_final);
      w.field("ellipsoid_freq", s.ellipsoid_freq);
      w.field("excluded_items", s.excluded_items);
      w.field("record_count", static_cast<long>(s.record_count));
      w.field("l0_used", s.l0_used);
      w.close_object();
    }
    w.close_object();
  }
  w.close_array();

  w.open_array("failures");
  for (const mnl_lab::SeedFailure& f : batch.failures) {
    w.open_object();
    w.field_u64("seed", f.seed);
    w.field("message", f.message);
    w.close_object();
  }
  w.close_array();

  w.open_object("aggregate");
  w.open_array("checkpoints");
  for (long t : batch.aggregate.checkpoints) {
    w.element(t);
  }
  w.close_array();
  w.open_array("mean_cum_regret");
  for (double v : batch.aggregate.mean_cum_regret) {
    w.element(v);
  }
  w.close_array();
  w.open_array("std_cum_regret");
  for (double v : batch.aggregate.std_cum_regret) {
    w.element(v);
  }
  w.close_array();
  w.close_object();

  if (slope_count > 0) {
    w.field("mean_slope", slope_sum / static_cast<double>(slope_count));
  } else {
    w.field_null("mean_slope");
  }
  w.close_object();
  std::string s = w.take();
  s += '\n';
  return s;
}

int cmd_run(const RunOptions& o) {
  const mnl_lab::RunSpec spec = to_spec(o);
  const int threads = threads_from_env();
  const mnl_lab::BatchResult batch = mnl_lab::run_batch(spec, threads);

  const std::filesystem::path out_dir(o.out_dir);
  std::filesystem::create_directories(out_dir);
  if (o.format == "csv" || o.format == "both") {
    write_file(out_dir / "traces.csv", render_csv(batch));
  }
  if (o.format == "json" || o.format == "both") {
    write_file(out_dir / "summary.json", render_summary_json(o, spec, batch));
  }
  for (const mnl_lab::SeedFailure& f : batch.failures) {
    std::cerr << "seed " << f.seed << " failed: " << f.message << "\n";
  }
  return batch.failures.empty() ? 0 : 2;
}

struct OracleOptions {
  std::vector<double> alphas;
  std::vector<double> betas;
  int cap = 0;      // 0 = number of items
  double l0 = 0.0;  // 0 = min beta
  double epsilon = 0.0;
};

int cmd_oracle(const OracleOptions& o) {
  if (o.alphas.empty() || o.alphas.size() != o.betas.size()) {
    throw mnl_lab::ConfigError("--alpha and --beta must list the same nonzero number of items");
  }
  double min_beta = o.betas.front();
  double max_alpha = o.alphas.front();
  for (std::size_t i = 0; i < o.betas.size(); ++i) {
    if (!(o.betas[i] > 0.0)) {
      throw mnl_lab::ConfigError("--beta entries must be positive");
    }
    min_beta = std::min(min_beta, o.betas[i]);
    max_alpha = std::max(max_alpha, o.alphas[i]);
  }
  const int cap = o.cap > 0 ? o.cap : static_cast<int>(o.alphas.size());
  const double l0 = o.l0 > 0.0 ? o.l0 : min_beta;

  std::vector<mnl_lab::FixedPointItem> items;
  for (std::size_t i = 0; i < o.alphas.size(); ++i) {
    items.push_back({static_cast<int>(i), mnl_lab::LinearUtility{o.alphas[i], o.betas[i]}});
  }
  mnl_lab::FixedPointConfig fp;
  fp.p_upper = mnl_lab::price_bound(std::max(0.0, max_alpha - 1.0), cap, l0);
  fp.epsilon = o.epsilon > 0.0 ? o.epsilon : 1e-6 * std::max(fp.p_upper, 1.0);
  const mnl_lab::OptimizationResult result = mnl_lab::fixed_point_solve(items, cap, fp);

  JsonWriter w;
  w.open_object();
  w.field("revenue", result.revenue);
  w.open_array("assortment");
  for (int i : result.assortment) {
    w.element(static_cast<long>(i));
  }
  w.close_array();
  w.open_array("prices");
  for (double p : result.prices) {
    w.element(p);
  }
  w.close_array();
  w.field("iterations", result.iterations);
  w.field("residual", result.residual);
  w.close_object();
  std::cout << w.take() << "\n";
  return 0;
}

struct TraceSeries {
  std::vector<long> ts;
  std::vector<double> cum_regret;
};

void parse_trace_csv(const std::string& path, std::map<std::string, TraceSeries>& series) {
  std::ifstream in(path);
  if (!in) {
    throw mnl_lab::ConfigError("cannot read trace file: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw mnl_lab::ConfigError("malformed trace file (bad header): " + path);
  }
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() != 7) {
      throw mnl_lab::ConfigError("malformed trace file (line " + std::to_string(line_no) +
                                 "): " + path);
    }
    try {
      TraceSeries& s = series[fields[0]];
      s.ts.push_back(std::stol(fields[2]));
      s.cum_regret.push_back(std::stod(fields[6]));
    } catch (const std::exception&) {
      throw mnl_lab::ConfigError("malformed trace file (line " + std::to_string(line_no) +
                                 "): " + path);
    }
  }
}

int cmd_report(const std::vector<std::string>& files) {
  std::map<std::string, TraceSeries> series;
  for (const std::string& f : files) {
    parse_trace_csv(f, series);
  }
  if (series.empty()) {
    throw mnl_lab::ConfigError("no trace rows found");
  }

  double slope_sum = 0.0;
  long slope_count = 0;
  double final_sum = 0.0;
  double final_sq = 0.0;
  std::map<long, std::pair<double, long>> by_t;  // t -> (sum, count)
  for (const auto& [run_id, s] : series) {
    const long horizon = *std::max_element(s.ts.begin(), s.ts.end());
    try {
      slope_sum += mnl_lab::fit_slope(s.ts, s.cum_regret, horizon);
      ++slope_count;
    } catch (const mnl_lab::Error&) {
      // no usable slope for this run
    }
    final_sum += s.cum_regret.back();
    final_sq += s.cum_regret.back() * s.cum_regret.back();
    for (std::size_t i = 0; i < s.ts.size(); ++i) {
      auto& cell = by_t[s.ts[i]];
      cell.first += s.cum_regret[i];
      cell.second += 1;
    }
  }

  const double n = static_cast<double>(series.size());
  const double final_mean = final_sum / n;
  const double var = n > 1.0 ? std::max(0.0, (final_sq - n * final_mean * final_mean) / (n - 1.0))
                             : 0.0;
  const double two_sigma = 2.0 * std::sqrt(var);

  std::cout << "runs: " << series.size() << "\n";
  if (slope_count > 0) {
    std::cout << "mean_slope: " << fmt17(slope_sum / static_cast<double>(slope_count)) << " (n="
              << slope_count << ")\n";
  } else {
    std::cout << "mean_slope: n/a\n";
  }
  std::cout << "final_cum_regret_mean: " << fmt17(final_mean) << "\n";
  std::cout << "final_cum_regret_two_sigma: " << fmt17(two_sigma) << "\n";
  std::cout << "t,mean_cum_regret\n";
  for (const auto& [t, cell] : by_t) {
    std::cout << t << "," << fmt17(cell.first / static_cast<double>(cell.second)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assortment and pricing simulation lab for multinomial-logit demand"};
  app.require_subcommand(1);

  RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run a seeded simulation batch");
  run->set_config("--config", "", "Flat key=value config file; flags override");
  run->add_option("--items", run_opts.items, "Catalog size N")->check(CLI::PositiveNumber);
  run->add_option("--cap", run_opts.cap, "Assortment capacity K")->check(CLI::PositiveNumber);
  run->add_option("--dim", run_opts.dim, "Context dimension d")->check(CLI::PositiveNumber);
  run->add_option("--l0", run_opts.l0, "Minimum price sensitivity (0, 0.5]");
  run->add_option("--horizon", run_opts.horizon, "Rounds T")->check(CLI::PositiveNumber);
  run->add_option("--policy", run_opts.policy, "Decision policy")
      ->check(CLI::IsMember({"cap", "cap-ons", "oracle", "random", "greedy"}));
  run->add_option("--seeds", run_opts.seeds, "Comma-separated seed list")->delimiter(',');
  run->add_option("--t0", run_opts.t0, "Initialization rounds: auto or a positive integer");
  run->add_option("--t0-scale", run_opts.t0_scale, "Auto-t0 multiplier")
      ->check(CLI::PositiveNumber);
  run->add_option("--alpha-scale", run_opts.alpha_scale, "Confidence radius multiplier")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--sigma0", run_opts.sigma0, "Context covariance lower bound; 0 = derive");
  run->add_option("--gamma", run_opts.gamma, "Online-update ball diameter; 0 = derive");
  run->add_option("--epsilon", run_opts.epsilon, "Optimizer precision; 0 = auto");
  run->add_option("--l0-mode", run_opts.l0_mode, "Sensitivity bound source")
      ->check(CLI::IsMember({"known", "estimated"}));
  run->add_option("--l0-floor", run_opts.l0_floor, "Floor for the estimated l0")
      ->check(CLI::PositiveNumber);
  run->add_option("--refit-every", run_opts.refit_every, "Learning rounds between MLE refits")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", run_opts.out_dir, "Output directory");
  run->add_option("--format", run_opts.format, "Artifacts to write")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  run->add_option("--trace", run_opts.trace, "Trace granularity")
      ->check(CLI::IsMember({"summary", "per_round"}));

  OracleOptions oracle_opts;
  CLI::App* oracle = app.add_subcommand("oracle", "Solve one assortment/pricing instance");
  oracle->set_config("--config", "", "Flat key=value config file; flags override");
  oracle->add_option("--alpha", oracle_opts.alphas, "Utility intercepts, comma-separated")
      ->delimiter(',')
      ->required();
  oracle->add_option("--beta", oracle_opts.betas, "Price sensitivities, comma-separated")
      ->delimiter(',')
      ->required();
  oracle->add_option("--cap", oracle_opts.cap, "Assortment capacity K; 0 = all items");
  oracle->add_option("--l0", oracle_opts.l0, "Sensitivity lower bound; 0 = min beta");
  oracle->add_option("--epsilon", oracle_opts.epsilon, "Bisection precision; 0 = auto");

  std::vector<std::string> report_files;
  CLI::App* report = app.add_subcommand("report", "Summarize trace CSV files");
  report->add_option("files", report_files, "Trace CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Normalize CLI11's internal codes onto the documented contract:
    // 0 = success (includes --help), 1 = unusable configuration.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      return cmd_run(run_opts);
    }
    if (oracle->parsed()) {
      return cmd_oracle(oracle_opts);
    }
    return cmd_report(report_files);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
