// Command-line front end; all simulation goes through the shared library's C
// interface.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fjsim/fjsim.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitBudget = 4;

int exit_code(fjsim_status s) {
  switch (s) {
    case FJSIM_OK:
      return kExitOk;
    case FJSIM_ERROR_PARSE:
    case FJSIM_ERROR_INVALID:
      return kExitConfig;
    case FJSIM_ERROR_UNSTABLE:
      return kExitValidation;
    case FJSIM_ERROR_BUDGET:
      return kExitBudget;
    case FJSIM_ERROR_INTERNAL:
      break;
  }
  return kExitInternal;
}

int fail(fjsim_status s) {
  std::cerr << "error: " << fjsim_last_error() << "\n";
  return exit_code(s);
}

int fail_config(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return kExitConfig;
}

struct CommonFlags {
  std::optional<std::int64_t> reps;
  std::optional<std::int64_t> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;
  std::optional<double> milestone_c;
  std::string out;
  bool json = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags* f) {
  cmd->add_option("--reps", f->reps, "Replications (default 10000, or the config's \"reps\")");
  cmd->add_option("--seed", f->seed,
                  "RNG seed; precedence: this flag, config \"seed\", FJSIM_SEED, 12345");
  cmd->add_option("--threads", f->threads, "Worker threads (default 1; result is thread-count "
                                           "independent)");
  cmd->add_option("--budget", f->budget,
                  "Max increment draws per replication path (default 100000000)");
  cmd->add_option("--milestone-c", f->milestone_c,
                  "Certification gap constant, > 0 (default 2.0)");
  cmd->add_option("--out", f->out, "Write the machine-readable result here (timing excluded, so "
                                   "reruns are byte-identical)");
}

bool parse_u64(const char* text, std::uint64_t* out) {
  if (!text || !*text) return false;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text, &end, 10);
  if (errno != 0 || end == text || *end != '\0') return false;
  *out = static_cast<std::uint64_t>(v);
  return true;
}

// flag > config > FJSIM_SEED > 12345
int resolve_seed(const CommonFlags& flags, const nlohmann::json& config, std::uint64_t* out) {
  if (flags.seed) {
    *out = *flags.seed;
    return kExitOk;
  }
  if (config.contains("seed")) {
    if (!config["seed"].is_number_unsigned())
      return fail_config("config \"seed\" must be an unsigned integer");
    *out = config["seed"].get<std::uint64_t>();
    return kExitOk;
  }
  if (const char* env = std::getenv("FJSIM_SEED")) {
    if (!parse_u64(env, out)) return fail_config("FJSIM_SEED must be an unsigned integer");
    return kExitOk;
  }
  *out = 12345;
  return kExitOk;
}

int build_options(const CommonFlags& flags, const nlohmann::json& config, fjsim_options* opt) {
  fjsim_options_init(opt);
  if (int rc = resolve_seed(flags, config, &opt->seed)) return rc;
  auto pick_int = [&](const char* key, const std::optional<std::int64_t>& flag, std::int32_t* slot,
                      std::int64_t lo) -> int {
    std::int64_t v = *slot;
    if (config.contains(key)) {
      if (!config[key].is_number_integer())
        return fail_config(std::string("config \"") + key + "\" must be an integer");
      v = config[key].get<std::int64_t>();
    }
    if (flag) v = *flag;
    if (v < lo || v > INT32_MAX)
      return fail_config(std::string("\"") + key + "\" out of range");
    *slot = static_cast<std::int32_t>(v);
    return kExitOk;
  };
  if (int rc = pick_int("reps", flags.reps, &opt->reps, 2)) return rc;
  if (int rc = pick_int("threads", flags.threads, &opt->threads, 1)) return rc;
  if (config.contains("step_budget")) {
    if (!config["step_budget"].is_number_unsigned())
      return fail_config("config \"step_budget\" must be an unsigned integer");
    opt->step_budget = config["step_budget"].get<std::uint64_t>();
  }
  if (flags.budget) opt->step_budget = *flags.budget;
  if (config.contains("milestone_c")) {
    if (!config["milestone_c"].is_number())
      return fail_config("config \"milestone_c\" must be a number");
    opt->milestone_c = config["milestone_c"].get<double>();
  }
  if (flags.milestone_c) opt->milestone_c = *flags.milestone_c;
  return kExitOk;
}

int load_config(const std::string& path, std::string* text, nlohmann::json* parsed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return fail_config("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  *text = buf.str();
  *parsed = nlohmann::json::parse(*text, nullptr, false);
  if (parsed->is_discarded()) return fail_config(path + ": not valid JSON");
  if (!parsed->is_object()) return fail_config(path + ": top level must be an object");
  return kExitOk;
}

struct ModelGuard {
  fjsim_model* m = nullptr;
  ~ModelGuard() { fjsim_model_free(m); }
};

struct ReportGuard {
  fjsim_report* r = nullptr;
  ~ReportGuard() { fjsim_report_free(r); }
};

int write_out_file(const std::string& path, const std::string& body) {
  if (path.empty()) return kExitOk;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return fail_config("cannot write " + path);
  out << body;
  return kExitOk;
}

struct Stat {
  double mean = 0.0;
  double half = 0.0;
};

int read_stat(fjsim_report* rep, fjsim_quantity q, int station, Stat* out) {
  const fjsim_status s = fjsim_report_stat(rep, q, station, &out->mean, &out->half);
  if (s != FJSIM_OK) return fail(s);
  return kExitOk;
}

void print_stat_line(const char* label, const Stat& st) {
  std::printf("%-14s %12.4f  +/- %.4f\n", label, st.mean, st.half);
}

int run_estimate(fjsim_model* model, const fjsim_options& opt, const CommonFlags& flags,
                 bool gradient_only) {
  int32_t stations = 0;
  fjsim_model_stations(model, &stations);
  fjsim_report* raw = nullptr;
  if (fjsim_status s = fjsim_estimate(model, &opt, &raw)) return fail(s);
  ReportGuard rep{raw};

  if (flags.json) {
    std::printf("%s\n", fjsim_report_json(rep.r, 1));
  } else {
    double seconds = 0.0;
    fjsim_report_seconds(rep.r, &seconds);
    std::printf("stations: %d  reps: %d  seed: %llu  threads: %d\n", stations, opt.reps,
                static_cast<unsigned long long>(opt.seed), opt.threads);
    Stat st;
    if (!gradient_only) {
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_SOJOURN, 0, &st)) return rc;
      print_stat_line("sojourn", st);
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_UNSYNC_TOTAL, 0, &st)) return rc;
      print_stat_line("unsync_total", st);
    }
    if (int rc = read_stat(rep.r, FJSIM_QUANTITY_GRADIENT_SUM, 0, &st)) return rc;
    print_stat_line("gradient_sum", st);
    for (int k = 0; k < stations; ++k) {
      if (gradient_only) {
        if (int rc = read_stat(rep.r, FJSIM_QUANTITY_GRADIENT, k, &st)) return rc;
        std::printf("station %-2d  gradient %12.4f +/- %.4f\n", k + 1, st.mean, st.half);
      } else {
        Stat q, d, g;
        if (int rc = read_stat(rep.r, FJSIM_QUANTITY_QUEUE, k, &q)) return rc;
        if (int rc = read_stat(rep.r, FJSIM_QUANTITY_UNSYNC, k, &d)) return rc;
        if (int rc = read_stat(rep.r, FJSIM_QUANTITY_GRADIENT, k, &g)) return rc;
        std::printf("station %-2d  queue %9.4f +/- %.4f   unsync %9.4f +/- %.4f   gradient %12.4f "
                    "+/- %.4f\n",
                    k + 1, q.mean, q.half, d.mean, d.half, g.mean, g.half);
      }
    }
    std::printf("elapsed: %.2f s\n", seconds);
  }
  return write_out_file(flags.out, std::string(fjsim_report_json(rep.r, 0)) + "\n");
}

nlohmann::json exp_dist(double rate) {
  return {{"family", "exponential"}, {"rate", rate}};
}

std::string symmetric_two_station(double mu) {
  nlohmann::json j;
  j["arrival"] = exp_dist(1.0);
  j["stations"] = {nlohmann::json{{"service", exp_dist(1.0)}, {"rate", mu}},
                   nlohmann::json{{"service", exp_dist(1.0)}, {"rate", mu}}};
  return j.dump();
}

std::string graded_ten_station() {
  nlohmann::json j;
  j["arrival"] = exp_dist(1.0);
  j["stations"] = nlohmann::json::array();
  for (int k = 1; k <= 10; ++k)
    j["stations"].push_back({{"service", exp_dist(1.0)}, {"rate", 2.0 - 0.05 * k}});
  return j.dump();
}

int parse_model_text(const std::string& text, ModelGuard* guard) {
  if (fjsim_status s = fjsim_model_parse(text.c_str(), &guard->m)) return fail(s);
  return kExitOk;
}

// Rows over the symmetric two-station family: simulated vs closed form.
int repro_two_station(bool gradient_table, const fjsim_options& base, const std::string& out_path) {
  static const double kMus[] = {1.8, 1.4, 1.1, 1.06};
  std::ostringstream csv;
  csv << (gradient_table ? "mu,gradient_mean,gradient_half,gradient_exact\n"
                         : "mu,sojourn_mean,sojourn_half,sojourn_exact,unsync_mean,unsync_half,"
                           "unsync_exact\n");
  for (double mu : kMus) {
    ModelGuard model;
    if (int rc = parse_model_text(symmetric_two_station(mu), &model)) return rc;
    fjsim_report* raw = nullptr;
    if (fjsim_status s = fjsim_estimate(model.m, &base, &raw)) return fail(s);
    ReportGuard rep{raw};
    char line[256];
    if (gradient_table) {
      Stat g;
      double exact = 0.0;
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_GRADIENT_SUM, 0, &g)) return rc;
      if (fjsim_status s = fjsim_mm2_sojourn_derivative(1.0, mu, &exact)) return fail(s);
      std::snprintf(line, sizeof line, "%.2f,%.6f,%.6f,%.6f\n", mu, g.mean, g.half, exact);
      std::printf("mu %.2f   d sojourn / d mu %10.4f +/- %.4f   exact %10.4f\n", mu, g.mean,
                  g.half, exact);
    } else {
      Stat s_hat, d_hat;
      double s_exact = 0.0, d_exact = 0.0;
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_SOJOURN, 0, &s_hat)) return rc;
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_UNSYNC_TOTAL, 0, &d_hat)) return rc;
      if (fjsim_status s = fjsim_mm2_sojourn(1.0, mu, &s_exact)) return fail(s);
      if (fjsim_status s = fjsim_mm2_unsync(1.0, mu, &d_exact)) return fail(s);
      std::snprintf(line, sizeof line, "%.2f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", mu, s_hat.mean,
                    s_hat.half, s_exact, d_hat.mean, d_hat.half, d_exact);
      std::printf("mu %.2f   sojourn %8.4f +/- %.4f (exact %8.4f)   unsync %8.4f +/- %.4f "
                  "(exact %8.4f)\n",
                  mu, s_hat.mean, s_hat.half, s_exact, d_hat.mean, d_hat.half, d_exact);
    }
    csv << line;
  }
  return write_out_file(out_path, csv.str());
}

// Rows over the ten-station graded network: per-station counts or gradient.
int repro_ten_station(bool gradient_table, const fjsim_options& base, const std::string& out_path) {
  ModelGuard model;
  if (int rc = parse_model_text(graded_ten_station(), &model)) return rc;
  fjsim_report* raw = nullptr;
  if (fjsim_status s = fjsim_estimate(model.m, &base, &raw)) return fail(s);
  ReportGuard rep{raw};
  std::ostringstream csv;
  csv << (gradient_table ? "station,rate,gradient_mean,gradient_half\n"
                         : "station,rate,queue_mean,queue_half,unsync_mean,unsync_half\n");
  char line[256];
  for (int k = 0; k < 10; ++k) {
    const double rate = 2.0 - 0.05 * (k + 1);
    if (gradient_table) {
      Stat g;
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_GRADIENT, k, &g)) return rc;
      std::snprintf(line, sizeof line, "%d,%.2f,%.6f,%.6f\n", k + 1, rate, g.mean, g.half);
      std::printf("station %-2d  rate %.2f   d sojourn / d mu %10.4f +/- %.4f\n", k + 1, rate,
                  g.mean, g.half);
    } else {
      Stat q, d;
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_QUEUE, k, &q)) return rc;
      if (int rc = read_stat(rep.r, FJSIM_QUANTITY_UNSYNC, k, &d)) return rc;
      std::snprintf(line, sizeof line, "%d,%.2f,%.6f,%.6f,%.6f,%.6f\n", k + 1, rate, q.mean,
                    q.half, d.mean, d.half);
      std::printf("station %-2d  rate %.2f   queue %8.4f +/- %.4f   unsync %8.4f +/- %.4f\n",
                  k + 1, rate, q.mean, q.half, d.mean, d.half);
    }
    csv << line;
  }
  if (!gradient_table) {
    Stat s_hat;
    if (int rc = read_stat(rep.r, FJSIM_QUANTITY_SOJOURN, 0, &s_hat)) return rc;
    std::snprintf(line, sizeof line, "sojourn,,%.6f,%.6f\n", s_hat.mean, s_hat.half);
    std::printf("sojourn %.4f +/- %.4f\n", s_hat.mean, s_hat.half);
    csv << line;
  }
  return write_out_file(out_path, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("fork-join stationary-state sampler (") + fjsim_version() + ")"};
  app.require_subcommand(1);

  std::string config_path;
  CommonFlags flags;

  auto* validate_cmd =
      app.add_subcommand("validate", "Parse a model config and check it is simulable");
  std::string validate_path;
  validate_cmd->add_option("config", validate_path, "Model JSON file")->required();

  auto* estimate_cmd = app.add_subcommand(
      "estimate", "Estimate stationary sojourn, per-station counts, and the rate gradient");
  estimate_cmd->add_option("config", config_path, "Model JSON file")->required();
  add_common_flags(estimate_cmd, &flags);
  estimate_cmd->add_flag("--json", flags.json, "Print the full JSON report (with timing)");

  auto* gradient_cmd =
      app.add_subcommand("gradient", "Estimate only d E[sojourn] / d rate_k per station");
  gradient_cmd->add_option("config", config_path, "Model JSON file")->required();
  add_common_flags(gradient_cmd, &flags);
  gradient_cmd->add_flag("--json", flags.json, "Print the full JSON report (with timing)");

  auto* coverage_cmd = app.add_subcommand(
      "coverage", "Count how many independent 95% intervals cover a known truth");
  coverage_cmd->add_option("config", config_path, "Model JSON file")->required();
  add_common_flags(coverage_cmd, &flags);
  double cov_truth = 0.0;
  std::string cov_quantity = "sojourn";
  std::int64_t cov_station = 1;
  std::optional<std::int64_t> cov_cis, cov_reps_per_ci;
  coverage_cmd->add_option("--truth", cov_truth, "True value the intervals should cover")
      ->required();
  coverage_cmd->add_option("--quantity", cov_quantity,
                           "sojourn | unsync_total | queue | unsync | gradient | gradient_sum")
      ->check(CLI::IsMember(
          {"sojourn", "unsync_total", "queue", "unsync", "gradient", "gradient_sum"}));
  coverage_cmd->add_option("--station", cov_station, "1-based station for per-station quantities");
  coverage_cmd->add_option("--cis", cov_cis, "Number of intervals (default 100, or config "
                                             "coverage.n_cis)");
  coverage_cmd->add_option("--reps-per-ci", cov_reps_per_ci,
                           "Replications per interval (default 1000, or config "
                           "coverage.reps_per_ci)");

  auto* repro_cmd = app.add_subcommand(
      "repro",
      "Re-run a packaged study. table1: two-station sojourn and join-wait counts vs closed forms "
      "(CSV: mu,sojourn_mean,sojourn_half,sojourn_exact,unsync_mean,unsync_half,unsync_exact). "
      "table2: two-station rate gradient vs closed form (CSV: mu,gradient_mean,gradient_half,"
      "gradient_exact). table3: ten-station per-station counts plus sojourn (CSV: station,rate,"
      "queue_mean,queue_half,unsync_mean,unsync_half). table4: ten-station per-station gradient "
      "(CSV: station,rate,gradient_mean,gradient_half).");
  std::string table;
  repro_cmd->add_option("table", table, "table1 | table2 | table3 | table4")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "table3", "table4"}));
  add_common_flags(repro_cmd, &flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (validate_cmd->parsed()) {
    std::string text;
    nlohmann::json config;
    if (int rc = load_config(validate_path, &text, &config)) return rc;
    ModelGuard model;
    if (fjsim_status s = fjsim_model_parse(text.c_str(), &model.m)) return fail(s);
    if (fjsim_status s = fjsim_model_validate(model.m)) return fail(s);
    int32_t stations = 0;
    fjsim_model_stations(model.m, &stations);
    std::printf("ok: %d station%s\n", stations, stations == 1 ? "" : "s");
    return kExitOk;
  }

  if (repro_cmd->parsed()) {
    fjsim_options opt;
    if (int rc = build_options(flags, nlohmann::json::object(), &opt)) return rc;
    const bool gradient_table = (table == "table2" || table == "table4");
    if (table == "table1" || table == "table2")
      return repro_two_station(gradient_table, opt, flags.out);
    return repro_ten_station(gradient_table, opt, flags.out);
  }

  // the remaining subcommands all read a config file
  std::string text;
  nlohmann::json config;
  if (int rc = load_config(config_path, &text, &config)) return rc;
  fjsim_options opt;
  if (int rc = build_options(flags, config, &opt)) return rc;
  ModelGuard model;
  if (fjsim_status s = fjsim_model_parse(text.c_str(), &model.m)) return fail(s);

  if (estimate_cmd->parsed()) return run_estimate(model.m, opt, flags, false);
  if (gradient_cmd->parsed()) return run_estimate(model.m, opt, flags, true);

  if (coverage_cmd->parsed()) {
    const nlohmann::json cov_cfg =
        config.contains("coverage") ? config["coverage"] : nlohmann::json::object();
    std::int64_t n_cis = 100, reps_per_ci = 1000;
    if (cov_cfg.contains("n_cis")) n_cis = cov_cfg["n_cis"].get<std::int64_t>();
    if (cov_cfg.contains("reps_per_ci")) reps_per_ci = cov_cfg["reps_per_ci"].get<std::int64_t>();
    if (cov_cis) n_cis = *cov_cis;
    if (cov_reps_per_ci) reps_per_ci = *cov_reps_per_ci;
    if (n_cis < 1 || reps_per_ci < 2 || n_cis > INT32_MAX || reps_per_ci > INT32_MAX)
      return fail_config("coverage sizes out of range");
    fjsim_quantity q = FJSIM_QUANTITY_SOJOURN;
    if (cov_quantity == "unsync_total") q = FJSIM_QUANTITY_UNSYNC_TOTAL;
    if (cov_quantity == "queue") q = FJSIM_QUANTITY_QUEUE;
    if (cov_quantity == "unsync") q = FJSIM_QUANTITY_UNSYNC;
    if (cov_quantity == "gradient") q = FJSIM_QUANTITY_GRADIENT;
    if (cov_quantity == "gradient_sum") q = FJSIM_QUANTITY_GRADIENT_SUM;
    int32_t covered = 0, total = 0;
    if (fjsim_status s = fjsim_coverage(model.m, q, static_cast<int32_t>(cov_station - 1),
                                        cov_truth, static_cast<int32_t>(n_cis),
                                        static_cast<int32_t>(reps_per_ci), &opt, &covered, &total))
      return fail(s);
    std::printf("covered %d of %d (nominal 0.95)\n", covered, total);
    std::ostringstream body;
    body << "covered,total\n" << covered << "," << total << "\n";
    return write_out_file(flags.out, body.str());
  }

  return kExitInternal;
}
