#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssa/bounds.hpp"
#include "ssa/credit.hpp"
#include "ssa/engine.hpp"
#include "ssa/oracles.hpp"
#include "ssa/saw.hpp"
#include "ssa/wcm.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- serialization

// Non-finite doubles have no JSON representation; they travel as strings.
json num_or_label(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json num_array(const std::vector<double>& vs) {
  json arr = json::array();
  for (double v : vs) arr.push_back(num_or_label(v));
  return arr;
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << text;
}

const char kStrataHeader[] = "t,gamma,size_X,size_Z,R_hat,P_hat,H_hat,C_hat\n";

std::string strata_csv(const ssa::SsaRun* run) {
  std::ostringstream os;
  os << kStrataHeader;
  if (run)
    for (const auto& r : run->strata)
      os << r.t << ',' << csv_double(r.gamma) << ',' << r.size_X << ',' << r.size_Z << ','
         << csv_double(r.R_hat) << ',' << csv_double(r.P_hat) << ',' << csv_double(r.H_hat) << ','
         << csv_double(r.C_hat) << '\n';
  return os.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ----------------------------------------------------------------- config file

struct Experiment {
  std::string model;
  ssa::WcmInstance wcm;
  ssa::Portfolio portfolio;
  std::vector<int> saw_ns;
  double saw_re_target = 0;
  std::size_t saw_max_reps = 0;
  ssa::RunConfig run;
  std::vector<double> mandatory;
  std::string out_path, csv_path;
};

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + where);
  }
}

ssa::Mode parse_mode(const std::string& s) {
  if (s == "ssa") return ssa::Mode::Ssa;
  if (s == "issa") return ssa::Mode::Issa;
  throw std::invalid_argument("mode must be 'ssa' or 'issa', got '" + s + "'");
}

const char* mode_name(ssa::Mode m) { return m == ssa::Mode::Issa ? "issa" : "ssa"; }

void parse_run_block(const json& r, ssa::RunConfig& cfg) {
  reject_unknown(r, {"samples", "burnin", "rho", "reps", "seed", "mode", "threads"}, "run");
  if (r.contains("samples")) cfg.particles = r.at("samples").get<std::size_t>();
  if (r.contains("burnin")) cfg.burn_in = r.at("burnin").get<int>();
  if (r.contains("rho")) cfg.rho = r.at("rho").get<double>();
  if (r.contains("reps")) cfg.replications = r.at("reps").get<int>();
  if (r.contains("seed")) cfg.seed = r.at("seed").get<std::uint64_t>();
  if (r.contains("mode")) cfg.mode = parse_mode(r.at("mode").get<std::string>());
  if (r.contains("threads")) cfg.threads = r.at("threads").get<unsigned>();
}

Experiment load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j, {"model", "wcm", "credit", "saw", "run", "mandatory_levels", "outputs"},
                 "config");

  Experiment ex;
  if (!j.contains("model")) throw std::invalid_argument("config: missing 'model'");
  ex.model = j.at("model").get<std::string>();
  if (ex.model != "wcm" && ex.model != "credit" && ex.model != "saw")
    throw std::invalid_argument("config: model must be one of wcm, credit, saw");
  for (const char* m : {"wcm", "credit", "saw"})
    if (j.contains(m) && ex.model != m)
      throw std::invalid_argument(std::string("config: block '") + m +
                                  "' does not belong to model '" + ex.model + "'");
  if (!j.contains(ex.model))
    throw std::invalid_argument("config: missing parameter block '" + ex.model + "'");

  if (ex.model == "wcm") {
    const json& b = j.at("wcm");
    reject_unknown(b, {"w", "gamma"}, "wcm");
    ex.wcm.w = b.at("w").get<std::vector<double>>();
    ex.wcm.gamma = b.at("gamma").get<double>();
  } else if (ex.model == "credit") {
    ex.portfolio = ssa::portfolio_from_json(j.at("credit").dump());
  } else {
    const json& b = j.at("saw");
    reject_unknown(b, {"n", "ns", "re_target", "max_reps"}, "saw");
    if (b.contains("n") == b.contains("ns"))
      throw std::invalid_argument("config: saw needs exactly one of 'n', 'ns'");
    if (b.contains("n"))
      ex.saw_ns = {b.at("n").get<int>()};
    else
      ex.saw_ns = b.at("ns").get<std::vector<int>>();
    if (ex.saw_ns.empty()) throw std::invalid_argument("config: saw 'ns' is empty");
    if (b.contains("re_target")) ex.saw_re_target = b.at("re_target").get<double>();
    if (b.contains("max_reps")) ex.saw_max_reps = b.at("max_reps").get<std::size_t>();
  }

  if (j.contains("run")) parse_run_block(j.at("run"), ex.run);
  if (j.contains("mandatory_levels"))
    ex.mandatory = j.at("mandatory_levels").get<std::vector<double>>();
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    reject_unknown(o, {"summary", "csv"}, "outputs");
    if (o.contains("summary")) ex.out_path = o.at("summary").get<std::string>();
    if (o.contains("csv")) ex.csv_path = o.at("csv").get<std::string>();
  }
  return ex;
}

ssa::LevelSchedule load_levels(const std::string& path, ssa::Orientation orientation) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open levels file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("levels file: ") + e.what());
  }
  if (!j.is_array()) throw std::invalid_argument("levels file: expected a JSON array");
  ssa::LevelSchedule lv;
  lv.orientation = orientation;
  lv.thresholds = j.get<std::vector<double>>();
  lv.validate();
  return lv;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + ": expected an unsigned integer, got '" + s + "'");
  }
  if (pos != s.size())
    throw std::invalid_argument(what + ": expected an unsigned integer, got '" + s + "'");
  return v;
}

void apply_env(ssa::RunConfig& cfg) {
  if (const char* s = std::getenv("SSA_SEED")) cfg.seed = parse_u64(s, "SSA_SEED");
  if (const char* s = std::getenv("SSA_THREADS"))
    cfg.threads = static_cast<unsigned>(parse_u64(s, "SSA_THREADS"));
}

// -------------------------------------------------------------------- commands

// one bag of flag values shared by the subcommands; presence is tracked
// through CLI11 counts so the config < env < flag precedence can be applied
struct Cli {
  std::string config_path, model, levels_path, out_path, csv_path, mode_str;
  std::uint64_t samples = 0;
  double rho = 0;
  int burnin = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  // bounds
  double eps = 0.1, delta = 0.05, rlower = 0.5, plower = 0.5;
  std::size_t nlevels = 1;
  std::vector<double> a{1.0}, b{1.0};
  bool binary = false;

  // oracle
  int saw_n = 0;
  std::vector<double> w;
  double gamma = 0;
  double v = 0;
  std::uint64_t cmc_samples = 1000000;

  CLI::App* cmd_run = nullptr;
  CLI::App* cmd_pilot = nullptr;
  CLI::App* cmd_bounds = nullptr;
  CLI::App* cmd_oracle = nullptr;
};

void add_run_options(CLI::App* cmd, Cli& cli) {
  cmd->add_option("--config", cli.config_path, "experiment config (JSON)");
  cmd->add_option("--model", cli.model, "wcm|credit|saw (must agree with the config)");
  cmd->add_option("--samples", cli.samples, "population size N");
  cmd->add_option("--rho", cli.rho, "pilot quantile");
  cmd->add_option("--burnin", cli.burnin, "kernel steps per splitting transition");
  cmd->add_option("--reps", cli.reps, "replication count R");
  cmd->add_option("--seed", cli.seed, "root seed");
  cmd->add_option("--levels", cli.levels_path, "frozen level schedule (JSON array), credit only");
  cmd->add_option("--mode", cli.mode_str, "ssa|issa");
  cmd->add_option("--out", cli.out_path, "JSON summary path (default: stdout)");
  cmd->add_option("--csv", cli.csv_path, "CSV output path");
  cmd->add_option("--threads", cli.threads, "worker thread cap (never changes results)");
}

void apply_flag_overrides(const CLI::App* cmd, const Cli& cli, Experiment& ex) {
  if (cmd->count("--model") && cli.model != ex.model)
    throw std::invalid_argument("--model '" + cli.model + "' disagrees with the config model '" +
                                ex.model + "'");
  if (cmd->count("--samples")) ex.run.particles = static_cast<std::size_t>(cli.samples);
  if (cmd->count("--rho")) ex.run.rho = cli.rho;
  if (cmd->count("--burnin")) ex.run.burn_in = cli.burnin;
  if (cmd->count("--reps")) ex.run.replications = cli.reps;
  if (cmd->count("--seed")) ex.run.seed = cli.seed;
  if (cmd->count("--mode")) ex.run.mode = parse_mode(cli.mode_str);
  if (cmd->count("--threads")) ex.run.threads = cli.threads;
  if (cmd->count("--out")) ex.out_path = cli.out_path;
  if (cmd->count("--csv")) ex.csv_path = cli.csv_path;
}

Experiment make_experiment(const CLI::App* cmd, const Cli& cli) {
  if (cli.config_path.empty())
    throw std::invalid_argument("this command needs --config (model parameters live there)");
  Experiment ex = load_config(cli.config_path);
  apply_env(ex.run);
  apply_flag_overrides(cmd, cli, ex);
  return ex;
}

json base_summary(const std::string& model, const ssa::AggregateEstimate& agg,
                  const std::vector<double>& thresholds, const ssa::RunConfig& cfg,
                  double wall_time) {
  return json{{"estimate", num_or_label(agg.mean)},
              {"re", num_or_label(agg.re)},
              {"per_run", num_array(agg.per_run)},
              {"levels", num_array(thresholds)},
              {"seed", cfg.seed},
              {"mode", mode_name(cfg.mode)},
              {"model", model},
              {"wall_time", wall_time}};
}

int run_wcm(const Experiment& ex) {
  if (!ex.mandatory.empty())
    throw std::invalid_argument("mandatory_levels applies to the credit model only");
  Stopwatch clock;
  std::vector<ssa::SsaRun> runs;
  const ssa::AggregateEstimate agg = ssa::wcm_tail(ex.wcm, ex.run, &runs);
  const ssa::LevelSchedule levels = ssa::wcm_levels(ex.wcm);
  const json summary = base_summary("wcm", agg, levels.thresholds, ex.run, clock.seconds());
  write_text(ex.out_path, summary.dump(2) + "\n");
  if (!ex.csv_path.empty()) write_text(ex.csv_path, strata_csv(runs.empty() ? nullptr : &runs[0]));
  return std::isfinite(agg.mean) ? 0 : 3;
}

int run_credit(const Experiment& ex, const std::string& levels_path) {
  const auto spec = ssa::credit_problem(ex.portfolio);
  Stopwatch clock;
  bool stalled = false;
  ssa::LevelSchedule levels;
  if (!levels_path.empty()) {
    levels = load_levels(levels_path, ssa::Orientation::SuperLevel);
    for (double v : ex.mandatory) {
      bool present = false;
      for (double g : levels.thresholds) present = present || g == v;
      if (!present)
        throw std::invalid_argument("mandatory level " + std::to_string(v) +
                                    " is missing from the supplied schedule");
    }
  } else {
    levels = ssa::credit_schedule(ex.portfolio, ex.mandatory, ex.run, &stalled);
  }

  std::vector<ssa::SsaRun> runs;
  const ssa::AggregateEstimate agg =
      ssa::replicate<std::vector<double>>(spec, levels, ex.run, &runs);

  json summary = base_summary("credit", agg, levels.thresholds, ex.run, 0.0);
  summary["stalled"] = stalled;
  bool degenerate_rows = false;
  if (!ex.mandatory.empty()) {
    json cvar_rows = json::array();
    json tail_rows = json::array();
    const auto rows = ssa::cvar_readout(levels, runs, ex.mandatory);
    for (const auto& row : rows) {
      cvar_rows.push_back(json{{"v", row.v},
                               {"c_hat", num_or_label(row.c_hat)},
                               {"re", num_or_label(row.re)},
                               {"per_run", num_array(row.per_run)},
                               {"empty_upper_strata", row.empty_upper_strata}});
      degenerate_rows = degenerate_rows || row.empty_upper_strata;
    }
    for (double v : ex.mandatory) {
      std::vector<double> per;
      per.reserve(runs.size());
      for (const auto& run : runs) per.push_back(ssa::tail_readout(levels, run, v));
      const ssa::AggregateEstimate t = ssa::aggregate_values(per);
      tail_rows.push_back(
          json{{"v", v}, {"p_hat", num_or_label(t.mean)}, {"re", num_or_label(t.re)}});
    }
    summary["cvar"] = std::move(cvar_rows);
    summary["tail"] = std::move(tail_rows);
  }
  summary["wall_time"] = clock.seconds();

  write_text(ex.out_path, summary.dump(2) + "\n");
  if (!ex.csv_path.empty()) write_text(ex.csv_path, strata_csv(runs.empty() ? nullptr : &runs[0]));
  // a stalled pilot is the normal end of adaptation when the loss is bounded;
  // the flag travels in the summary, only genuine degeneracy changes the code
  if (degenerate_rows || !std::isfinite(agg.mean)) return 3;
  return 0;
}

struct SawRow {
  int n = 0;
  ssa::SawEstimate est;
  double pe = std::numeric_limits<double>::quiet_NaN();
  bool has_oracle = false;
  double mu = std::numeric_limits<double>::quiet_NaN();
};

int run_saw(const Experiment& ex, const std::string& levels_path) {
  if (!ex.mandatory.empty())
    throw std::invalid_argument("mandatory_levels applies to the credit model only");
  if (!levels_path.empty())
    throw std::invalid_argument("--levels applies to the credit model only");

  Stopwatch clock;
  std::vector<SawRow> rows;
  for (int n : ex.saw_ns) {
    SawRow row;
    row.n = n;
    row.est = ssa::estimate_cn_delta(n, ex.run, ex.saw_re_target, ex.saw_max_reps);
    if (n <= 18) {
      row.has_oracle = true;
      row.pe = ssa::percent_error(row.est.cn.mean,
                                  static_cast<double>(ssa::oracle::saw_count_exact(n)));
    }
    if (row.est.cn.mean > 0) row.mu = ssa::mu_estimate(row.est.cn.mean, n);
    rows.push_back(std::move(row));
  }

  const SawRow& last = rows.back();
  const ssa::LevelSchedule levels = ssa::saw_levels(last.n);
  json summary = base_summary("saw", last.est.cn, levels.thresholds, ex.run, clock.seconds());
  json series = json::array();
  for (const auto& row : rows) {
    json r{{"n", row.n},
           {"c_hat", num_or_label(row.est.cn.mean)},
           {"re", num_or_label(row.est.cn.re)},
           {"mu_hat", num_or_label(row.mu)},
           {"delta_hat", num_or_label(row.est.delta.mean)}};
    if (row.has_oracle) r["pe_vs_oracle"] = num_or_label(row.pe);
    series.push_back(std::move(r));
  }
  summary["series"] = std::move(series);
  write_text(ex.out_path, summary.dump(2) + "\n");

  if (!ex.csv_path.empty()) {
    std::ostringstream os;
    os << "n,c_hat,re,pe_vs_oracle,mu_hat,delta_hat\n";
    for (const auto& row : rows)
      os << row.n << ',' << csv_double(row.est.cn.mean) << ',' << csv_double(row.est.cn.re) << ','
         << (row.has_oracle ? csv_double(row.pe) : std::string()) << ',' << csv_double(row.mu)
         << ',' << csv_double(row.est.delta.mean) << '\n';
    write_text(ex.csv_path, os.str());
  }
  return std::isfinite(last.est.cn.mean) ? 0 : 3;
}

int do_run(const Cli& cli) {
  const Experiment ex = make_experiment(cli.cmd_run, cli);
  const bool has_levels = cli.cmd_run->count("--levels") > 0;
  if (ex.model == "wcm") {
    if (has_levels) throw std::invalid_argument("--levels applies to the credit model only");
    return run_wcm(ex);
  }
  if (ex.model == "credit") return run_credit(ex, has_levels ? cli.levels_path : "");
  return run_saw(ex, has_levels ? cli.levels_path : "");
}

int do_pilot(const Cli& cli) {
  const Experiment ex = make_experiment(cli.cmd_pilot, cli);
  Stopwatch clock;
  ssa::LevelSchedule levels;
  bool stalled = false;
  const ssa::SsaRun* pilot_run = nullptr;
  ssa::PilotResult res;

  if (ex.model == "credit") {
    const auto spec = ssa::credit_problem(ex.portfolio);
    ssa::PilotOptions opts;
    opts.base_level = 0.0;
    opts.terminal = 1.0 + ex.portfolio.total_loss();
    opts.mandatory = ex.mandatory;
    res = ssa::pilot_levels(spec, ex.run, opts, ssa::derive_seed(ex.run.seed, ssa::kStreamPilot));
    levels = res.schedule;
    stalled = res.stalled;
    pilot_run = &res.pilot_run;
  } else if (ex.model == "wcm") {
    if (!ex.mandatory.empty())
      throw std::invalid_argument("mandatory_levels applies to the credit model only");
    levels = ssa::wcm_levels(ex.wcm);  // closed-form, no adaptation needed
  } else {
    if (!ex.mandatory.empty())
      throw std::invalid_argument("mandatory_levels applies to the credit model only");
    levels = ssa::saw_levels(ex.saw_ns.back());
  }

  const json summary{{"levels", num_array(levels.thresholds)},
                     {"stalled", stalled},
                     {"seed", ex.run.seed},
                     {"model", ex.model},
                     {"wall_time", clock.seconds()}};
  write_text(ex.out_path, summary.dump(2) + "\n");
  if (!ex.csv_path.empty()) write_text(ex.csv_path, strata_csv(pilot_run));
  return 0;
}

int do_bounds(const Cli& cli) {
  ssa::ApproximationTarget target;
  target.eps = cli.eps;
  target.delta = cli.delta;
  const std::size_t n = cli.nlevels;
  auto broadcast = [n](std::vector<double> xs, const char* what) {
    if (xs.size() == 1) xs.assign(n, xs[0]);
    if (xs.size() != n)
      throw std::invalid_argument(std::string(what) + ": give one value or one per level");
    return xs;
  };
  const std::vector<double> a = broadcast(cli.a, "--a");
  const std::vector<double> b = broadcast(cli.b, "--b");
  const auto plans = ssa::epsdelta_samplesizes(target, n, cli.rlower, a, b);

  std::ostringstream os;
  os << "# per-level sampling plan: eps=" << csv_double(cli.eps) << " delta="
     << csv_double(cli.delta) << " n=" << n << " r_lower=" << csv_double(cli.rlower) << "\n";
  os << "# min counts are exact ceilings of the closed-form bounds\n";
  os << "t,tv_X,min_X,tv_Z,min_Z\n";
  for (const auto& p : plans)
    os << p.t << ',' << csv_double(p.tv_X) << ',' << p.min_X << ',' << csv_double(p.tv_Z) << ','
       << p.min_Z << '\n';
  if (cli.binary && n == 1) {
    const std::uint64_t m = ssa::chernoff_m(cli.plower, cli.eps, cli.delta);
    os << "# chernoff comparison (binary integrand, p_lower=" << csv_double(cli.plower)
       << "): m=" << m << ", tv=" << csv_double(ssa::chernoff_tv(cli.plower, cli.eps)) << '\n';
  }
  write_text(!cli.csv_path.empty() ? cli.csv_path : cli.out_path, os.str());
  return 0;
}

int do_oracle(const Cli& cli) {
  std::string model = cli.model;
  Experiment ex;
  bool have_config = !cli.config_path.empty();
  if (have_config) {
    ex = load_config(cli.config_path);
    if (model.empty()) model = ex.model;
    if (model != ex.model)
      throw std::invalid_argument("--model disagrees with the config model");
  }
  if (model.empty())
    throw std::invalid_argument("oracle: give --model or a config file");

  std::uint64_t seed = have_config ? ex.run.seed : 1;
  if (const char* s = std::getenv("SSA_SEED")) seed = parse_u64(s, "SSA_SEED");
  if (cli.cmd_oracle->count("--seed")) seed = cli.seed;

  std::ostringstream out, csv;
  if (model == "wcm") {
    std::vector<double> w = cli.cmd_oracle->count("--w") ? cli.w : ex.wcm.w;
    const double gamma = cli.cmd_oracle->count("--gamma") ? cli.gamma : ex.wcm.gamma;
    if (w.empty()) throw std::invalid_argument("oracle: wcm needs --w or a config");
    const auto exact = ssa::oracle::wcm_enumerate(w, gamma);
    out << "method = enumeration\n";
    out << "tail = " << csv_double(exact.tail) << '\n';
    out << "cond_exp = " << (exact.cond_defined ? csv_double(exact.cond_exp) : "undefined")
        << '\n';
    csv << "method,k,gamma,tail,cond_exp,cond_defined\n";
    csv << "enumeration," << w.size() << ',' << csv_double(gamma) << ','
        << csv_double(exact.tail) << ',' << csv_double(exact.cond_exp) << ','
        << (exact.cond_defined ? 1 : 0) << '\n';
  } else if (model == "saw") {
    std::vector<int> ns;
    if (cli.cmd_oracle->count("--n"))
      ns = {cli.saw_n};
    else if (have_config)
      ns = ex.saw_ns;
    if (ns.empty()) throw std::invalid_argument("oracle: saw needs --n or a config");
    csv << "method,n,c_hat,re,pe_vs_oracle,mu_hat,delta_hat\n";
    for (int n : ns) {
      const std::uint64_t count = ssa::oracle::saw_count_exact(n);
      const double delta = ssa::oracle::saw_delta_exact(n);
      const double mu = ssa::mu_estimate(static_cast<double>(count), n);
      out << "c_" << n << " = " << count << '\n';
      out << "delta_" << n << " = " << csv_double(delta) << '\n';
      out << "mu_" << n << " = " << csv_double(mu) << '\n';
      csv << "dfs," << n << ',' << count << ",0,0," << csv_double(mu) << ','
          << csv_double(delta) << '\n';
    }
  } else if (model == "credit") {
    if (!have_config) throw std::invalid_argument("oracle: credit needs a config file");
    if (!cli.cmd_oracle->count("--v"))
      throw std::invalid_argument("oracle: credit needs --v");
    const auto res = ssa::oracle::credit_cmc(ex.portfolio, cli.v, cli.cmc_samples, seed);
    out << "method = cmc\n";
    out << "tail = " << csv_double(res.tail) << '\n';
    out << "tail_se = " << csv_double(res.tail_se) << '\n';
    out << "cvar = " << csv_double(res.cvar) << '\n';
    out << "cvar_se = " << csv_double(res.cvar_se) << '\n';
    out << "hits = " << res.hits << '\n';
    out << "samples = " << res.samples << '\n';
    csv << "method,v,tail,tail_se,cvar,cvar_se,hits,samples\n";
    csv << "cmc," << csv_double(cli.v) << ',' << csv_double(res.tail) << ','
        << csv_double(res.tail_se) << ',' << csv_double(res.cvar) << ','
        << csv_double(res.cvar_se) << ',' << res.hits << ',' << res.samples << '\n';
  } else {
    throw std::invalid_argument("oracle: model must be one of wcm, credit, saw");
  }

  write_text(cli.cmd_oracle->count("--out") ? cli.out_path : "", out.str());
  if (cli.cmd_oracle->count("--csv")) write_text(cli.csv_path, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratified splitting estimator"};
  app.require_subcommand(1);
  Cli cli;

  cli.cmd_run = app.add_subcommand("run", "pilot (if needed) + replicated estimation runs");
  add_run_options(cli.cmd_run, cli);
  cli.cmd_pilot = app.add_subcommand("pilot", "report the level schedule a run would use");
  add_run_options(cli.cmd_pilot, cli);

  cli.cmd_bounds = app.add_subcommand("bounds", "per-level accuracy plan (TV budgets, counts)");
  cli.cmd_bounds->add_option("--eps", cli.eps, "relative accuracy in (0,1)");
  cli.cmd_bounds->add_option("--delta", cli.delta, "confidence parameter in (0,1)");
  cli.cmd_bounds->add_option("--nlevels", cli.nlevels, "schedule length n");
  cli.cmd_bounds->add_option("--rlower", cli.rlower, "worst-case level conditional probability");
  cli.cmd_bounds->add_option("--a", cli.a, "per-level integrand lower bounds")->delimiter(',');
  cli.cmd_bounds->add_option("--b", cli.b, "per-level integrand upper bounds")->delimiter(',');
  cli.cmd_bounds->add_flag("--binary", cli.binary, "integrand is an indicator");
  cli.cmd_bounds->add_option("--plower", cli.plower, "indicator probability lower bound");
  cli.cmd_bounds->add_option("--out", cli.out_path, "output path (default stdout)");
  cli.cmd_bounds->add_option("--csv", cli.csv_path, "output path (same table)");

  cli.cmd_oracle = app.add_subcommand("oracle", "independent brute-force references");
  cli.cmd_oracle->add_option("--config", cli.config_path, "experiment config (JSON)");
  cli.cmd_oracle->add_option("--model", cli.model, "wcm|credit|saw");
  cli.cmd_oracle->add_option("--n", cli.saw_n, "saw: walk length");
  cli.cmd_oracle->add_option("--w", cli.w, "wcm: weights")->delimiter(',');
  cli.cmd_oracle->add_option("--gamma", cli.gamma, "wcm: threshold");
  cli.cmd_oracle->add_option("--v", cli.v, "credit: loss level");
  cli.cmd_oracle->add_option("--cmc-samples", cli.cmc_samples, "credit: sample count");
  cli.cmd_oracle->add_option("--seed", cli.seed, "root seed");
  cli.cmd_oracle->add_option("--out", cli.out_path, "output path (default stdout)");
  cli.cmd_oracle->add_option("--csv", cli.csv_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (cli.cmd_run->parsed()) return do_run(cli);
    if (cli.cmd_pilot->parsed()) return do_pilot(cli);
    if (cli.cmd_bounds->parsed()) return do_bounds(cli);
    return do_oracle(cli);
  } catch (const ssa::TooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const ssa::RefuseRareRegime& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const ssa::ZeroSurvivors& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ssa::InfeasibleState& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ssa::NonPositiveLevels& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ssa::EmptyInitialSample& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ssa::InvalidTarget& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ssa::InvalidRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ssa::InvalidProbability& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ssa::ZeroTruth& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ssa::NonPositiveEstimate& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}
