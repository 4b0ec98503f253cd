// Command-line front end: boundary curves, critical-value calibration, power
// studies and single-dataset statistics. Every output file is paired with a
// key=value manifest that reproduces it byte-for-byte via --config.

#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hetdet/mc.hpp"
#include "hetdet/phase.hpp"
#include "hetdet/rootfind.hpp"
#include "hetdet/stats.hpp"

namespace {

using namespace hetdet;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_u64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "lo:hi:count" or a comma-separated list of values ("-inf" selects the
// degenerate alternative)
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double lo = 0, hi = 0;
    long count = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%ld", &lo, &hi, &count) != 3 || count < 1) {
      throw std::invalid_argument("bad grid spec '" + s + "' (expected lo:hi:count)");
    }
    if (count == 1) return {lo};
    for (long i = 0; i < count; ++i) {
      out.push_back(lo + (hi - lo) * double(i) / double(count - 1));
    }
    return out;
  }
  for (const auto& tok : split_csv(s)) out.push_back(std::stod(tok));
  if (out.empty()) throw std::invalid_argument("empty grid spec");
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  for (const auto& tok : split_csv(s)) out.push_back(std::stoll(tok));
  return out;
}

// Flat key=value config: the values act as defaults, command-line flags win.
std::vector<std::string> config_tokens(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  std::vector<std::string> tokens;
  if (path.empty()) return tokens;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
    std::size_t start = line.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line is not key=value: " + line);
    }
    const std::string key = line.substr(start, eq - start);
    const std::string value = line.substr(eq + 1);
    if (key == "subcommand" || key == "config" || value.empty()) continue;
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

struct ExitRequest {
  int code;
};

void parse_app(CLI::App& app, const std::vector<std::string>& args) {
  for (auto* opt : app.get_options()) {
    if (opt->get_expected_min() > 0) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  std::vector<std::string> merged = config_tokens(args);
  merged.insert(merged.end(), args.begin(), args.end());
  std::reverse(merged.begin(), merged.end());
  try {
    app.parse(merged);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    throw ExitRequest{kExitOk};
  } catch (const CLI::ParseError& e) {
    std::cerr << "argument error: " << e.what() << "\n" << app.help();
    throw ExitRequest{kExitUsage};
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << content;
}

void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string text = "# resolved configuration; reusable via --config\n";
  text += "subcommand=" + subcommand + "\n";
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  write_file(out_path + ".manifest", text);
}

// Options shared by the simulation-driven subcommands.
struct SimOpts {
  std::string family = "gaussian";
  std::string samplesize = "poisson-max1";
  std::int64_t n = 10000;
  double a0 = 0.5;
  double tau = 1.0;
  double negbin_r = 0.0;
  double alpha = 0.05;
  int runs_null = 999;
  int runs_alt = 1000;
  std::string thresholds_m = "3000,10000,30000,100000";
  std::string stats = "hc,hcthres,bonferroni,rank,chisq";
  int randomized = 1;
  int threads = 1;
  std::uint64_t seed = 0;

  void add_common(CLI::App& app) {
    app.add_option("--family", family, "response family: gaussian, poisson, bernoulli-half");
    app.add_option("--samplesize", samplesize,
                   "sample-size law: poisson-max1, rounded-normal, negbin, deterministic");
    app.add_option("--n", n, "number of hypotheses");
    // always explicit: published figures disagree on its value
    app.add_option("--a0", a0, "typical sample-size scale a0 (lambda = a0 log n)")
        ->required();
    app.add_option("--tau", tau, "rounded-normal dispersion");
    app.add_option("--negbin-r", negbin_r, "negative-binomial shape (0 = mean-matched)");
    app.add_option("--seed", seed, "64-bit experiment seed (generated when omitted)");
    app.add_option("--threads", threads, "worker threads (results are thread-count invariant)");
  }

  void add_mc(CLI::App& app) {
    app.add_option("--alpha", alpha, "type I error level");
    app.add_option("--runs-null", runs_null, "calibration runs");
    app.add_option("--runs-alt", runs_alt, "power runs per cell");
    app.add_option("--thresholds-m", thresholds_m,
                   "subset sizes m defining representative thresholds");
    app.add_option("--stats", stats, "statistics to evaluate");
    app.add_option("--randomized", randomized, "randomize discrete p-values (1) or not (0)");
  }

  SimConfig to_config(bool seed_given, double theta, double beta) const {
    SimConfig cfg;
    cfg.n = n;
    cfg.family = ExpFamilySpec::from_name(family);
    cfg.samplesize = SampleSizeSpec::from_name(samplesize);
    cfg.samplesize.a0 = a0;
    cfg.samplesize.tau = tau;
    cfg.samplesize.negbin_r = negbin_r;
    cfg.samplesize.n = n;
    cfg.theta = theta;
    cfg.beta = beta;
    cfg.alpha = alpha;
    cfg.runs_null = runs_null;
    cfg.runs_alt = runs_alt;
    cfg.threshold_m_list = parse_int_list(thresholds_m);
    cfg.statistics.clear();
    for (const auto& name : split_csv(stats)) {
      cfg.statistics.push_back(statistic_from_name(name));
    }
    if (cfg.statistics.empty()) throw std::invalid_argument("no statistics selected");
    cfg.randomized_pvalues = randomized != 0;
    cfg.threads = threads;
    cfg.seed = seed_given ? seed : std::random_device{}();
    return cfg;
  }

  std::vector<std::pair<std::string, std::string>> manifest(const SimConfig& cfg) const {
    return {
        {"family", cfg.family.name()},
        {"samplesize", cfg.samplesize.name()},
        {"n", std::to_string(cfg.n)},
        {"a0", fmt(cfg.samplesize.a0)},
        {"tau", fmt(cfg.samplesize.tau)},
        {"negbin-r", fmt(cfg.samplesize.negbin_r)},
        {"alpha", fmt(cfg.alpha)},
        {"runs-null", std::to_string(cfg.runs_null)},
        {"runs-alt", std::to_string(cfg.runs_alt)},
        {"thresholds-m", thresholds_m},
        {"stats", stats},
        {"randomized", cfg.randomized_pvalues ? "1" : "0"},
        {"seed", fmt_u64(cfg.seed)},
    };
  }
};

int run_curves(const std::vector<std::string>& args) {
  CLI::App app{"evaluate detection-boundary curves onto CSV"};
  SimOpts opts;
  opts.add_common(app);
  std::string curves = "bj,bh,bb,br";
  std::string theta_grid;
  std::string out = "curves.csv";
  double homog_a = 0.0;
  int grid_count = 200;
  std::string config_path;
  app.add_option("--curves", curves, "curves to evaluate: b, bj, bh, bb, br");
  app.add_option("--theta-grid", theta_grid, "lo:hi:count or value list (-inf allowed)");
  app.add_option("--grid-count", grid_count, "points in the default theta grid");
  app.add_option("--a", homog_a, "log-scale sample size for the homogeneous curve b");
  app.add_option("--out", out, "output CSV path");
  app.add_option("--config", config_path, "flat key=value config file");
  parse_app(app, args);

  const ExpFamilySpec fam = ExpFamilySpec::from_name(opts.family);
  SampleSizeSpec ss = SampleSizeSpec::from_name(opts.samplesize);
  ss.a0 = opts.a0;
  ss.tau = opts.tau;
  ss.n = opts.n;

  const std::vector<double> grid = theta_grid.empty()
                                       ? default_theta_grid(fam, ss, grid_count)
                                       : parse_grid(theta_grid);
  std::string csv = "curve,theta,value,regime,nu_star,a_star,residual\n";
  for (const auto& name : split_csv(curves)) {
    const CurveId id = curve_from_name(name);
    for (double theta : grid) {
      const PhasePoint pt = curve_point(id, fam, ss, theta, homog_a);
      csv += curve_name(pt.curve);
      csv += "," + fmt(pt.theta) + "," + fmt(pt.value) + "," + regime_name(pt.regime);
      if (pt.maximizer) {
        csv += "," + fmt(pt.maximizer->first) + "," + fmt(pt.maximizer->second);
      } else {
        csv += ",,";
      }
      csv += "," + fmt(pt.residual) + "\n";
    }
  }
  write_file(out, csv);
  write_manifest(out, "curves",
                 {{"family", opts.family},
                  {"samplesize", opts.samplesize},
                  {"n", std::to_string(opts.n)},
                  {"a0", fmt(opts.a0)},
                  {"tau", fmt(opts.tau)},
                  {"curves", curves},
                  {"theta-grid", theta_grid.empty() ? "" : theta_grid},
                  {"grid-count", std::to_string(grid_count)},
                  {"a", fmt(homog_a)},
                  {"out", out}});
  std::cerr << "wrote " << out << " (" << split_csv(curves).size() << " curves x "
            << grid.size() << " points)\n";
  return kExitOk;
}

int run_calibrate(const std::vector<std::string>& args) {
  CLI::App app{"calibrate critical values from all-null runs"};
  SimOpts opts;
  opts.add_common(app);
  opts.add_mc(app);
  std::string out = "critical.csv";
  std::string config_path;
  app.add_option("--out", out, "output CSV path");
  app.add_option("--config", config_path, "flat key=value config file");
  parse_app(app, args);

  const bool seed_given = app.count("--seed") > 0 || opts.seed != 0;
  const SimConfig cfg = opts.to_config(seed_given, 1.0, 0.65);
  const Experiment exp(cfg);
  const CriticalValues crit = exp.calibrate();

  std::string csv = "statistic,critical_value,direction,n,a0,family,samplesize,alpha,runs_null,seed\n";
  for (const auto& [id, value] : crit) {
    csv += statistic_name(id) + "," + fmt(value) + ",";
    csv += direction_of(id) == Direction::LargeIsSignificant ? "large" : "small";
    csv += "," + std::to_string(cfg.n) + "," + fmt(cfg.samplesize.a0) + "," +
           cfg.family.name() + "," + cfg.samplesize.name() + "," + fmt(cfg.alpha) + "," +
           std::to_string(cfg.runs_null) + "," + fmt_u64(cfg.seed) + "\n";
  }
  write_file(out, csv);
  auto kv = opts.manifest(cfg);
  kv.emplace_back("out", out);
  write_manifest(out, "calibrate", kv);
  std::cerr << "wrote " << out << "\n";
  return kExitOk;
}

int run_power(const std::vector<std::string>& args) {
  CLI::App app{"calibrate and estimate detection power over a (beta, theta) grid"};
  SimOpts opts;
  opts.add_common(app);
  opts.add_mc(app);
  std::string beta_grid = "0.55,0.65";
  std::string theta_grid = "1.0";
  std::string out = "power.csv";
  std::string config_path;
  app.add_option("--beta-grid", beta_grid, "sparsity grid: lo:hi:count or value list");
  app.add_option("--theta-grid", theta_grid, "tilt grid: lo:hi:count or value list");
  app.add_option("--out", out, "output CSV path");
  app.add_option("--config", config_path, "flat key=value config file");
  parse_app(app, args);

  const bool seed_given = app.count("--seed") > 0 || opts.seed != 0;
  const std::vector<double> betas = parse_grid(beta_grid);
  const std::vector<double> thetas = parse_grid(theta_grid);
  const SimConfig cfg = opts.to_config(seed_given, thetas.front(), betas.front());
  const Experiment exp(cfg);

  std::cerr << "calibrating on " << cfg.runs_null << " null runs\n";
  const CriticalValues crit = exp.calibrate();

  std::string csv =
      "statistic,beta,theta,critical_value,power,n,a0,family,samplesize,seed,type1_check\n";
  for (double beta : betas) {
    for (double theta : thetas) {
      const auto rows = exp.power_at(crit, beta, theta);
      for (const auto& r : rows) {
        csv += statistic_name(r.id) + "," + fmt(r.beta) + "," + fmt(r.theta) + "," +
               fmt(r.critical_value) + "," + fmt(r.power) + "," + std::to_string(cfg.n) +
               "," + fmt(cfg.samplesize.a0) + "," + cfg.family.name() + "," +
               cfg.samplesize.name() + "," + fmt_u64(r.seed_used) + "," +
               fmt(r.type1_check) + "\n";
      }
      std::cerr << "cell beta=" << beta << " theta=" << theta << " done\n";
    }
  }
  write_file(out, csv);
  auto kv = opts.manifest(cfg);
  kv.emplace_back("beta-grid", beta_grid);
  kv.emplace_back("theta-grid", theta_grid);
  kv.emplace_back("out", out);
  write_manifest(out, "power", kv);
  std::cerr << "wrote " << out << "\n";
  return kExitOk;
}

int run_stat(const std::vector<std::string>& args) {
  CLI::App app{"compute the five statistics for a (y, k) CSV file"};
  std::string input;
  std::string family = "gaussian";
  std::uint64_t seed = 0;
  int randomized = 1;
  std::string thresholds_m;
  std::string config_path;
  app.add_option("--input", input, "two-column CSV y,k with a header line")->required();
  app.add_option("--family", family, "response family for p-values and chi-squared");
  app.add_option("--seed", seed, "seed for the p-value randomization");
  app.add_option("--randomized", randomized, "randomize discrete p-values (1) or not (0)");
  app.add_option("--thresholds-m", thresholds_m,
                 "optional subset sizes m; default thresholds at every distinct k");
  app.add_option("--config", config_path, "flat key=value config file");
  parse_app(app, args);

  std::ifstream in(input);
  if (!in) throw std::invalid_argument("cannot open input file: " + input);
  std::vector<double> Y;
  std::vector<std::int64_t> K;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    double y = 0;
    long long k = 0;
    if (std::sscanf(line.c_str(), "%lf,%lld", &y, &k) != 2) {
      throw std::invalid_argument("malformed row at line " + std::to_string(line_no) +
                                  ": " + line);
    }
    Y.push_back(y);
    K.push_back(k);
  }
  if (Y.empty()) throw std::invalid_argument("input has no data rows: " + input);

  const ExpFamilySpec fam = ExpFamilySpec::from_name(family);
  const PValueSet pv = pvalues_for_dataset(fam, Y, K, seed, randomized != 0);

  std::vector<std::int64_t> thresholds;
  if (thresholds_m.empty()) {
    thresholds.assign(K.begin(), K.end());  // exact maximum over every level
  } else {
    thresholds = representative_thresholds(K, parse_int_list(thresholds_m));
  }

  const auto print = [](StatisticId id, const std::function<StatResult()>& eval) {
    const char* dir = direction_of(id) == Direction::LargeIsSignificant
                          ? "large-is-significant"
                          : "small-is-significant";
    try {
      std::printf("%-10s %-24.17g %s\n", statistic_name(id).c_str(), eval().value, dir);
    } catch (const UndefinedStatistic& e) {
      std::printf("%-10s %-24s %s (%s)\n", statistic_name(id).c_str(), "undefined", dir,
                  e.what());
    }
  };
  print(StatisticId::HC, [&] { return hc(pv.p); });
  print(StatisticId::HCThres, [&] { return hc_threshold(pv, thresholds); });
  print(StatisticId::Bonferroni, [&] { return bonferroni(pv.p); });
  print(StatisticId::RankAdjust, [&] { return rank_adjust(pv); });
  print(StatisticId::ChiSq, [&] { return chi_squared(Y, K, fam.kind); });
  return kExitOk;
}

void usage(std::ostream& os) {
  os << "usage: hetdet <subcommand> [options]\n"
        "\n"
        "subcommands:\n"
        "  curves      evaluate detection-boundary curves onto CSV\n"
        "  calibrate   calibrate critical values from all-null runs\n"
        "  power       calibrate then estimate power over a (beta, theta) grid\n"
        "  stat        compute the five statistics for a (y, k) CSV file\n"
        "\n"
        "run 'hetdet <subcommand> --help' for the full option list\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    usage(std::cerr);
    return kExitUsage;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    usage(std::cout);
    return kExitOk;
  }
  const std::string cmd = args[0];
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  try {
    if (cmd == "curves") return run_curves(rest);
    if (cmd == "calibrate") return run_calibrate(rest);
    if (cmd == "power") return run_power(rest);
    if (cmd == "stat") return run_stat(rest);
    std::cerr << "unknown subcommand: " << cmd << "\n";
    usage(std::cerr);
    return kExitUsage;
  } catch (const ExitRequest& e) {
    return e.code;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const CalibrationError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    usage(std::cerr);
    return kExitUsage;
  }
}
