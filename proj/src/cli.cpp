#include "dyncover/cli.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dyncover/analytic.hpp"
#include "dyncover/format.hpp"
#include "dyncover/simulate.hpp"
#include "dyncover/stats.hpp"

namespace dyncover::cli {

namespace {

using detail::format_double;

const char* bool_text(bool b) { return b ? "true" : "false"; }

struct RawOptions {
  int k0 = 0;
  double lambda = 0.0;
  int horizon = 0;
  std::string insertion = "deterministic";
  std::uint64_t seed = 0;
  std::uint64_t runs = 10'000;
  std::string format = "csv";
  std::string out;
  unsigned threads = 0;
  std::string config_path;
  std::vector<int> horizon_grid;
  std::vector<double> t_grid;
  std::string event_log;
  std::uint64_t log_run = 0;
};

void add_common_options(CLI::App* sub, RawOptions& raw) {
  sub->add_option("--k0", raw.k0, "Initial number of vertices (>= 3)");
  sub->add_option("--lambda", raw.lambda, "Walker move rate (>= 0)");
  sub->add_option("--horizon", raw.horizon, "Number of unit intervals T");
  sub->add_option("--insertion", raw.insertion,
                  "deterministic | poisson:<beta>");
  sub->add_option("--seed", raw.seed, "Master seed")->capture_default_str();
  sub->add_option("--runs", raw.runs, "Monte Carlo runs")->capture_default_str();
  sub->add_option("--format", raw.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--out", raw.out, "Output path (default: standard output)");
  sub->add_option("--threads", raw.threads,
                  "Worker threads (0 = available parallelism)");
  sub->add_option("--config", raw.config_path,
                  "JSON config file; flags override its values");
}

Insertion parse_insertion(const std::string& text) {
  if (text == "deterministic") return DeterministicInsertion{};
  constexpr std::string_view prefix = "poisson:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rate = text.substr(prefix.size());
    std::size_t used = 0;
    double beta = 0.0;
    try {
      beta = std::stod(rate, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == rate.size() && used > 0) return PoissonInsertion{beta};
  }
  throw ConfigError("--insertion must be 'deterministic' or 'poisson:<beta>' (got '" +
                    text + "')");
}

bool given(const CLI::App* sub, const std::string& name) {
  return sub->get_option(name)->count() > 0;
}

Command build_command(CommandKind kind, const CLI::App* sub,
                      const RawOptions& raw) {
  Command cmd;
  cmd.kind = kind;

  ModelConfig config;
  bool have_k0 = false, have_lambda = false, have_horizon = false;
  if (!raw.config_path.empty()) {
    std::ifstream in(raw.config_path);
    if (!in) {
      throw ConfigError("cannot read config file " + raw.config_path + ": " +
                        std::strerror(errno));
    }
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + raw.config_path + " is not valid JSON: " +
                        e.what());
    }
    config = config_from_json(doc);
    have_k0 = doc.contains("k0");
    have_lambda = doc.contains("lambda");
    have_horizon = doc.contains("horizon");
  }
  if (given(sub, "--k0")) config.k0 = raw.k0, have_k0 = true;
  if (given(sub, "--lambda")) config.lambda = raw.lambda, have_lambda = true;
  if (given(sub, "--horizon")) config.horizon = raw.horizon, have_horizon = true;
  if (given(sub, "--insertion")) config.insertion = parse_insertion(raw.insertion);
  if (given(sub, "--seed")) config.seed = raw.seed;

  if (!have_k0) throw ConfigError("--k0 is required");
  if (!have_lambda) throw ConfigError("--lambda is required");
  if (kind == CommandKind::Lln) {
    if (raw.horizon_grid.empty()) throw ConfigError("--T-grid is required");
    config.horizon = raw.horizon_grid.front();
  } else if (!have_horizon) {
    throw ConfigError("--horizon is required");
  }
  cmd.config = validate(config);

  if (kind == CommandKind::Azuma && raw.t_grid.empty()) {
    throw ConfigError("--t-grid is required");
  }
  const bool monte_carlo = kind != CommandKind::Analytic;
  if (monte_carlo && raw.runs < 2) throw ConfigError("--runs must be >= 2");

  cmd.runs = raw.runs;
  cmd.format = raw.format == "json" ? Format::Json : Format::Csv;
  if (!raw.out.empty()) cmd.out_path = raw.out;
  cmd.threads = raw.threads;
  cmd.horizon_grid = raw.horizon_grid;
  cmd.t_grid = raw.t_grid;
  if (!raw.event_log.empty()) cmd.event_log_path = raw.event_log;
  cmd.log_run = raw.log_run;
  return cmd;
}

std::ostream& diag(std::ostream& err) { return err << "dyncover: "; }

int emit_analytic(const Command& cmd, std::ostream& out) {
  const auto report = analytic::full_report(cmd.config);
  if (cmd.format == Format::Json) {
    out << analytic::to_json(report).dump(2) << '\n';
  } else {
    out << "quantity,value,ref\n";
    for (const auto& [key, value] : report.values) {
      out << key << ',' << format_double(value) << ",\"" << report.refs.at(key)
          << "\"\n";
    }
  }
  return kExitOk;
}

int emit_simulate(const Command& cmd, std::ostream& out, std::ostream& err) {
  Walker walker(cmd.config);
  nlohmann::json runs = nlohmann::json::array();
  if (cmd.format == Format::Csv) {
    out << "run,covered,visits_to_start,at_start_at_T,no_second_visit,"
           "final_vertex_count\n";
  }
  for (std::uint64_t i = 0; i < cmd.runs; ++i) {
    const auto s = walker.run(i).summary;
    if (cmd.format == Format::Csv) {
      out << i << ',' << s.covered << ',' << s.visits_to_start << ','
          << bool_text(s.at_start_at_T) << ',' << bool_text(s.no_second_visit)
          << ',' << s.final_vertex_count << '\n';
    } else {
      runs.push_back({{"run", i},
                      {"covered", s.covered},
                      {"visits_to_start", s.visits_to_start},
                      {"at_start_at_T", s.at_start_at_T},
                      {"no_second_visit", s.no_second_visit},
                      {"final_vertex_count", s.final_vertex_count}});
    }
  }
  if (cmd.format == Format::Json) {
    out << nlohmann::json{{"config", to_json(cmd.config)}, {"runs", runs}}.dump(2)
        << '\n';
  }
  if (cmd.event_log_path) {
    const auto result = walker.run(cmd.log_run, {.record_log = true});
    std::ofstream log_out(*cmd.event_log_path);
    if (!log_out) {
      diag(err) << "cannot open " << *cmd.event_log_path << ": "
                << std::strerror(errno) << '\n';
      return kExitUsage;
    }
    write_event_log_csv(log_out, *result.log);
  }
  return kExitOk;
}

int emit_verify(const Command& cmd, std::ostream& out) {
  const auto verdicts = stats::verify(cmd.config, cmd.runs, cmd.threads);
  if (cmd.format == Format::Json) {
    out << nlohmann::json{{"config", to_json(cmd.config)},
                          {"runs", cmd.runs},
                          {"verdicts", stats::verdicts_to_json(verdicts)}}
               .dump(2)
        << '\n';
  } else {
    stats::write_verdicts_csv(out, verdicts);
  }
  return stats::all_required_pass(verdicts) ? kExitOk : kExitCheckFailed;
}

int emit_lln(const Command& cmd, std::ostream& out) {
  const auto trace =
      stats::lln_trace(cmd.config, cmd.horizon_grid, cmd.runs, cmd.threads);
  if (cmd.format == Format::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : trace) {
      rows.push_back({{"T", p.horizon},
                      {"mean_ratio", p.ratio.mean},
                      {"stderr", p.ratio.stderr_},
                      {"limit", p.limit}});
    }
    out << nlohmann::json{{"config", to_json(cmd.config)}, {"trace", rows}}.dump(2)
        << '\n';
  } else {
    out << "T,mean_ratio,stderr,limit\n";
    for (const auto& p : trace) {
      out << p.horizon << ',' << format_double(p.ratio.mean) << ','
          << format_double(p.ratio.stderr_) << ',' << format_double(p.limit)
          << '\n';
    }
  }
  return kExitOk;
}

int emit_clt(const Command& cmd, std::ostream& out) {
  const auto r = stats::clt_check(cmd.config, cmd.runs, cmd.threads);
  if (cmd.format == Format::Json) {
    out << nlohmann::json{{"config", to_json(cmd.config)},
                          {"runs", cmd.runs},
                          {"ks_distance", r.ks_distance},
                          {"ks_distance_lattice", r.ks_distance_lattice},
                          {"threshold", stats::kKsThreshold},
                          {"pass", r.pass},
                          {"in_domain", r.in_domain},
                          {"mean", r.mean},
                          {"variance", r.variance}}
               .dump(2)
        << '\n';
  } else {
    out << "ks_distance,ks_distance_lattice,threshold,pass,in_domain,mean,"
           "variance\n"
        << format_double(r.ks_distance) << ','
        << format_double(r.ks_distance_lattice) << ','
        << format_double(stats::kKsThreshold) << ',' << bool_text(r.pass) << ','
        << bool_text(r.in_domain) << ',' << format_double(r.mean) << ','
        << format_double(r.variance) << '\n';
  }
  return r.pass ? kExitOk : kExitCheckFailed;
}

int emit_azuma(const Command& cmd, std::ostream& out) {
  const auto batch = stats::run_batch(cmd.config, cmd.runs, cmd.threads);
  const auto points = stats::azuma_check(batch, cmd.t_grid);
  bool ok = true;
  if (cmd.format == Format::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : points) {
      rows.push_back({{"t", p.t},
                      {"empirical_tail", p.empirical_tail},
                      {"stderr", p.stderr_},
                      {"bound", p.bound},
                      {"pass", p.pass}});
      ok = ok && p.pass;
    }
    out << nlohmann::json{{"config", to_json(cmd.config)},
                          {"runs", cmd.runs},
                          {"points", rows}}
               .dump(2)
        << '\n';
  } else {
    out << "t,empirical_tail,stderr,bound,pass\n";
    for (const auto& p : points) {
      out << format_double(p.t) << ',' << format_double(p.empirical_tail) << ','
          << format_double(p.stderr_) << ',' << format_double(p.bound) << ','
          << bool_text(p.pass) << '\n';
      ok = ok && p.pass;
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

std::variant<Command, ParseFailure> parse_args(int argc, const char* const* argv) {
  CLI::App app{"Walk on a growing complete graph: closed forms and Monte Carlo",
               "dyncover"};
  app.require_subcommand(1);
  RawOptions raw;

  struct Entry {
    CommandKind kind;
    CLI::App* sub;
  };
  std::vector<Entry> entries = {
      {CommandKind::Analytic, app.add_subcommand("analytic", "Evaluate closed forms")},
      {CommandKind::Simulate, app.add_subcommand("simulate", "Per-run summary table")},
      {CommandKind::Verify, app.add_subcommand("verify", "Closed forms vs Monte Carlo")},
      {CommandKind::Lln, app.add_subcommand("lln", "Trace of N_T/T over horizons")},
      {CommandKind::Clt, app.add_subcommand("clt", "KS distance of standardized N_T")},
      {CommandKind::Azuma, app.add_subcommand("azuma", "Empirical tails vs bound")},
  };
  for (auto& e : entries) add_common_options(e.sub, raw);
  entries[1].sub->add_option("--event-log", raw.event_log,
                             "Write the event log of one run as CSV");
  entries[1].sub->add_option("--log-run", raw.log_run,
                             "Run index for --event-log")
      ->capture_default_str();
  entries[3].sub->add_option("--T-grid", raw.horizon_grid,
                             "Comma-separated increasing horizons")
      ->delimiter(',');
  entries[5].sub->add_option("--t-grid", raw.t_grid,
                             "Comma-separated deviations t")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    return ParseFailure{kExitOk, app.help()};
  } catch (const CLI::ParseError& e) {
    const CLI::App* shown = &app;
    for (const auto& entry : entries) {
      if (entry.sub->parsed()) shown = entry.sub;
    }
    return ParseFailure{kExitUsage, std::string("error: ") + e.what() + "\n\n" +
                                        shown->help()};
  }

  for (const auto& e : entries) {
    if (!e.sub->parsed()) continue;
    try {
      return build_command(e.kind, e.sub, raw);
    } catch (const ConfigError& err) {
      return ParseFailure{kExitUsage, std::string("error: ") + err.what()};
    }
  }
  return ParseFailure{kExitUsage, app.help()};
}

int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
  std::ostringstream buffer;
  int code = kExitOk;
  try {
    switch (cmd.kind) {
      case CommandKind::Analytic:
        code = emit_analytic(cmd, buffer);
        break;
      case CommandKind::Simulate:
        code = emit_simulate(cmd, buffer, err);
        break;
      case CommandKind::Verify:
        diag(err) << "verify: " << cmd.runs << " runs\n";
        code = emit_verify(cmd, buffer);
        break;
      case CommandKind::Lln:
        diag(err) << "lln: " << cmd.horizon_grid.size() << " horizons x "
                  << cmd.runs << " runs\n";
        code = emit_lln(cmd, buffer);
        break;
      case CommandKind::Clt:
        diag(err) << "clt: " << cmd.runs << " runs\n";
        code = emit_clt(cmd, buffer);
        break;
      case CommandKind::Azuma:
        diag(err) << "azuma: " << cmd.runs << " runs\n";
        code = emit_azuma(cmd, buffer);
        break;
    }
  } catch (const ConfigError& e) {
    diag(err) << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (cmd.out_path) {
    std::ofstream file(*cmd.out_path, std::ios::binary);
    if (!file) {
      diag(err) << "cannot open " << *cmd.out_path << ": " << std::strerror(errno)
                << '\n';
      return kExitUsage;
    }
    file << buffer.str();
    if (!file.flush()) {
      diag(err) << "write to " << *cmd.out_path << " failed: "
                << std::strerror(errno) << '\n';
      return kExitUsage;
    }
  } else {
    out << buffer.str();
  }
  return code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto parsed = parse_args(argc, argv);
  if (auto* failure = std::get_if<ParseFailure>(&parsed)) {
    (failure->exit_code == kExitOk ? out : err) << failure->message << '\n';
    return failure->exit_code;
  }
  return execute(std::get<Command>(parsed), out, err);
}

}  // namespace dyncover::cli
