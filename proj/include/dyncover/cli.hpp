#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dyncover/model.hpp"

namespace dyncover::cli {

enum class CommandKind { Analytic, Simulate, Verify, Lln, Clt, Azuma };

enum class Format { Csv, Json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

struct Command {
  CommandKind kind = CommandKind::Analytic;
  ModelConfig config;
  std::uint64_t runs = 10'000;
  Format format = Format::Csv;
  std::optional<std::string> out_path;
  unsigned threads = 0;  // 0 = available parallelism
  std::vector<int> horizon_grid;  // lln
  std::vector<double> t_grid;     // azuma
  std::optional<std::string> event_log_path;  // simulate
  std::uint64_t log_run = 0;
};

/// Usage or validation failure; `message` already contains the usage text
/// where appropriate.
struct ParseFailure {
  int exit_code = kExitUsage;
  std::string message;
};

std::variant<Command, ParseFailure> parse_args(int argc, const char* const* argv);

/// Runs the command, writing data to `out` (or --out) and diagnostics to
/// `err`. Returns 0 on success, 1 when a required check fails, 2 on
/// validation or I/O errors.
int execute(const Command& cmd, std::ostream& out, std::ostream& err);

/// parse_args + execute.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dyncover::cli
