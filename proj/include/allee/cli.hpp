#pragma once

// Command-line front end. Every run writes one CSV or JSON document whose
// header records the full effective configuration.
//
// Exit codes: 0 success, 2 usage/config/domain error, 3 numerical failure.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace allee::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Inclusive grid lo..hi with `steps` points.
struct Range {
  double lo;
  double hi;
  std::size_t steps;

  double at(std::size_t i) const;
};

/// A parameter given either as a single value or as lo:hi:steps.
struct ParamSpec {
  std::optional<double> value;
  std::optional<Range> range;

  bool is_range() const { return range.has_value(); }
};

/// Parses "v" or "lo:hi:steps". Throws DomainError on malformed input,
/// lo >= hi or steps < 2.
ParamSpec parse_param(const std::string& text, const std::string& name);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Resolves a relative output path against $ALLEE_OUTPUT_DIR when set.
std::string resolve_output_path(const std::string& path);

/// Runs the tool on argv-style arguments (without the program name).
/// The document goes to --output if given, otherwise to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace allee::cli
