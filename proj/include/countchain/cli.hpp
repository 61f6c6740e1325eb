#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace countchain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for malformed flags, grids or config files (exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "start:stop:step" (inclusive of both ends when step divides the range),
/// a comma list, or a single value.
std::vector<double> parse_grid(std::string_view text);
std::vector<int> parse_int_grid(std::string_view text);

/// key=value per line; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_config(std::string_view text);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

/// Full command-line entry point. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace countchain::cli
