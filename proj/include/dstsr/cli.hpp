#pragma once

#include "dstsr/evaluate.hpp"
#include "dstsr/search.hpp"
#include "dstsr/time.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dstsr::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Config {
    std::optional<std::filesystem::path> input_csv;
    std::optional<std::filesystem::path> derived_csv;
    TimeRange fit_range = TimeRange::parse("1995-01-01", "2021-03-31");
    TimeRange holdout_range = TimeRange::parse("2021-05-01", "2021-10-01");
    std::size_t n_runs = 100;
    SearchConfig search = default_search();
    MultiRunOptions sampling{};
    BenchmarkOptions benchmark{};
    std::vector<StormEvent> storms = builtin_storm_events();
    std::size_t threads = 0;

    static SearchConfig default_search();
};

/// JSON config; unknown keys at any level raise ConfigError.
Config parse_config(std::string_view json_text);
Config load_config(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. args[0] is the
/// program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dstsr::cli
