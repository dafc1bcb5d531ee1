#pragma once

#include <hierfcst/models/spec.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hierfcst::config {

inline constexpr const char* kVersion = "1.0.0";

//! Resolved "section.key" -> value table covering every stage.
//!
//! Precedence, lowest first: built-in defaults, config file, explicit
//! overrides (command-line flags). Model specs live in `[spec.NAME]`
//! sections, either inline or in the file named by `backtest.specs`.
class RunConfig {
public:
    RunConfig();

    //! Reads an INI file on top of the current values. Unknown sections or
    //! keys raise ConfigError.
    void merge_file(const std::filesystem::path& path);
    void merge(std::istream& in, const std::string& origin = "<stream>");

    //! Override of a known key (ConfigError otherwise).
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    long long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;

    //! Inline `[spec.NAME]` sections if any, otherwise the `backtest.specs`
    //! file. Specs without an explicit seed get one derived from `run.seed`.
    std::vector<models::ModelSpec> specs() const;

    //! Seed of a stage, derived from `run.seed`.
    std::uint64_t stage_seed(const std::string& stage) const;

    //! Output path for `key`, or `<run.out>/<fallback>` when the key is empty.
    std::filesystem::path output_path(const std::string& key, const std::string& fallback) const;

    //! Every value plus inlined specs, sorted. Loading it reproduces the run.
    void write(std::ostream& out) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    //! [spec.<name>] sections in order of first appearance.
    std::vector<std::pair<std::string, std::map<std::string, std::string>>> inline_specs_;
};

//! `[NAME]` sections with `family`, optional `feeding` and `transform`, and
//! numeric hyperparameters. Out-of-scope families raise OutOfScopeError.
std::vector<models::ModelSpec> parse_specs(std::istream& in, const std::string& origin = "<stream>");
std::vector<models::ModelSpec> load_specs(const std::filesystem::path& path);

//! Spec sections as `[spec.NAME]` blocks.
void write_specs(std::ostream& out, const std::vector<models::ModelSpec>& specs);

} // namespace hierfcst::config
