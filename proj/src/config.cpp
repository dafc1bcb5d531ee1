#include <hierfcst/config.hpp>

#include <hierfcst/error.hpp>
#include <hierfcst/rng.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace hierfcst::config {
namespace {

using RawSpec = std::pair<std::string, std::map<std::string, std::string>>;

const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> table = {
        {"run.seed", "0"},
        {"run.jobs", "1"},
        {"run.out", "hierfcst_run"},
        {"run.version", kVersion},

        {"data.input", ""},
        {"data.cache", ""},
        {"data.missing_as_zero", "true"},
        {"data.max_lead", "4"},

        {"synth.regime", "anticipatory"},
        {"synth.items", "50"},
        {"synth.periods", "45"},
        {"synth.leads", "4"},
        {"synth.csv", ""},

        {"transform.kind", "none"},
        {"transform.window", "auto"},
        {"transform.leads", "auto"},
        {"transform.scope", "all"},
        {"transform.item", ""},
        {"transform.periods", "train"},
        {"transform.output", ""},

        {"train.out", ""},
        {"train.periods", "train"},

        {"backtest.specs", "config/specs.ini"},
        {"backtest.train_periods", "37"},
        {"backtest.test_periods", "8"},
        {"backtest.feature_window", "8"},
        {"backtest.out", ""},

        {"trmf.rank", "4"},
        {"trmf.ar_order", "2"},
        {"trmf.lambda_f", "0.001"},
        {"trmf.lambda_z", "0.001"},
        {"trmf.lambda_ar", "1"},
        {"trmf.sweeps", "200"},
        {"trmf.tol", "1e-7"},
        {"trmf.density_floor", "0.25"},
        {"trmf.allow_sparse", "false"},
        {"trmf.transform", "none"},
        {"trmf.periods", "all"},
        {"trmf.horizon", "8"},
        {"trmf.out", ""},

        {"select.subset", "200"},
        {"select.intervals", "10"},
        {"select.overlap", "0.3"},
        {"select.k", "5"},
        {"select.min_cluster_size", "0"},
        {"select.features", "mean,variance,skewness,kurtosis,acf1,zero_fraction,max_mean_ratio"},
        {"select.models", ""},
        {"select.assignments", ""},
        {"select.out", ""},
        {"select.graph", ""},

        {"report.item", ""},
        {"report.forecasts", ""},
        {"report.out", ""},
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
read_sections(std::istream& in, const std::string& origin) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.message() + " at line " + std::to_string(e.line()));
    }
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> out;
    for (const auto& [section, child] : tree) {
        if (child.empty()) {
            throw ConfigError(origin + ": key '" + section + "' must appear inside a section");
        }
        auto& entry = out.emplace_back(section, std::vector<std::pair<std::string, std::string>>{});
        for (const auto& [key, value] : child) {
            entry.second.emplace_back(key, trim(value.data()));
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
    }
    return out;
}

models::ModelSpec make_spec(const std::string& name, const std::map<std::string, std::string>& raw,
                            std::uint64_t run_seed) {
    const auto family_it = raw.find("family");
    if (family_it == raw.end()) {
        throw ConfigError("spec '" + name + "' has no family");
    }
    const auto family = models::parse_family(family_it->second);
    auto feeding = models::FeedingMode::none;
    auto transform = preprocess::TransformKind::identity;
    std::map<std::string, double> params;
    for (const auto& [key, value] : raw) {
        if (key == "family") {
            continue;
        }
        if (key == "feeding") {
            feeding = models::parse_feeding(value);
        } else if (key == "transform") {
            transform = preprocess::parse_transform_kind(value);
        } else {
            params[key] = parse_double(name + "." + key, value);
        }
    }
    if (models::default_params(family).count("seed") != 0 && params.count("seed") == 0) {
        params["seed"] = static_cast<double>(derive_seed(run_seed, "spec:" + name) >> 11);
    }
    return models::ModelSpec(name, family, std::move(params), transform, feeding);
}

std::vector<models::ModelSpec> build_specs(const std::vector<RawSpec>& raw, std::uint64_t run_seed) {
    std::vector<models::ModelSpec> specs;
    std::set<std::string> names;
    for (const auto& [name, keys] : raw) {
        if (!names.insert(name).second) {
            throw ConfigError("spec '" + name + "' is defined twice");
        }
        specs.push_back(make_spec(name, keys, run_seed));
    }
    return specs;
}

std::vector<RawSpec> raw_specs(std::istream& in, const std::string& origin) {
    std::vector<RawSpec> out;
    for (const auto& [section, keys] : read_sections(in, origin)) {
        std::map<std::string, std::string> table(keys.begin(), keys.end());
        out.emplace_back(section, std::move(table));
    }
    return out;
}

} // namespace

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    merge(in, path.string());
}

void RunConfig::merge(std::istream& in, const std::string& origin) {
    for (const auto& [section, keys] : read_sections(in, origin)) {
        if (section.rfind("spec.", 0) == 0) {
            const auto name = section.substr(5);
            auto it = std::find_if(inline_specs_.begin(), inline_specs_.end(),
                                   [&](const RawSpec& s) { return s.first == name; });
            if (it == inline_specs_.end()) {
                it = inline_specs_.insert(inline_specs_.end(), {name, {}});
            }
            auto& spec = it->second;
            for (const auto& [key, value] : keys) {
                spec[key] = value;
            }
            continue;
        }
        for (const auto& [key, value] : keys) {
            const auto full = section + "." + key;
            if (full == "run.version") {
                continue; // stamp of the writer, not an input
            }
            if (values_.count(full) == 0) {
                throw ConfigError(origin + ": unknown config key '" + full + "'");
            }
            values_[full] = value;
        }
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (values_.count(key) == 0 || key == "run.version") {
        throw ConfigError("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    return it->second;
}

long long RunConfig::get_int(const std::string& key) const {
    const auto& value = get(key);
    long long out = 0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
    }
    return out;
}

double RunConfig::get_double(const std::string& key) const {
    return parse_double(key, get(key));
}

bool RunConfig::get_bool(const std::string& key) const {
    const auto& value = get(key);
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    throw ConfigError("'" + key + "' expects a boolean, got '" + value + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream in(get(key));
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (!part.empty()) {
            out.push_back(part);
        }
    }
    return out;
}

std::vector<models::ModelSpec> RunConfig::specs() const {
    const auto seed = static_cast<std::uint64_t>(get_int("run.seed"));
    if (!inline_specs_.empty()) {
        return build_specs(inline_specs_, seed);
    }
    const auto& path = get("backtest.specs");
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open specs file '" + path + "'");
    }
    return build_specs(raw_specs(in, path), seed);
}

std::uint64_t RunConfig::stage_seed(const std::string& stage) const {
    return derive_seed(static_cast<std::uint64_t>(get_int("run.seed")), stage);
}

std::filesystem::path RunConfig::output_path(const std::string& key, const std::string& fallback) const {
    const auto& value = get(key);
    if (!value.empty()) {
        return value;
    }
    return std::filesystem::path(get("run.out")) / fallback;
}

void RunConfig::write(std::ostream& out) const {
    std::string section;
    for (const auto& [full, value] : values_) {
        const auto dot = full.find('.');
        const auto s = full.substr(0, dot);
        if (s != section) {
            out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
            section = s;
        }
        out << full.substr(dot + 1) << " = " << value << '\n';
    }
    std::vector<models::ModelSpec> resolved;
    try {
        resolved = specs();
    } catch (const ConfigError&) {
        return; // specs are optional for stages that do not use them
    }
    out << '\n';
    write_specs(out, resolved);
}

std::vector<models::ModelSpec> parse_specs(std::istream& in, const std::string& origin) {
    return build_specs(raw_specs(in, origin), 0);
}

std::vector<models::ModelSpec> load_specs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open specs file '" + path.string() + "'");
    }
    return parse_specs(in, path.string());
}

void write_specs(std::ostream& out, const std::vector<models::ModelSpec>& specs) {
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& spec = specs[k];
        out << (k == 0 ? "" : "\n") << "[spec." << spec.name() << "]\n";
        out << "family = " << models::to_string(spec.family()) << '\n';
        out << "feeding = " << models::to_string(spec.feeding()) << '\n';
        out << "transform = " << preprocess::to_string(spec.transform()) << '\n';
        for (const auto& [key, value] : spec.params()) {
            out << key << " = " << format_double(value) << '\n';
        }
    }
}

} // namespace hierfcst::config
