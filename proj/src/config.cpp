#include "wlasso/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wlasso/errors.hpp"

namespace wlasso {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    if (trim(s).empty()) {
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
    throw ConfigError("config: '" + std::string(key) + "' expects " + std::string(want) +
                      ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T out{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (ec != std::errc() || ptr != end || text.empty()) {
        bad_value(key, text, std::is_integral_v<T> ? "an integer" : "a number");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        return false;
    }
    bad_value(key, text, "true or false");
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view text, F&& one) {
    std::vector<T> out;
    for (auto item : split_list(text)) {
        out.push_back(one(item));
    }
    return out;
}

std::string format_double(double x) {
    // Shortest representation that parses back to the same double.
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += fmt(v[i]);
    }
    return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, std::string_view source) {
    KeyValueConfig kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view text(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(source) + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const auto key = trim(text.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(std::string(source) + ":" + std::to_string(lineno) + ": empty key");
        }
        kv.set(std::string(key), std::string(trim(text.substr(eq + 1))));
    }
    return kv;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    return parse(in, path.string());
}

void KeyValueConfig::set(std::string key, std::string value) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const auto& e) { return e.first == key; });
    if (it != entries_.end()) {
        it->second = std::move(value);
    } else {
        entries_.emplace_back(std::move(key), std::move(value));
    }
}

void KeyValueConfig::apply_override(std::string_view assignment) {
    std::istringstream in{std::string(assignment)};
    const KeyValueConfig one = parse(in, "override");
    if (one.entries_.size() != 1) {
        throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    }
    set(one.entries_[0].first, one.entries_[0].second);
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

void KeyValueConfig::dump(std::ostream& os) const {
    for (const auto& [k, v] : entries_) {
        os << k << " = " << v << '\n';
    }
}

ExperimentConfig to_experiment_config(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    for (const auto& [key, value] : kv.entries()) {
        const std::string_view v = value;
        try {
            if (key == "model") {
                cfg.model = parse_model_kind(v);
            } else if (key == "sweep") {
                cfg.sweep = parse_sweep_kind(v);
            } else if (key == "p") {
                cfg.p = parse_number<Index>(key, v);
            } else if (key == "s") {
                cfg.s = parse_number<Index>(key, v);
            } else if (key == "n") {
                cfg.n = parse_number<Index>(key, v);
            } else if (key == "q") {
                cfg.q = parse_number<double>(key, v);
            } else if (key == "m_grid") {
                cfg.m_grid = parse_list<Index>(v, [&](auto x) { return parse_number<Index>(key, x); });
            } else if (key == "p_grid") {
                cfg.p_grid = parse_list<Index>(v, [&](auto x) { return parse_number<Index>(key, x); });
            } else if (key == "c_m") {
                cfg.c_m = parse_number<double>(key, v);
            } else if (key == "trials") {
                cfg.trials = parse_number<int>(key, v);
            } else if (key == "tune_trials") {
                cfg.tune_trials = parse_number<int>(key, v);
            } else if (key == "gamma_grid") {
                cfg.gamma_grid =
                    parse_list<double>(v, [&](auto x) { return parse_number<double>(key, x); });
            } else if (key == "gamma_tie_se") {
                cfg.gamma_tie_se = parse_number<double>(key, v);
            } else if (key == "target_l1") {
                cfg.target_l1 = parse_number<double>(key, v);
            } else if (key == "seed") {
                cfg.seed = parse_number<std::uint64_t>(key, v);
            } else if (key == "weight_kinds") {
                cfg.weight_kinds = parse_list<WeightKind>(v, [](auto x) { return parse_weight_kind(x); });
            } else if (key == "estimators") {
                cfg.estimators = parse_list<Estimator>(v, [](auto x) { return parse_estimator(x); });
            } else if (key == "c") {
                cfg.c = parse_number<double>(key, v);
            } else if (key == "noiseless") {
                cfg.noiseless = parse_bool(key, v);
            } else if (key == "allow_gamma_le_2") {
                cfg.allow_gamma_le_2 = parse_bool(key, v);
            } else if (key == "threads") {
                cfg.threads = parse_number<int>(key, v);
            } else {
                throw ConfigError("config: unknown key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("config: key '" + key + "': " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

KeyValueConfig from_experiment_config(const ExperimentConfig& cfg) {
    const auto idx = [](Index x) { return std::to_string(x); };
    KeyValueConfig kv;
    kv.set("model", std::string(to_string(cfg.model)));
    kv.set("sweep", std::string(to_string(cfg.sweep)));
    kv.set("p", idx(cfg.p));
    kv.set("s", idx(cfg.s));
    kv.set("n", idx(cfg.n));
    kv.set("q", format_double(cfg.q));
    kv.set("m_grid", join(cfg.m_grid, idx));
    kv.set("p_grid", join(cfg.p_grid, idx));
    kv.set("c_m", format_double(cfg.c_m));
    kv.set("trials", std::to_string(cfg.trials));
    kv.set("tune_trials", std::to_string(cfg.tune_trials));
    kv.set("gamma_grid", join(cfg.gamma_grid, format_double));
    kv.set("gamma_tie_se", format_double(cfg.gamma_tie_se));
    kv.set("target_l1", format_double(cfg.target_l1));
    kv.set("seed", std::to_string(cfg.seed));
    kv.set("weight_kinds",
           join(cfg.weight_kinds, [](WeightKind k) { return std::string(to_string(k)); }));
    kv.set("estimators",
           join(cfg.estimators, [](Estimator e) { return std::string(to_string(e)); }));
    kv.set("c", format_double(cfg.c));
    kv.set("noiseless", cfg.noiseless ? "true" : "false");
    kv.set("allow_gamma_le_2", cfg.allow_gamma_le_2 ? "true" : "false");
    kv.set("threads", std::to_string(cfg.threads));
    return kv;
}

}  // namespace wlasso
