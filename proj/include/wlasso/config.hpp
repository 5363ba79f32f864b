#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wlasso/experiments.hpp"

namespace wlasso {

/**
 * Flat `key = value` configuration. Blank lines and text after `#` are
 * ignored; lists are comma separated. Later assignments replace earlier ones
 * but keep the key's original position, so dumps stay in file order.
 */
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in, std::string_view source = "<input>");
    static KeyValueConfig from_file(const std::filesystem::path& path);

    void set(std::string key, std::string value);
    /// Applies one `key=value` override.
    void apply_override(std::string_view assignment);

    std::optional<std::string> get(std::string_view key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }

    void dump(std::ostream& os) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Starts from the defaults and applies every entry; unknown keys and
/// unparsable values raise ConfigError.
ExperimentConfig to_experiment_config(const KeyValueConfig& kv);

/// Every field, with doubles printed so they parse back to the same value.
KeyValueConfig from_experiment_config(const ExperimentConfig& cfg);

}  // namespace wlasso
