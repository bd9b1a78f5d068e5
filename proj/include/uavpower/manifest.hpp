#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace uavpower {

inline constexpr const char* kVersion = "1.0.0";

/// Everything needed to reproduce an output file. Written as '#' comment
/// lines at the top of every file the CLI produces; contains no clock or
/// host data, so identical invocations give identical bytes.
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, std::string> options;  ///< resolved values, sorted by key
    std::uint64_t seed = 0;
    std::string version = kVersion;

    std::vector<std::string> lines() const {
        auto join = [](const std::vector<std::string>& items) {
            if (items.empty()) return std::string("none");
            std::string s;
            for (const auto& i : items) {
                if (!s.empty()) s += ' ';
                s += i;
            }
            return s;
        };
        std::string opts;
        for (const auto& [k, v] : options) {
            if (!opts.empty()) opts += ' ';
            opts += k + ":" + v;
        }
        return {
            "uavpower " + version,
            "subcommand: " + subcommand,
            "inputs: " + join(inputs),
            "outputs: " + join(outputs),
            "options: " + opts,
            "seed: " + std::to_string(seed),
        };
    }

    void write(std::ostream& out) const {
        for (const auto& l : lines()) out << "# " << l << '\n';
    }
};

}  // namespace uavpower
