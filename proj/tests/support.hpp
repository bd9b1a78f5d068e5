#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uavpower/uavpower.hpp"

namespace testing_support {

using Real = boost::multiprecision::cpp_bin_float_50;

inline std::string fixture(const std::string& name) { return std::string(UAVPOWER_FIXTURE_DIR) + "/" + name; }

inline uavpower::ModelParams fixture_params() {
    std::ifstream in(fixture("reference_params.txt"));
    return uavpower::params_from_document(uavpower::parse_key_values(in));
}

// Extended-precision, term-by-term evaluation of the generalized power
// model, written straight from the formula (no cancellation rewrite).
struct HighPrecisionPower {
    Real blade_profile, induced, parasite, total;
};

inline HighPrecisionPower reference_power(double speed, double a_perp, const uavpower::ModelParams& p) {
    using boost::multiprecision::sqrt;
    const Real v(speed), a(a_perp), c1(p.c1), c2(p.c2), c3(p.c3), c4(p.c4), c5(p.c5), g(p.g);
    const Real k = 1 + a * a / (g * g);
    HighPrecisionPower out;
    out.blade_profile = c1 * (1 + c2 * v * v);
    out.induced = c3 * sqrt(k) * sqrt(sqrt(k + v * v * v * v / (c4 * c4)) - v * v / c4);
    out.parasite = c5 * v * v * v;
    out.total = out.blade_profile + out.induced + out.parasite;
    return out;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Random physically plausible parameter set.
inline uavpower::ModelParams random_params(uavpower::Rng& rng) {
    return {rng.uniform(20.0, 200.0), rng.uniform(1e-3, 0.1), rng.uniform(20.0, 200.0), rng.uniform(1.0, 50.0),
            rng.uniform(1e-3, 0.5),   rng.uniform(0.5, 10.0),  9.81};
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("uavpower_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
