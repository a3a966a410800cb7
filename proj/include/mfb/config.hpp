#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfb/assumptions.hpp"
#include "mfb/bismut.hpp"
#include "mfb/oracles.hpp"

namespace mfb {

/// A fully populated run description. Every field has a default; a config file
/// only overrides what it names.
struct RunConfig {
    // [model]
    std::size_t d = 1;
    double T = 1.0;

    // [kernel]
    KernelSpec kernel;

    // [drift], [diffusion]
    DriftFamily drift;
    DiffusionFamily diffusion;

    // [initial]
    InitialLaw law;

    // [sim]
    std::size_t n = 1000;
    std::size_t steps = 100;
    GridKind grid = GridKind::uniform;
    double gamma = 1.0;
    std::uint64_t seed = 1;
    double delta_factor = 1.0;
    bool write_flow = false;

    // [estimator]
    BetaKind beta = BetaKind::linear;
    TestFunction f;
    DirectionMap phi;  // default: constant e_1
    EnsembleMode mode = EnsembleMode::single;
    std::optional<double> reference;  // expected total, checked within 3 SE

    // [oracle]
    std::vector<double> epsilons{0.04, 0.02, 0.01, 0.005};
    double fd_epsilon = 0.01;
    std::vector<double> probe_times;
    double p = 2.0;
    double k = kUnbounded;
    double k_prime = kUnbounded;
    ZMode z_mode = ZMode::paired;
    double girsanov_moment = 1.0;
    double variation_p = 2.0;
    double moment_limit = 100.0;

    TimeGrid make_time_grid() const;
    AssumptionParams assumption_params() const;
    Experiment experiment() const;
};

/// Parses `key = value` text with [section] headers. '#' and ';' start comments.
/// Unknown sections or keys, duplicates and malformed values throw ParseError with
/// the line number and key.
///
/// Defaults resolved after parsing: a coulomb kernel without `delta` gets
/// delta_factor * N^(-1/d); without `grid` the grid is graded (gamma 2) when
/// kappa > 0 and uniform otherwise; without `probe_times` 8 log-spaced times in
/// [1e-3 T, T]; without phi keys phi is the constant e_1.
RunConfig parse_config_text(std::string_view text, std::string_view source = "<config>");

/// Reads and parses a config file, then throws ValidationError listing every failed
/// assumption check.
RunConfig parse_config(const std::filesystem::path& path);

/// As parse_config without the assumption check.
RunConfig load_config(const std::filesystem::path& path);

ValidationReport validate_config(const RunConfig& config);

/// One `section.key = value` line per field in a fixed order, numbers in shortest
/// round-trip form. Independent of whitespace and key order in the source text.
std::string canonical_text(const RunConfig& config);

/// FNV-1a 64 of canonical_text, as 16 hex digits.
std::string config_digest(const RunConfig& config);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double value);

}  // namespace mfb
