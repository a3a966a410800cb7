#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace mfb {

enum class GridKind { uniform, graded };

GridKind parse_grid_kind(std::string_view name);
const char* to_string(GridKind kind);

/// Partition 0 = t_0 < ... < t_M = T with t_m = T (m/M)^gamma (gamma = 1 for uniform).
struct TimeGrid {
    double T = 1.0;
    std::size_t M = 1;
    GridKind kind = GridKind::uniform;
    double gamma = 1.0;
    std::vector<double> nodes;

    std::size_t steps() const noexcept { return M; }
    double dt(std::size_t m) const { return nodes[m + 1] - nodes[m]; }

    /// Time at which the kernel prefactor t^kappa is evaluated on step m.
    /// Step 0 uses t_1 so that t^kappa is never taken at t = 0.
    double kernel_time(std::size_t m) const { return m == 0 ? nodes[1] : nodes[m]; }
};

TimeGrid make_grid(double T, std::size_t M, GridKind kind = GridKind::uniform, double gamma = 1.0);

}  // namespace mfb
