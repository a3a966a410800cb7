#include "mfb/time_grid.hpp"

#include <cmath>
#include <string>

#include "mfb/error.hpp"

namespace mfb {

GridKind parse_grid_kind(std::string_view name) {
    if (name == "uniform") return GridKind::uniform;
    if (name == "graded") return GridKind::graded;
    throw Error(ErrorCode::invalid_grid, "unknown grid kind '" + std::string(name) + "'");
}

const char* to_string(GridKind kind) { return kind == GridKind::uniform ? "uniform" : "graded"; }

TimeGrid make_grid(double T, std::size_t M, GridKind kind, double gamma) {
    if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorCode::invalid_grid, "grid horizon T must be positive");
    if (M < 1) throw Error(ErrorCode::invalid_grid, "grid needs at least one step");
    if (kind == GridKind::uniform) gamma = 1.0;
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw Error(ErrorCode::invalid_grid, "grading exponent must be >= 1");

    TimeGrid grid;
    grid.T = T;
    grid.M = M;
    grid.kind = kind;
    grid.gamma = gamma;
    grid.nodes.resize(M + 1);
    for (std::size_t m = 0; m <= M; ++m) {
        const double u = static_cast<double>(m) / static_cast<double>(M);
        grid.nodes[m] = T * (gamma == 1.0 ? u : std::pow(u, gamma));
    }
    for (std::size_t m = 0; m < M; ++m) {
        if (!(grid.nodes[m + 1] > grid.nodes[m])) {
            throw Error(ErrorCode::invalid_grid, "grid nodes are not strictly increasing (too many steps)");
        }
    }
    return grid;
}

}  // namespace mfb
