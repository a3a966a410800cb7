#include "mfb/ensemble.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mfb/error.hpp"
#include "mfb/parallel.hpp"
#include "mfb/rng.hpp"

namespace mfb {

namespace {

std::vector<double> or_zero(const std::vector<double>& v, std::size_t dim) {
    return v.empty() ? std::vector<double>(dim, 0.0) : v;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

LawKind parse_law_kind(std::string_view name) {
    if (name == "dirac") return LawKind::dirac;
    if (name == "gaussian") return LawKind::gaussian;
    if (name == "uniform_box") return LawKind::uniform_box;
    if (name == "two_point") return LawKind::two_point;
    throw Error(ErrorCode::invalid_law, "unknown initial law '" + std::string(name) + "'");
}

const char* to_string(LawKind kind) {
    switch (kind) {
        case LawKind::dirac: return "dirac";
        case LawKind::gaussian: return "gaussian";
        case LawKind::uniform_box: return "uniform_box";
        case LawKind::two_point: return "two_point";
    }
    return "dirac";
}

void InitialLaw::check(std::size_t dim) const {
    auto require_dim = [dim](const std::vector<double>& v, const char* what) {
        if (!v.empty() && v.size() != dim) {
            throw Error(ErrorCode::invalid_law, std::string(what) + " must have " + std::to_string(dim) + " entries");
        }
        if (!all_finite(v)) throw Error(ErrorCode::invalid_law, std::string(what) + " must be finite");
    };
    require_dim(location, "initial location");
    switch (kind) {
        case LawKind::dirac: break;
        case LawKind::gaussian:
            if (!(scale >= 0.0) || !std::isfinite(scale)) {
                throw Error(ErrorCode::invalid_law, "gaussian scale must be finite and >= 0");
            }
            break;
        case LawKind::uniform_box: {
            require_dim(lower, "box lower");
            require_dim(upper, "box upper");
            const auto lo = or_zero(lower, dim);
            const auto hi = or_zero(upper, dim);
            for (std::size_t k = 0; k < dim; ++k) {
                if (!(hi[k] > lo[k])) throw Error(ErrorCode::invalid_law, "box upper must exceed lower");
            }
            break;
        }
        case LawKind::two_point:
            require_dim(other, "second atom");
            if (!(weight >= 0.0 && weight <= 1.0)) {
                throw Error(ErrorCode::invalid_law, "two_point weight must lie in [0, 1]");
            }
            break;
    }
}

void Ensemble::init_jacobians() {
    jacobians.assign(n * dim * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < dim; ++k) jacobians[i * dim * dim + k * dim + k] = 1.0;
    }
}

Ensemble make_ensemble(std::vector<double> positions, std::size_t dim, std::uint64_t seed) {
    if (dim == 0 || positions.size() % dim != 0 || positions.empty()) {
        throw Error(ErrorCode::invalid_argument, "positions must be a non-empty N x d array");
    }
    Ensemble ens;
    ens.dim = dim;
    ens.n = positions.size() / dim;
    ens.positions = std::move(positions);
    ens.seed = seed;
    ens.streams.resize(ens.n);
    std::iota(ens.streams.begin(), ens.streams.end(), std::uint64_t{0});
    return ens;
}

Ensemble init_ensemble(const InitialLaw& law, std::size_t n, std::size_t dim, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "ensemble needs N >= 1");
    if (dim < 1) throw Error(ErrorCode::invalid_argument, "ensemble needs d >= 1");
    law.check(dim);
    const auto loc = or_zero(law.location, dim);
    const auto lo = or_zero(law.lower, dim);
    const auto hi = or_zero(law.upper, dim);
    const auto other = or_zero(law.other, dim);

    std::vector<double> positions(n * dim);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            CounterStream stream(seed, i, -1);
            double* x = positions.data() + i * dim;
            switch (law.kind) {
                case LawKind::dirac:
                    for (std::size_t k = 0; k < dim; ++k) x[k] = loc[k];
                    break;
                case LawKind::gaussian:
                    for (std::size_t k = 0; k < dim; ++k) x[k] = loc[k] + law.scale * stream.normal();
                    break;
                case LawKind::uniform_box:
                    for (std::size_t k = 0; k < dim; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * stream.uniform();
                    break;
                case LawKind::two_point: {
                    const auto& atom = stream.uniform() < law.weight ? loc : other;
                    for (std::size_t k = 0; k < dim; ++k) x[k] = atom[k];
                    break;
                }
            }
        }
    });
    return make_ensemble(std::move(positions), dim, seed);
}

void draw_increments(const Ensemble& ens, std::size_t m, double dt, std::span<double> out) {
    parallel_for(ens.n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            brownian_increment(ens.seed, ens.streams[i], static_cast<std::int64_t>(m), dt,
                               out.subspan(i * ens.dim, ens.dim));
        }
    });
}

}  // namespace mfb
