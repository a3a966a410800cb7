#pragma once

// Shared per-step building blocks of the interacting, decoupled and linearised dynamics.

#include <span>

#include "mfb/pairwise.hpp"
#include "mfb/simulator.hpp"

namespace mfb::detail {

/// Interaction field of the particle system on itself (diagonal excluded, 1/(N-1)).
InteractionField interacting_field(const Ensemble& ens, const KernelSpec& kernel, double kernel_t,
                                   const PairRequest& request);

/// Interaction field of `ens` against a frozen snapshot.
InteractionField flow_field(const Ensemble& ens, std::span<const double> snapshot, const KernelSpec& kernel,
                            double kernel_t, FlowAverage average, const PairRequest& request);

void update_positions(Ensemble& ens, const CoefficientSet& coeffs, double t, double dt,
                      std::span<const double> increments, const InteractionField& field, std::size_t m);

/// v <- v + [grad b v + D] dt + (grad_v sigma) dW on the pre-update positions.
void update_variations(Ensemble& ens, const CoefficientSet& coeffs, double t, double dt,
                       std::span<const double> increments, const InteractionField& field, std::size_t m);

/// J <- J + [grad b + G] J dt + (grad sigma)[J, dW] on the pre-update positions.
void update_jacobians(Ensemble& ens, const CoefficientSet& coeffs, double t, double dt,
                      std::span<const double> increments, const InteractionField& field, std::size_t m);

std::vector<double> step_increments(const Ensemble& ens, std::size_t m, double dt);

void require_step(const Ensemble& ens, std::size_t m, const TimeGrid& grid);

}  // namespace mfb::detail
