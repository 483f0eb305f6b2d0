#pragma once

#include <memory>

#include "terradapt/sim/config.hpp"
#include "terradapt/terrain/world.hpp"
#include "terradapt/trainer/dataset.hpp"

namespace terradapt::sim {

// Drives the plant with random piecewise-constant inputs over the world and
// records (x, u, e, y) at the controller rate. Inputs turn the vehicle back
// toward the map centre inside the edge band. y is formed exactly as the
// online controller forms it: filtered noisy acceleration minus the nominal
// model, both evaluated with the input applied over the previous tick.
//
// Tracked: x = (v_x, omega), u = (u_v, u_omega).
// Ackermann: x = (v_x, v_y, omega), u = u_delta, y = lateral residual.
trainer::TrajectoryDataset generate_dataset(const ScenarioConfig& scenario, const DatagenConfig& gen,
                                            std::shared_ptr<const terrain::TerrainWorld> world);

} // namespace terradapt::sim
