#pragma once

#include "ghostflow/diagnostics.hpp"
#include "ghostflow/evolve.hpp"
#include "ghostflow/trajectories.hpp"

#include <vector>

namespace ghostflow {

// Everything one single-model run produces, in memory: the packet, the three
// trajectory families and the per-member diagnostics.
struct SeriesBundle {
    PacketSeries packet;
    std::vector<TrajectorySeries> bohmian;    // one per member
    std::vector<TrajectorySeries> classical;  // matched twin per member
    TrajectorySeries centre;
    TrajectorySeries classical_ref;  // classical twin of the centre initial data
    EnsembleDiagnostics diag;
};

}  // namespace ghostflow
