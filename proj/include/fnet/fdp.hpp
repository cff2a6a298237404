#pragma once

#include "fnet/fluid.hpp"
#include "fnet/network.hpp"

namespace fnet {

enum class Phase { positive, zero };

// Times at which the station-boundary pattern of a two-station solution
// changes, with per-station phase tags for each interval between them.
struct PhaseSequence {
  std::vector<double> times;                 // t_0 < ... < t_M, spanning the domain
  std::vector<std::vector<Phase>> labels;    // [interval][station]
};

// Segment decomposition of a positive non-idling two-station solution: the
// modified solution agrees with the input at every cut time and each station's
// aggregate queue is identically positive or identically zero on each open
// interval between cuts.
struct Decomposition {
  FluidSolution modified;
  std::vector<double> cut_times;
  std::vector<std::vector<Phase>> phase_labels;  // [interval][station]
};

// Scans the piecewise-linear station aggregates for zero runs (tolerance 1e-9;
// runs shorter than 1e-9 time units snap to points). Throws
// std::invalid_argument when the network is not two-station, when the total
// queue vanishes somewhere, or when both stations' zero sets overlap
// (degenerate input).
PhaseSequence detect_phase_sequence(const NetworkSpec& net, const FluidSolution& sol);

// Linearizes every boundary segment (maximal zero run of one station) of the
// input, cutting at run endpoints and interior touch points.
Decomposition fdp_decompose(const NetworkSpec& net, const FluidSolution& sol);

// Verifies the decomposition bounds: M <= 2 c_big theta sup(1/||Q||) + 2,
// inf ||modified|| >= inf ||input||, and consecutive opposite-station boundary
// starts spaced at least inf ||Q|| / c_big apart.
ValidationReport fdp_bound_check(const NetworkSpec& net, const FluidSolution& sol,
                                 const Decomposition& dec);

std::string decomposition_to_json(const NetworkSpec& net, const Decomposition& dec);

}  // namespace fnet
