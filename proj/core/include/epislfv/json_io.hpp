#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "epislfv/event_law.hpp"
#include "epislfv/event_stream.hpp"
#include "epislfv/forward_sim.hpp"
#include "epislfv/geometry.hpp"

namespace epislfv {

using Json = nlohmann::json;

/// {"d": int, "atoms": [{"rate": a, "radius": r, "impact": u}, ...]}
Json to_json(const EventLaw& law);
EventLaw event_law_from_json(const Json& j);

/// {"L": [...], "boundary": "torus" | "truncated", "dilated_centers": bool}
Json to_json(const Region& region);
Region region_from_json(const Json& j);
BoundaryMode boundary_from_string(const std::string& name);
std::string to_string(BoundaryMode mode);

/// {"type": "whole" | "ball" | "halfspace" | "box", ...}
Json to_json(const Shape& shape, int dim);
Shape shape_from_json(const Json& j, int dim);
Point point_from_json(const Json& j, int dim);
Json to_json(const Point& p, int dim);

/// {"kind": "endemic", "epsilon": e}
/// {"kind": "pandemic", "normal": [...], "offset": o, "epsilon": e}
/// {"kind": "epidemic", "mask": shape, "level": l}
Json to_json(const InitialCondition& init, int dim);
InitialCondition initial_condition_from_json(const Json& j, int dim);

/// Config file: {gamma, law, region, h, init, horizon, probes, replicates,
/// master_seed} plus optional snapshot_times.
struct RunConfig {
  ForwardConfig forward;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
};

RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& config);

}  // namespace epislfv
