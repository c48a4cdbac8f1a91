#include "epislfv/json_io.hpp"

#include <stdexcept>

namespace epislfv {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw std::invalid_argument(std::string("config: missing key '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number()) throw std::invalid_argument(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

Json to_json(const EventLaw& law) {
  Json atoms = Json::array();
  for (const auto& atom : law.atoms)
    atoms.push_back({{"rate", atom.rate}, {"radius", atom.radius}, {"impact", atom.impact}});
  return Json{{"d", law.dimension}, {"atoms", atoms}};
}

EventLaw event_law_from_json(const Json& j) {
  const Json& d = require(j, "d");
  if (!d.is_number_integer()) throw std::invalid_argument("config: 'd' must be an integer");
  EventLaw law;
  law.dimension = d.get<int>();
  const Json& atoms = require(j, "atoms");
  if (!atoms.is_array()) throw std::invalid_argument("config: 'atoms' must be an array");
  for (const auto& a : atoms) law.atoms.push_back({number(a, "rate"), number(a, "radius"), number(a, "impact")});
  law.validate();
  return law;
}

BoundaryMode boundary_from_string(const std::string& name) {
  if (name == "torus") return BoundaryMode::kTorus;
  if (name == "truncated") return BoundaryMode::kTruncated;
  throw std::invalid_argument("unknown boundary mode '" + name + "'");
}

std::string to_string(BoundaryMode mode) { return mode == BoundaryMode::kTorus ? "torus" : "truncated"; }

Json to_json(const Region& region) {
  Json sides = Json::array();
  for (int i = 0; i < region.dimension; ++i) sides.push_back(region.sides[i]);
  Json j{{"L", sides}, {"boundary", to_string(region.boundary)}};
  if (!region.is_torus()) j["dilated_centers"] = region.dilated_centers;
  return j;
}

Region region_from_json(const Json& j) {
  const Json& sides = require(j, "L");
  if (!sides.is_array()) throw std::invalid_argument("config: 'L' must be an array");
  const auto mode = j.contains("boundary") ? boundary_from_string(j.at("boundary").get<std::string>())
                                           : BoundaryMode::kTorus;
  Region region(sides.get<std::vector<double>>(), mode);
  if (j.contains("dilated_centers")) region.dilated_centers = j.at("dilated_centers").get<bool>();
  return region;
}

Point point_from_json(const Json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw std::invalid_argument("config: point has the wrong dimension");
  Point p;
  for (int i = 0; i < dim; ++i) p[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return p;
}

Json to_json(const Point& p, int dim) {
  Json out = Json::array();
  for (int i = 0; i < dim; ++i) out.push_back(p[i]);
  return out;
}

Json to_json(const Shape& shape, int dim) {
  if (const auto* b = std::get_if<BallShape>(&shape))
    return {{"type", "ball"}, {"center", to_json(b->center, dim)}, {"radius", b->radius}};
  if (const auto* h = std::get_if<HalfSpaceShape>(&shape))
    return {{"type", "halfspace"}, {"normal", to_json(h->normal, dim)}, {"offset", h->offset}};
  if (const auto* x = std::get_if<BoxShape>(&shape))
    return {{"type", "box"}, {"lo", to_json(x->lo, dim)}, {"hi", to_json(x->hi, dim)}};
  return {{"type", "whole"}};
}

Shape shape_from_json(const Json& j, int dim) {
  const auto type = require(j, "type").get<std::string>();
  if (type == "whole") return WholeSpace{};
  if (type == "ball") return BallShape{point_from_json(require(j, "center"), dim), number(j, "radius")};
  if (type == "halfspace") return HalfSpaceShape{point_from_json(require(j, "normal"), dim), number(j, "offset")};
  if (type == "box") return BoxShape{point_from_json(require(j, "lo"), dim), point_from_json(require(j, "hi"), dim)};
  throw std::invalid_argument("config: unknown shape type '" + type + "'");
}

Json to_json(const InitialCondition& init, int dim) {
  switch (init.kind) {
    case InitialCondition::Kind::kEndemic:
      return {{"kind", "endemic"}, {"epsilon", init.level}};
    case InitialCondition::Kind::kPandemic: {
      const auto& h = std::get<HalfSpaceShape>(init.mask);
      return {{"kind", "pandemic"}, {"normal", to_json(h.normal, dim)}, {"offset", h.offset}, {"epsilon", init.level}};
    }
    case InitialCondition::Kind::kEpidemic:
      return {{"kind", "epidemic"}, {"mask", to_json(init.mask, dim)}, {"level", init.level}};
    case InitialCondition::Kind::kCustom:
      return {{"kind", "custom"}, {"values", init.custom}};
  }
  return {};
}

InitialCondition initial_condition_from_json(const Json& j, int dim) {
  const auto kind = require(j, "kind").get<std::string>();
  if (kind == "endemic") return InitialCondition::endemic(number(j, "epsilon"));
  if (kind == "pandemic")
    return InitialCondition::pandemic(point_from_json(require(j, "normal"), dim), number(j, "offset"),
                                      number(j, "epsilon"));
  if (kind == "epidemic") return InitialCondition::epidemic(shape_from_json(require(j, "mask"), dim), number(j, "level"));
  if (kind == "custom") return InitialCondition::from_cells(require(j, "values").get<std::vector<double>>());
  throw std::invalid_argument("config: unknown initial condition '" + kind + "'");
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  RunConfig rc;
  auto& f = rc.forward;
  f.gamma = number(j, "gamma");
  f.law = event_law_from_json(require(j, "law"));
  f.region = region_from_json(require(j, "region"));
  f.cell_edge = j.contains("h") ? number(j, "h") : 1.0;
  const int dim = f.region.dimension;
  f.init = initial_condition_from_json(require(j, "init"), dim);
  f.horizon = number(j, "horizon");
  if (j.contains("probes")) {
    for (const auto& p : j.at("probes")) {
      Probe probe;
      probe.id = p.value("id", std::string("probe") + std::to_string(f.probes.size()));
      probe.window = p.contains("window") ? shape_from_json(p.at("window"), dim) : Shape{WholeSpace{}};
      probe.times = require(p, "times").get<std::vector<double>>();
      f.probes.push_back(std::move(probe));
    }
  }
  if (j.contains("snapshot_times")) f.snapshot_times = j.at("snapshot_times").get<std::vector<double>>();
  if (j.contains("replicates")) rc.replicates = j.at("replicates").get<std::size_t>();
  if (j.contains("master_seed")) rc.master_seed = j.at("master_seed").get<std::uint64_t>();
  f.validate();
  return rc;
}

Json to_json(const RunConfig& config) {
  const auto& f = config.forward;
  const int dim = f.region.dimension;
  Json probes = Json::array();
  for (const auto& p : f.probes) probes.push_back({{"id", p.id}, {"window", to_json(p.window, dim)}, {"times", p.times}});
  Json j{{"gamma", f.gamma},
         {"law", to_json(f.law)},
         {"region", to_json(f.region)},
         {"h", f.cell_edge},
         {"init", to_json(f.init, dim)},
         {"horizon", f.horizon},
         {"probes", probes},
         {"replicates", config.replicates},
         {"master_seed", config.master_seed}};
  if (!f.snapshot_times.empty()) j["snapshot_times"] = f.snapshot_times;
  return j;
}

}  // namespace epislfv
