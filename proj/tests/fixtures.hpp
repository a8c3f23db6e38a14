#pragma once

#include "spe/model.hpp"

namespace spe::testing {

/// Client U calls A, which calls B inside an 80/20 alternative and a loop of
/// mean 2.5 iterations. One workload W of 3 users.
inline SoftwareModel tiny() {
  SoftwareModel m;
  m.interfaces = {{"IA", "IA", {{"a", "a"}, {"b", "b"}}}, {"IB", "IB", {{"c", "c"}}}};
  Component client{"U", "User", {}, {"IA"}};
  client.client = true;
  m.components = {client, {"A", "A", {"IA"}, {"IB"}}, {"B", "B", {"IB"}, {}}};
  m.workloads = {{"W", "W", 3, 1.0}};
  m.scenarios = {{"S", "S", "W",
                  {Message{"U", "A", "a"},
                   Alt{"", {{0.8, {Message{"A", "B", "c"}}}, {0.2, {Message{"A", "A", "b"}}}}},
                   Loop{2.5, {Message{"A", "B", "c"}}}}}};
  m.demands = {{"A", "a", 0.1}, {"A", "b", 0.2}, {"B", "c", 0.05}};
  m.requirements = {ResponseTimeRequirement{"R1", "W", 2.0}, UtilizationRequirement{"R2", 0.9}};
  canonicalize(m);
  return m;
}

}  // namespace spe::testing
