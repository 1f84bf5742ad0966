// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/tabular.hpp"

namespace gflowlab {

PolicyTable uniform_forward(const PointedDag& dag) {
  PolicyTable table(dag.num_states());
  for (StateId s = 0; s < dag.num_states(); ++s) {
    if (s == dag.sink()) continue;
    const auto k = dag.children(s).size();
    table[s].assign(k, 1.0 / static_cast<double>(k));
  }
  return table;
}

PolicyTable uniform_backward(const PointedDag& dag) {
  PolicyTable table(dag.num_states());
  for (StateId s = 0; s < dag.num_states(); ++s) {
    if (s == dag.source() || s == dag.sink()) continue;
    const auto k = dag.parents(s).size();
    table[s].assign(k, 1.0 / static_cast<double>(k));
  }
  return table;
}

}  // namespace gflowlab
