// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "gflowlab/graph.hpp"
#include "gflowlab/hypergrid.hpp"
#include "oracles.hpp"

namespace gflowlab {
namespace {

GridSpec grid(int n) { return GridSpec{n, {}}; }

TEST(Children, SourceOfTwoByTwo) {
  const auto g = grid(2);
  const auto dag = build_grid(g);
  const std::vector<StateId> want{grid_state(g, 1, 0), grid_state(g, 0, 1), g.sink()};
  EXPECT_EQ(dag.children(grid_state(g, 0, 0)), want);
}

TEST(Children, CornerOnlyTerminates) {
  const auto g = grid(2);
  const auto dag = build_grid(g);
  EXPECT_EQ(dag.children(grid_state(g, 1, 1)), std::vector<StateId>{g.sink()});
}

TEST(Children, EdgeCellOfThreeByThree) {
  const auto g = grid(3);
  const auto dag = build_grid(g);
  const std::vector<StateId> want{grid_state(g, 2, 0), grid_state(g, 1, 1), g.sink()};
  EXPECT_EQ(dag.children(grid_state(g, 1, 0)), want);
}

TEST(Children, RejectsSinkAndUnknownIds) {
  const auto dag = build_grid(grid(2));
  EXPECT_THROW(dag.children(dag.sink()), std::invalid_argument);
  EXPECT_THROW(dag.children(99), std::out_of_range);
}

TEST(Parents, CornerOfTwoByTwoInIndexOrder) {
  const auto g = grid(2);
  const auto dag = build_grid(g);
  // Ascending index: (1,0) has id 1, (0,1) has id 2.
  const std::vector<StateId> want{grid_state(g, 1, 0), grid_state(g, 0, 1)};
  EXPECT_EQ(dag.parents(grid_state(g, 1, 1)), want);
}

TEST(Parents, BottomEdgeHasOneParent) {
  const auto g = grid(2);
  const auto dag = build_grid(g);
  EXPECT_EQ(dag.parents(grid_state(g, 1, 0)), std::vector<StateId>{0});
}

TEST(Parents, SinkCollectsEveryGridState) {
  for (int n = 2; n <= 6; ++n) {
    const auto g = grid(n);
    const auto dag = build_grid(g);
    EXPECT_EQ(dag.parents(dag.sink()).size(), g.num_grid_states());
    EXPECT_EQ(dag.terminal_states().size(), g.num_grid_states());
  }
}

TEST(Parents, RejectsSource) {
  const auto dag = build_grid(grid(3));
  EXPECT_THROW(dag.parents(dag.source()), std::invalid_argument);
}

TEST(Adjacency, ParentsAndChildrenAgree) {
  for (int n = 2; n <= 6; ++n) {
    const auto dag = build_grid(grid(n));
    for (StateId s = 0; s < dag.num_states(); ++s) {
      if (s != dag.sink()) {
        for (StateId c : dag.children(s)) {
          const auto& par = dag.parents(c);
          EXPECT_NE(std::find(par.begin(), par.end(), s), par.end());
        }
      }
      if (s != dag.source()) {
        for (StateId p : dag.parents(s)) {
          const auto& ch = dag.children(p);
          EXPECT_NE(std::find(ch.begin(), ch.end(), s), ch.end());
        }
      }
    }
  }
}

TEST(Enumerate, TwoByTwoHasFivePaths) {
  EXPECT_EQ(enumerate_trajectories(build_grid(grid(2))).size(), 5u);
}

TEST(Enumerate, SingleEdge) {
  const PointedDag dag(2, {{0, 1}});
  const auto all = enumerate_trajectories(dag);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].states, (std::vector<StateId>{0, 1}));
  EXPECT_EQ(all[0].length(), 0u);
}

TEST(Enumerate, CountMatchesPathCountRecurrence) {
  for (int n = 2; n <= 5; ++n) {
    const auto dag = build_grid(grid(n));
    EXPECT_EQ(enumerate_trajectories(dag).size(), oracle::total_trajectories(n)) << "n=" << n;
  }
}

TEST(Enumerate, EveryPathExactlyOnceAndValid) {
  const auto g = grid(4);
  const auto dag = build_grid(g);
  const auto all = enumerate_trajectories(dag);
  std::set<std::vector<StateId>> seen;
  for (const auto& t : all) {
    EXPECT_NO_THROW(validate_trajectory(dag, t));
    EXPECT_TRUE(seen.insert(t.states).second);
  }
  std::set<std::vector<StateId>> expected;
  for (const auto& path : oracle::grid_paths(4)) {
    std::vector<StateId> ids;
    for (const auto& c : path) ids.push_back(grid_state(g, c.a, c.b));
    ids.push_back(g.sink());
    expected.insert(ids);
  }
  EXPECT_EQ(seen, expected);
}

TEST(Enumerate, CapIsEnforced) {
  EXPECT_THROW(enumerate_trajectories(build_grid(grid(2)), 4), EnumerationCapExceeded);
  EXPECT_NO_THROW(enumerate_trajectories(build_grid(grid(2)), 5));
}

TEST(Topological, TwoByTwoOrder) {
  const auto g = grid(2);
  const auto dag = build_grid(g);
  const auto& order = dag.topological_order();
  auto pos = [&](StateId s) { return std::find(order.begin(), order.end(), s) - order.begin(); };
  EXPECT_LT(pos(0), pos(grid_state(g, 1, 0)));
  EXPECT_LT(pos(0), pos(grid_state(g, 0, 1)));
  EXPECT_LT(pos(grid_state(g, 1, 1)), pos(g.sink()));
}

TEST(Topological, Chain) {
  const PointedDag dag(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(dag.topological_order(), (std::vector<StateId>{0, 1, 2}));
}

TEST(Topological, ConsistentWithEveryEdge) {
  for (int n = 2; n <= 7; ++n) {
    const auto dag = build_grid(grid(n));
    const auto& order = dag.topological_order();
    ASSERT_EQ(order.size(), dag.num_states());
    std::vector<std::size_t> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    EXPECT_EQ(std::set<StateId>(order.begin(), order.end()).size(), order.size());
    EXPECT_EQ(order.front(), dag.source());
    EXPECT_EQ(order.back(), dag.sink());
    for (StateId s = 0; s < dag.num_states(); ++s) {
      if (s == dag.sink()) continue;
      for (StateId c : dag.children(s)) EXPECT_LT(pos[s], pos[c]);
    }
  }
}

TEST(Topological, CycleReportsBackEdge) {
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 1}, {2, 3}};
  try {
    topological_sort(4, edges);
    FAIL() << "cycle not detected";
  } catch (const CycleError& e) {
    const Edge back = e.back_edge();
    EXPECT_TRUE(back == Edge(2, 1) || back == Edge(1, 2));
  }
  EXPECT_THROW(PointedDag(4, edges), CycleError);
}

TEST(PointedDagValidation, RejectsMalformedGraphs) {
  EXPECT_THROW(PointedDag(3, {{0, 2}, {1, 2}}), std::invalid_argument);          // two sources
  EXPECT_THROW(PointedDag(3, {{0, 1}, {0, 2}}), std::invalid_argument);          // two sinks
  EXPECT_THROW(PointedDag(2, {{0, 1}, {0, 1}}), std::invalid_argument);          // duplicate edge
  EXPECT_THROW(PointedDag(2, {{0, 5}}), std::invalid_argument);                  // unknown state
  EXPECT_THROW(PointedDag(3, {{0, 2}, {1, 1}}), std::invalid_argument);          // self loop
}

TEST(TrajectoryValidation, RejectsBrokenPaths) {
  const auto g = grid(3);
  const auto dag = build_grid(g);
  EXPECT_NO_THROW(validate_trajectory(dag, Trajectory{{0, g.sink()}}));
  EXPECT_THROW(validate_trajectory(dag, Trajectory{{1, g.sink()}}), std::invalid_argument);
  EXPECT_THROW(validate_trajectory(dag, Trajectory{{0, 4, g.sink()}}), std::invalid_argument);
  EXPECT_THROW(validate_trajectory(dag, Trajectory{{0, 1}}), std::invalid_argument);
}

}  // namespace
}  // namespace gflowlab
