// Copyright 2026 The gflow-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "gflowlab/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include <fmt/format.h>

namespace gflowlab {

CycleError::CycleError(Edge back_edge)
    : std::invalid_argument(
          fmt::format("graph has a cycle through back-edge {} -> {}", back_edge.first, back_edge.second)),
      back_edge_(back_edge) {}

EnumerationCapExceeded::EnumerationCapExceeded(std::size_t cap)
    : std::runtime_error(fmt::format("trajectory enumeration exceeded the cap of {}", cap)) {}

namespace {

// Iterative three-colour DFS; only called once Kahn's algorithm has proven a cycle exists.
Edge find_back_edge(std::size_t n, const std::vector<std::vector<StateId>>& adj) {
  enum Colour : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<Colour> colour(n, kWhite);
  for (StateId root = 0; root < n; ++root) {
    if (colour[root] != kWhite) continue;
    std::vector<std::pair<StateId, std::size_t>> stack{{root, 0}};
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next == adj[u].size()) {
        colour[u] = kBlack;
        stack.pop_back();
        continue;
      }
      const StateId v = adj[u][next++];
      if (colour[v] == kGrey) return {u, v};
      if (colour[v] == kWhite) {
        colour[v] = kGrey;
        stack.emplace_back(v, 0);
      }
    }
  }
  throw std::logic_error("find_back_edge called on an acyclic graph");
}

}  // namespace

std::vector<StateId> topological_sort(std::size_t num_states, const std::vector<Edge>& edges) {
  std::vector<std::vector<StateId>> adj(num_states);
  std::vector<std::size_t> indegree(num_states, 0);
  for (const auto& [from, to] : edges) {
    if (from >= num_states || to >= num_states) {
      throw std::invalid_argument(fmt::format("edge {} -> {} references an unknown state", from, to));
    }
    adj[from].push_back(to);
    ++indegree[to];
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  std::priority_queue<StateId, std::vector<StateId>, std::greater<>> ready;
  for (StateId s = 0; s < num_states; ++s) {
    if (indegree[s] == 0) ready.push(s);
  }
  std::vector<StateId> order;
  order.reserve(num_states);
  while (!ready.empty()) {
    const StateId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (StateId v : adj[u]) {
      if (--indegree[v] == 0) ready.push(v);
    }
  }
  if (order.size() != num_states) throw CycleError(find_back_edge(num_states, adj));
  return order;
}

PointedDag::PointedDag(std::size_t num_states, std::vector<Edge> edges) {
  if (num_states < 2) throw std::invalid_argument("a pointed DAG needs at least a source and a sink");
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("duplicate edge in edge list");
  }
  topo_ = topological_sort(num_states, edges);

  children_.assign(num_states, {});
  parents_.assign(num_states, {});
  for (const auto& [from, to] : edges) {
    children_[from].push_back(to);
    parents_[to].push_back(from);
  }
  for (auto& list : parents_) std::sort(list.begin(), list.end());
  num_edges_ = edges.size();

  std::vector<StateId> sources;
  std::vector<StateId> sinks;
  for (StateId s = 0; s < num_states; ++s) {
    if (parents_[s].empty()) sources.push_back(s);
    if (children_[s].empty()) sinks.push_back(s);
  }
  if (sources.size() != 1) {
    throw std::invalid_argument(fmt::format("expected exactly one source, found {}", sources.size()));
  }
  if (sinks.size() != 1) {
    throw std::invalid_argument(fmt::format("expected exactly one sink, found {}", sinks.size()));
  }
  source_ = sources.front();
  sink_ = sinks.front();

  // In a finite DAG a unique in-degree-0 state reaches everything and a unique
  // out-degree-0 state is reached from everything.
}

void PointedDag::check_state(StateId s) const {
  if (!contains(s)) throw std::out_of_range(fmt::format("unknown state id {}", s));
}

const std::vector<StateId>& PointedDag::children(StateId s) const {
  check_state(s);
  if (s == sink_) throw std::invalid_argument("the sink has no children");
  return children_[s];
}

const std::vector<StateId>& PointedDag::parents(StateId s) const {
  check_state(s);
  if (s == source_) throw std::invalid_argument("the source has no parents");
  return parents_[s];
}

bool PointedDag::is_terminal(StateId s) const {
  check_state(s);
  return s != sink_ && std::binary_search(children_[s].begin(), children_[s].end(), sink_);
}

bool PointedDag::has_edge(StateId from, StateId to) const {
  check_state(from);
  check_state(to);
  return std::binary_search(children_[from].begin(), children_[from].end(), to);
}

std::size_t PointedDag::child_index(StateId parent, StateId child) const {
  const auto& list = children(parent);
  const auto it = std::lower_bound(list.begin(), list.end(), child);
  if (it == list.end() || *it != child) {
    throw std::invalid_argument(fmt::format("no edge {} -> {}", parent, child));
  }
  return static_cast<std::size_t>(it - list.begin());
}

std::size_t PointedDag::parent_index(StateId child, StateId parent) const {
  const auto& list = parents(child);
  const auto it = std::lower_bound(list.begin(), list.end(), parent);
  if (it == list.end() || *it != parent) {
    throw std::invalid_argument(fmt::format("no edge {} -> {}", parent, child));
  }
  return static_cast<std::size_t>(it - list.begin());
}

std::vector<Trajectory> enumerate_trajectories(const PointedDag& dag, std::size_t cap) {
  std::vector<Trajectory> out;
  std::vector<StateId> path{dag.source()};
  std::vector<std::size_t> next{0};
  while (!path.empty()) {
    const StateId u = path.back();
    if (u == dag.sink()) {
      if (out.size() == cap) throw EnumerationCapExceeded(cap);
      out.push_back(Trajectory{path});
      path.pop_back();
      next.pop_back();
      continue;
    }
    const auto& kids = dag.children(u);
    if (next.back() == kids.size()) {
      path.pop_back();
      next.pop_back();
      continue;
    }
    path.push_back(kids[next.back()++]);
    next.push_back(0);
  }
  return out;
}

void validate_trajectory(const PointedDag& dag, const Trajectory& t) {
  if (t.states.size() < 2) throw std::invalid_argument("trajectory needs at least source and sink");
  if (t.states.front() != dag.source()) throw std::invalid_argument("trajectory does not start at the source");
  if (t.states.back() != dag.sink()) throw std::invalid_argument("trajectory does not end at the sink");
  for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
    if (!dag.has_edge(t.states[i], t.states[i + 1])) {
      throw std::invalid_argument(
          fmt::format("trajectory step {} -> {} is not an edge", t.states[i], t.states[i + 1]));
    }
  }
}

}  // namespace gflowlab
