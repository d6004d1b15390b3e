#pragma once

#include "geocrowd/domain.hpp"
#include "geocrowd/entropy.hpp"
#include "geocrowd/flow.hpp"

namespace geocrowd {

namespace detail {

inline AssignmentInstanceSet to_assignment(int slot, FlowResult&& r) {
  AssignmentInstanceSet out;
  out.slot = slot;
  out.pairs = std::move(r.pairs);
  return out;
}

}  // namespace detail

// Maximum number of assigned answers for the slot.
inline AssignmentInstanceSet g_greedy(const SlotSnapshot& snap) {
  FlowNetwork net = build_network(snap);
  return detail::to_assignment(snap.slot, max_flow(net));
}

// Maximum assignment preferring tasks in cells with low location entropy.
inline AssignmentInstanceSet g_llep(const SlotSnapshot& snap,
                                    const VisitHistory& history) {
  FlowNetwork net = build_network(snap, [&](const Worker&, const Task& t) {
    return location_entropy(history, history.cell_of(t.location));
  });
  return detail::to_assignment(snap.slot, min_cost_max_flow(net));
}

// Maximum assignment with the least total worker-to-task distance.
inline AssignmentInstanceSet g_nnp(const SlotSnapshot& snap) {
  FlowNetwork net = build_network(snap, [](const Worker& w, const Task& t) {
    return distance(w.location, t.location);
  });
  return detail::to_assignment(snap.slot, min_cost_max_flow(net));
}

}  // namespace geocrowd
