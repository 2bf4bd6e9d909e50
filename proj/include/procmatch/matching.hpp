#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace procmatch {

struct Matching {
    std::size_t size = 0;
    /// For each left vertex, the matched right vertex.
    std::vector<std::optional<std::size_t>> left_to_right;
};

/// Maximum-cardinality matching of a bipartite graph with `left` and `right`
/// vertices, found by repeated augmenting-path search (Kuhn). The graph is
/// given by a predicate, which is evaluated once per vertex pair.
Matching maximum_matching(std::size_t left, std::size_t right,
                          const std::function<bool(std::size_t, std::size_t)>& edge);

} // namespace procmatch
