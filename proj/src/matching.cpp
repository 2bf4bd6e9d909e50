#include "procmatch/matching.hpp"

namespace procmatch {

namespace {

struct Augmenter {
    const std::vector<std::vector<std::size_t>>& adjacency;
    std::vector<std::optional<std::size_t>>& right_to_left;
    std::vector<char> visited;

    bool augment(std::size_t u) {
        for (std::size_t v : adjacency[u]) {
            if (visited[v]) continue;
            visited[v] = 1;
            if (!right_to_left[v] || augment(*right_to_left[v])) {
                right_to_left[v] = u;
                return true;
            }
        }
        return false;
    }
};

} // namespace

Matching maximum_matching(std::size_t left, std::size_t right,
                          const std::function<bool(std::size_t, std::size_t)>& edge) {
    std::vector<std::vector<std::size_t>> adjacency(left);
    for (std::size_t u = 0; u < left; ++u)
        for (std::size_t v = 0; v < right; ++v)
            if (edge(u, v)) adjacency[u].push_back(v);

    std::vector<std::optional<std::size_t>> right_to_left(right);
    Matching out;
    for (std::size_t u = 0; u < left; ++u) {
        Augmenter a{adjacency, right_to_left, std::vector<char>(right, 0)};
        if (a.augment(u)) ++out.size;
    }
    out.left_to_right.assign(left, std::nullopt);
    for (std::size_t v = 0; v < right; ++v)
        if (right_to_left[v]) out.left_to_right[*right_to_left[v]] = v;
    return out;
}

} // namespace procmatch
