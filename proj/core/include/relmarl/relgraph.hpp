#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relmarl {

/// Malformed relational network (bad index, weight, or duplicate edge).
class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Directed edge src -> dst: agent `src` credits agent `dst`'s reward at `weight`.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Directed weighted graph over agent indices.
///
/// Self-loops are ordinary edges: an agent without one contributes nothing
/// of its own reward to the team reward. Weights live in [0, 1] and each
/// ordered (src, dst) pair appears at most once. Edges are kept sorted by
/// (src, dst) so iteration order, and therefore floating-point summation
/// order, is canonical. Immutable after construction.
class RelationalNetwork {
 public:
  RelationalNetwork(std::size_t agent_count, std::vector<Edge> edges);

  /// One weight-1 self-loop per agent and nothing else.
  static RelationalNetwork self_interest(std::size_t agent_count);

  std::size_t agent_count() const { return agent_count_; }
  std::span<const Edge> edges() const { return edges_; }

  /// Sum over edges of weight * reward[dst].
  double team_reward(std::span<const double> rewards) const;

  bool is_self_interest() const;

  /// Compact one-line form accepted by parse_network, e.g.
  /// "agents=2; 0->0:1, 0->1:0.5, 1->1:1".
  std::string to_string() const;

  friend bool operator==(const RelationalNetwork&, const RelationalNetwork&) = default;

 private:
  std::size_t agent_count_;
  std::vector<Edge> edges_;
};

/// Parses "agents=N; s->d:w, s->d:w, ...". The arrow may be written "->"
/// or as the Unicode right arrow. Errors name the offending triple.
RelationalNetwork parse_network(std::string_view text);

double team_reward(const RelationalNetwork& net, std::span<const double> rewards);
bool is_self_interest(const RelationalNetwork& net);

}  // namespace relmarl
