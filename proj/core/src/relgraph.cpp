#include "relmarl/relgraph.hpp"

#include <algorithm>
#include <sstream>

#include "text_util.hpp"

namespace relmarl {
namespace {

std::string describe(const Edge& e) {
  std::ostringstream os;
  os << e.src << "->" << e.dst << ":" << format_double(e.weight);
  return os.str();
}

}  // namespace

RelationalNetwork::RelationalNetwork(std::size_t agent_count, std::vector<Edge> edges)
    : agent_count_(agent_count), edges_(std::move(edges)) {
  if (agent_count_ == 0) throw GraphError("relational network needs at least one agent");
  for (const Edge& e : edges_) {
    if (e.src >= agent_count_ || e.dst >= agent_count_) {
      throw GraphError("edge " + describe(e) + ": agent index out of range for " +
                       std::to_string(agent_count_) + " agents");
    }
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) {
      throw GraphError("edge " + describe(e) + ": weight outside [0, 1]");
    }
  }
  std::stable_sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  const auto dup = std::adjacent_find(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.src == b.src && a.dst == b.dst;
  });
  if (dup != edges_.end()) {
    throw GraphError("edge " + describe(*std::next(dup)) + ": duplicate ordered pair");
  }
}

RelationalNetwork RelationalNetwork::self_interest(std::size_t agent_count) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < agent_count; ++i) edges.push_back({i, i, 1.0});
  return RelationalNetwork(agent_count, std::move(edges));
}

double RelationalNetwork::team_reward(std::span<const double> rewards) const {
  if (rewards.size() != agent_count_) {
    throw GraphError("team_reward: got " + std::to_string(rewards.size()) + " rewards for " +
                     std::to_string(agent_count_) + " agents");
  }
  double total = 0.0;
  for (const Edge& e : edges_) total += e.weight * rewards[e.dst];
  return total;
}

bool RelationalNetwork::is_self_interest() const {
  if (edges_.size() != agent_count_) return false;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.src != i || e.dst != i || e.weight != 1.0) return false;
  }
  return true;
}

std::string RelationalNetwork::to_string() const {
  std::string out = "agents=" + std::to_string(agent_count_) + ";";
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    out += (i == 0 ? " " : ", ") + describe(edges_[i]);
  }
  return out;
}

RelationalNetwork parse_network(std::string_view text) {
  const auto semi = text.find(';');
  const std::string_view head = trim(text.substr(0, semi));
  const std::string_view body = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);

  constexpr std::string_view kAgents = "agents";
  if (!head.starts_with(kAgents)) throw GraphError("network text must start with 'agents=N'");
  std::string_view count_text = trim(head.substr(kAgents.size()));
  if (!count_text.starts_with('=')) throw GraphError("network text must start with 'agents=N'");
  const auto agents = to_size(trim(count_text.substr(1)));
  if (!agents) throw GraphError("agent count '" + std::string(trim(count_text.substr(1))) + "' is not an integer");

  std::vector<Edge> edges;
  for (std::string_view item : split(body, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t arrow = item.find("->");
    std::size_t arrow_len = 2;
    if (arrow == std::string_view::npos) {
      arrow = item.find("→");
      arrow_len = std::string_view("→").size();
    }
    const auto colon = item.rfind(':');
    if (arrow == std::string_view::npos || colon == std::string_view::npos || colon < arrow) {
      throw GraphError("malformed edge '" + std::string(item) + "', expected src->dst:weight");
    }
    const auto src = to_size(trim(item.substr(0, arrow)));
    const auto dst = to_size(trim(item.substr(arrow + arrow_len, colon - arrow - arrow_len)));
    const auto weight = to_double(trim(item.substr(colon + 1)));
    if (!src || !dst || !weight) {
      throw GraphError("malformed edge '" + std::string(item) + "', expected src->dst:weight");
    }
    edges.push_back({*src, *dst, *weight});
  }
  return RelationalNetwork(*agents, std::move(edges));
}

double team_reward(const RelationalNetwork& net, std::span<const double> rewards) {
  return net.team_reward(rewards);
}

bool is_self_interest(const RelationalNetwork& net) { return net.is_self_interest(); }

}  // namespace relmarl
