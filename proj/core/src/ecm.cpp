#include "psim/ecm.hpp"

#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace psim {

void AgentConfig::validate(int values_per_variable) const {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("AgentConfig: gamma must be in [0, 1)");
  }
  if (!(reward_magnitude > 0.0)) {
    throw std::invalid_argument("AgentConfig: reward_magnitude must be positive");
  }
  const double chance = 1.0 / values_per_variable;
  if (!(boredom_threshold > chance && boredom_threshold <= 1.0)) {
    throw std::invalid_argument("AgentConfig: boredom_threshold must be in (1/" +
                                std::to_string(values_per_variable) + ", 1]");
  }
  if (max_redraws < 1) throw std::invalid_argument("AgentConfig: max_redraws must be >= 1");
}

ClipNetwork ClipNetwork::two_layer(int num_percepts, int num_experiments,
                                   int values_per_variable) {
  if (num_percepts < 1 || num_experiments < 1 || values_per_variable < 1) {
    throw std::invalid_argument("ClipNetwork: all layer sizes must be >= 1");
  }
  ClipNetwork net;
  net.arch_ = Architecture::two_layer;
  net.num_experiments_ = num_experiments;
  net.values_per_variable_ = values_per_variable;
  net.h1_ = Matrix(num_percepts, num_experiments * values_per_variable, 1.0);
  return net;
}

ClipNetwork ClipNetwork::three_layer(int num_percepts, int num_intermediate, int num_experiments,
                                     int values_per_variable) {
  if (num_percepts < 1 || num_intermediate < 1 || num_experiments < 1 ||
      values_per_variable < 1) {
    throw std::invalid_argument("ClipNetwork: all layer sizes must be >= 1");
  }
  if (num_intermediate > num_percepts) {
    throw std::invalid_argument(
        "ClipNetwork: more intermediate clips than percepts (labels would go unused)");
  }
  ClipNetwork net;
  net.arch_ = Architecture::three_layer;
  net.num_experiments_ = num_experiments;
  net.values_per_variable_ = values_per_variable;
  net.h1_ = Matrix(num_percepts, num_intermediate, 1.0);
  net.h2_ = Matrix(num_intermediate, num_experiments * values_per_variable, 1.0);
  return net;
}

std::vector<double> hop_probabilities(std::span<const double> h_row) {
  double total = 0.0;
  for (double h : h_row) {
    if (!(h > 0.0)) throw std::invalid_argument("hop_probabilities: h-values must be positive");
    total += h;
  }
  std::vector<double> probs(h_row.size());
  for (std::size_t j = 0; j < h_row.size(); ++j) probs[j] = h_row[j] / total;
  return probs;
}

namespace {

void compute_marginal(const ClipNetwork& net, SetupId s, DeliberationScratch& scratch) {
  const int num_actions = net.num_actions();
  scratch.marginal.assign(num_actions, 0.0);
  if (net.architecture() == Architecture::two_layer) {
    const auto row = net.h1().row(s);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    for (int p = 0; p < num_actions; ++p) scratch.marginal[p] = row[p] / total;
    return;
  }
  const auto percept_row = net.h1().row(s);
  const int num_mid = net.num_intermediate();
  const double total1 = std::accumulate(percept_row.begin(), percept_row.end(), 0.0);
  scratch.percept_probs.resize(num_mid);
  for (int i = 0; i < num_mid; ++i) scratch.percept_probs[i] = percept_row[i] / total1;
  for (int i = 0; i < num_mid; ++i) {
    const auto mid_row = net.h2().row(i);
    const double total2 = std::accumulate(mid_row.begin(), mid_row.end(), 0.0);
    const double scale = scratch.percept_probs[i] / total2;
    for (int p = 0; p < num_actions; ++p) scratch.marginal[p] += scale * mid_row[p];
  }
}

/// Boring flags per experiment from a full action marginal.
void flag_boring(const ClipNetwork& net, const AgentConfig& cfg, const std::vector<double>& marginal,
                 std::vector<char>& boring) {
  const int values = net.values_per_variable();
  boring.assign(net.num_experiments(), 0);
  for (int e = 0; e < net.num_experiments(); ++e) {
    double mass = 0.0;
    double top = 0.0;
    for (int o = 0; o < values; ++o) {
      const double m = marginal[e * values + o];
      mass += m;
      if (m > top) top = m;
    }
    boring[e] = (mass > 0.0 && top / mass > cfg.boredom_threshold) ? 1 : 0;
  }
}

DeliberationPath sample_walk(const ClipNetwork& net, SetupId s, Rng& rng) {
  DeliberationPath path;
  path.percept = s;
  if (net.architecture() == Architecture::two_layer) {
    const auto row = net.h1().row(s);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    const int flat = rng.categorical(row, total);
    path.action = PredictionId::from_flat(flat, net.values_per_variable());
    return path;
  }
  const auto percept_row = net.h1().row(s);
  const double total1 = std::accumulate(percept_row.begin(), percept_row.end(), 0.0);
  path.intermediate = rng.categorical(percept_row, total1);
  const auto mid_row = net.h2().row(path.intermediate);
  const double total2 = std::accumulate(mid_row.begin(), mid_row.end(), 0.0);
  const int flat = rng.categorical(mid_row, total2);
  path.action = PredictionId::from_flat(flat, net.values_per_variable());
  return path;
}

}  // namespace

std::vector<double> action_marginal(const ClipNetwork& net, SetupId s) {
  if (s < 0 || s >= net.num_percepts()) {
    throw std::out_of_range("action_marginal: setup " + std::to_string(s) + " out of range");
  }
  DeliberationScratch scratch;
  compute_marginal(net, s, scratch);
  return std::move(scratch.marginal);
}

bool is_boring(const ClipNetwork& net, const AgentConfig& cfg, SetupId s, int experiment) {
  if (experiment < 0 || experiment >= net.num_experiments()) {
    throw std::out_of_range("is_boring: experiment " + std::to_string(experiment) +
                            " out of range");
  }
  const std::vector<double> marginal = action_marginal(net, s);
  const int values = net.values_per_variable();
  double mass = 0.0;
  double top = 0.0;
  for (int o = 0; o < values; ++o) {
    const double m = marginal[experiment * values + o];
    mass += m;
    if (m > top) top = m;
  }
  return mass > 0.0 && top / mass > cfg.boredom_threshold;
}

DeliberationPath deliberate(const ClipNetwork& net, const AgentConfig& cfg, SetupId s, Rng& rng,
                            DeliberationScratch& scratch) {
  if (s < 0 || s >= net.num_percepts()) {
    throw std::out_of_range("deliberate: setup " + std::to_string(s) + " out of range");
  }
  compute_marginal(net, s, scratch);
  flag_boring(net, cfg, scratch.marginal, scratch.boring);

  bool any_interesting = false;
  for (char b : scratch.boring) {
    if (!b) {
      any_interesting = true;
      break;
    }
  }

  DeliberationPath path = sample_walk(net, s, rng);
  if (!any_interesting) return path;  // nothing non-boring is reachable
  for (int redraw = 0; redraw < cfg.max_redraws && scratch.boring[path.action.experiment];
       ++redraw) {
    path = sample_walk(net, s, rng);
  }
  return path;
}

DeliberationPath deliberate(const ClipNetwork& net, const AgentConfig& cfg, SetupId s, Rng& rng) {
  DeliberationScratch scratch;
  return deliberate(net, cfg, s, rng, scratch);
}

void update(ClipNetwork& net, const AgentConfig& cfg, const DeliberationPath& path, int reward) {
  assert(path.percept >= 0 && path.percept < net.num_percepts());
  assert(path.action.experiment >= 0 && path.action.experiment < net.num_experiments());
  assert(path.action.outcome >= 0 && path.action.outcome < net.values_per_variable());

  const double keep = 1.0 - cfg.gamma;
  for (double& h : net.h1().flat()) h = 1.0 + keep * (h - 1.0);
  for (double& h : net.h2().flat()) h = 1.0 + keep * (h - 1.0);

  const double bonus = cfg.reward_magnitude * reward;
  if (bonus != 0.0) {
    const int flat = path.action.flat(net.values_per_variable());
    if (net.architecture() == Architecture::three_layer) {
      assert(path.intermediate >= 0 && path.intermediate < net.num_intermediate());
      net.h1()(path.percept, path.intermediate) += bonus;
      net.h2()(path.intermediate, flat) += bonus;
    } else {
      assert(path.intermediate == -1);
      net.h1()(path.percept, flat) += bonus;
    }
  }
}

}  // namespace psim
