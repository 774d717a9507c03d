#include "sad/belief/belief.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "sad/core/error.hpp"

namespace sad::belief {

BeliefDistribution BeliefDistribution::uniform(std::vector<History> support) {
  BeliefDistribution b;
  b.probs.assign(support.size(), 1.0 / static_cast<double>(support.size()));
  b.support = std::move(support);
  return b;
}

double BeliefDistribution::prob(History h) const {
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == h) return probs[i];
  }
  return 0.0;
}

void BeliefDistribution::validate(double tolerance) const {
  if (support.size() != probs.size()) throw InvariantViolation("belief: support/probs size mismatch");
  if (std::set<History>(support.begin(), support.end()).size() != support.size()) {
    throw InvariantViolation("belief: duplicate history in support");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvariantViolation("belief: negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw InvariantViolation("belief: probabilities sum to " + std::to_string(sum));
  }
}

double EpsGreedyPolicy::prob(int action, int view) const {
  const double greedy = greedy_action(view) == action ? 1.0 : 0.0;
  return (1.0 - epsilon) * greedy + epsilon / action_count;
}

namespace {

BeliefDistribution normalized(const BeliefDistribution& prior, std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ImpossibleEvidence("observation has zero probability under the prior");
  BeliefDistribution post;
  post.support = prior.support;
  post.probs = std::move(weights);
  for (double& p : post.probs) p /= total;
  return post;
}

void check_policy(const EpsGreedyPolicy& policy) {
  if (!(policy.epsilon >= 0.0 && policy.epsilon <= 1.0)) {
    throw DomainError("epsilon must lie in [0, 1]");
  }
  if (policy.action_count < 1) throw DomainError("action count must be positive");
}

}  // namespace

BeliefDistribution bayes_update(const BeliefDistribution& prior, const EpsGreedyPolicy& policy,
                                int observed_action, const ObserverView& observer_view) {
  check_policy(policy);
  std::vector<double> w(prior.support.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = policy.prob(observed_action, observer_view(prior.support[i])) * prior.probs[i];
  }
  return normalized(prior, std::move(w));
}

BeliefDistribution sad_update(const BeliefDistribution& prior,
                              const std::function<int(History)>& greedy_map, int observed_greedy) {
  std::vector<double> w(prior.support.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = greedy_map(prior.support[i]) == observed_greedy ? prior.probs[i] : 0.0;
  }
  return normalized(prior, std::move(w));
}

BlurReport blur_report(const BeliefDistribution& prior, const EpsGreedyPolicy& policy,
                       int observed_action, const ObserverView& observer_view) {
  check_policy(policy);
  const double explore = policy.epsilon / policy.action_count;
  const std::size_t n = prior.support.size();
  // consistent_mass = sum over histories whose greedy action matches
  double consistent_mass = 0.0;
  std::vector<bool> consistent(n);
  for (std::size_t i = 0; i < n; ++i) {
    consistent[i] = policy.greedy_action(observer_view(prior.support[i])) == observed_action;
    if (consistent[i]) consistent_mass += prior.probs[i];
  }
  const double denom = explore + (1.0 - policy.epsilon) * consistent_mass;
  if (!(denom > 0.0)) throw ImpossibleEvidence("observation has zero probability under the prior");

  BlurReport report;
  report.leak.resize(n);
  report.filtered.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.leak[i] = explore * prior.probs[i] / denom;
    report.filtered[i] = consistent[i] ? (1.0 - policy.epsilon) * prior.probs[i] / denom : 0.0;
  }
  report.unfiltered_mass = explore / denom;
  report.posterior = bayes_update(prior, policy, observed_action, observer_view);
  return report;
}

double total_variation(const BeliefDistribution& p, const BeliefDistribution& q) {
  std::set<History> all(p.support.begin(), p.support.end());
  all.insert(q.support.begin(), q.support.end());
  double tv = 0.0;
  for (History h : all) tv += std::abs(p.prob(h) - q.prob(h));
  return 0.5 * tv;
}

std::vector<BlurSweepRow> matrix_game_blur_sweep(int steps) {
  if (steps < 1) throw DomainError("sweep needs at least one step");
  const auto prior = BeliefDistribution::uniform({0, 1});
  auto greedy = [](int card) { return card == 0 ? 0 : 2; };
  const auto sharp = sad_update(prior, greedy, 0);
  std::vector<BlurSweepRow> rows;
  for (int i = 0; i <= steps; ++i) {
    const double eps = static_cast<double>(i) / steps;
    EpsGreedyPolicy policy{greedy, eps, 3};
    const auto report = blur_report(prior, policy, 0);
    rows.push_back({eps, report.unfiltered_mass, total_variation(report.posterior, sharp)});
  }
  return rows;
}

}  // namespace sad::belief
