#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dqlids/dataset.hpp"
#include "dqlids/matrix.hpp"
#include "dqlids/network.hpp"

namespace dqlids {

struct HyperParams {
    std::size_t num_episodes = 200;
    std::size_t num_iterations = 100;
    std::size_t batch_size = 500;
    double epsilon_initial = 0.9;
    double epsilon_decay = 0.99;
    double epsilon_floor = 0.01;
    double gamma = 0.001;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
    double reward_correct = 1.0;
    double reward_incorrect = -1.0;
    OptimizerKind optimizer = OptimizerKind::Adam;

    void validate() const; // throws Error on out-of-range values
};

struct TrainingHistory {
    std::vector<double> losses;   // one per iteration, across all episodes
    std::vector<double> epsilons; // epsilon used at each iteration
    std::vector<double> episode_rewards;
    std::vector<double> episode_seconds;
};

// Per record: with probability epsilon a uniform action, otherwise the
// argmax over that record's Q-values (ties -> lowest action index).
std::vector<int> select_actions(const Matrix& q_values, double epsilon, std::mt19937_64& rng);

// reward_correct where action == label code, reward_incorrect elsewhere.
std::vector<double> compute_rewards(const std::vector<int>& actions,
                                    const std::vector<ClassLabel>& labels,
                                    double reward_correct = 1.0,
                                    double reward_incorrect = -1.0);

// target_i = reward_i + gamma * max_a next_q[i][a]
std::vector<double> compute_targets(const std::vector<double>& rewards, const Matrix& next_q,
                                    double gamma);

// One multiplicative step of the exploration schedule.
double decay_epsilon(double epsilon, const HyperParams& hp);

// Epsilon used at global iteration k: max(eps0 * decay^k, floor). The
// trainer logs this closed form so the trace is reproducible exactly.
double epsilon_at(std::size_t iteration, const HyperParams& hp);

struct TrainResult {
    QNetwork net;
    OptimizerState opt;
    std::string rng_state; // exploration RNG after the last iteration
    TrainingHistory history;
};

// Invoked after each episode with the evolving result (parameters persist
// across episodes). Lets callers keep a last-good checkpoint on disk.
using EpisodeCallback = std::function<void(const TrainResult&)>;

// The batch-as-state training loop: every episode restarts from the first
// batch_size-record window and steps through num_iterations windows, training
// the network against reward + gamma * max next-window Q. The window cursor
// wraps to the start at the dataset end; a final partial window is used at
// its true size.
TrainResult train(const EncodedDataset& dataset, const HyperParams& hp,
                  const EpisodeCallback& on_episode_end = {});

// Greedy argmax actions for every record (epsilon = 0).
std::vector<int> predict(const QNetwork& net, const EncodedDataset& dataset);

} // namespace dqlids
