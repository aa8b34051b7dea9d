#include "dqlids/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "dqlids/error.hpp"

namespace dqlids {

void HyperParams::validate() const {
    if (num_iterations == 0)
        throw Error("hyperparams: num_iterations must be positive");
    if (batch_size == 0)
        throw Error("hyperparams: batch_size must be positive");
    if (epsilon_initial < 0.0 || epsilon_initial > 1.0)
        throw Error("hyperparams: epsilon_initial must be in [0,1]");
    if (epsilon_decay <= 0.0 || epsilon_decay > 1.0)
        throw Error("hyperparams: epsilon_decay must be in (0,1]");
    if (epsilon_floor < 0.0 || epsilon_floor > 1.0)
        throw Error("hyperparams: epsilon_floor must be in [0,1]");
    if (epsilon_floor > epsilon_initial)
        throw Error("hyperparams: epsilon_floor must not exceed epsilon_initial");
    if (gamma < 0.0 || gamma >= 1.0)
        throw Error("hyperparams: gamma must be in [0,1)");
    if (!(learning_rate > 0.0))
        throw Error("hyperparams: learning_rate must be positive");
}

std::vector<int> select_actions(const Matrix& q_values, double epsilon, std::mt19937_64& rng) {
    std::vector<int> actions(q_values.rows);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> random_action(0, static_cast<int>(q_values.cols) - 1);
    for (std::size_t i = 0; i < q_values.rows; ++i) {
        if (coin(rng) < epsilon) {
            actions[i] = random_action(rng);
        } else {
            const double* row = q_values.row(i);
            int best = 0;
            for (std::size_t a = 1; a < q_values.cols; ++a)
                if (row[a] > row[best])
                    best = static_cast<int>(a);
            actions[i] = best;
        }
    }
    return actions;
}

std::vector<double> compute_rewards(const std::vector<int>& actions,
                                    const std::vector<ClassLabel>& labels,
                                    double reward_correct, double reward_incorrect) {
    if (actions.size() != labels.size())
        throw Error("compute_rewards: " + std::to_string(actions.size()) + " actions vs " +
                    std::to_string(labels.size()) + " labels");
    std::vector<double> rewards(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i)
        rewards[i] = actions[i] == static_cast<int>(labels[i]) ? reward_correct : reward_incorrect;
    return rewards;
}

std::vector<double> compute_targets(const std::vector<double>& rewards, const Matrix& next_q,
                                    double gamma) {
    if (rewards.size() != next_q.rows)
        throw Error("compute_targets: " + std::to_string(rewards.size()) + " rewards vs " +
                    std::to_string(next_q.rows) + " next-state rows");
    std::vector<double> targets(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        const double* row = next_q.row(i);
        double best = row[0];
        for (std::size_t a = 1; a < next_q.cols; ++a)
            best = std::max(best, row[a]);
        targets[i] = rewards[i] + gamma * best;
    }
    return targets;
}

double decay_epsilon(double epsilon, const HyperParams& hp) {
    return std::max(epsilon * hp.epsilon_decay, hp.epsilon_floor);
}

double epsilon_at(std::size_t iteration, const HyperParams& hp) {
    return std::max(hp.epsilon_initial * std::pow(hp.epsilon_decay, static_cast<double>(iteration)),
                    hp.epsilon_floor);
}

namespace {

// copy of rows [start, start+count) (no wrap)
Matrix slice_rows(const Matrix& m, std::size_t start, std::size_t count) {
    Matrix out(count, m.cols);
    std::copy(m.row(start), m.row(start) + count * m.cols, out.data.begin());
    return out;
}

// copy of `count` rows starting at `start`, wrapping past the end
Matrix slice_rows_wrapped(const Matrix& m, std::size_t start, std::size_t count) {
    Matrix out(count, m.cols);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t r = (start + i) % m.rows;
        std::copy(m.row(r), m.row(r) + m.cols, out.row(i));
    }
    return out;
}

std::string serialize_rng(const std::mt19937_64& rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

} // namespace

TrainResult train(const EncodedDataset& dataset, const HyperParams& hp,
                  const EpisodeCallback& on_episode_end) {
    hp.validate();
    const std::size_t n = dataset.size();
    if (n == 0)
        throw Error("train: empty dataset");
    if (hp.batch_size > n)
        throw Error("train: batch_size " + std::to_string(hp.batch_size) +
                    " exceeds dataset size " + std::to_string(n));

    TrainResult result;
    result.net = init_network(default_layer_spec(dataset.width()), hp.seed);
    result.opt = OptimizerState::create(result.net, hp.optimizer);
    std::mt19937_64 rng(hp.seed + 1);
    result.rng_state = serialize_rng(rng);

    std::size_t global_iter = 0;
    for (std::size_t episode = 0; episode < hp.num_episodes; ++episode) {
        const auto episode_start = std::chrono::steady_clock::now();
        std::size_t cursor = 0;
        double episode_reward = 0.0;

        for (std::size_t iter = 0; iter < hp.num_iterations; ++iter) {
            const std::size_t batch_rows = std::min(hp.batch_size, n - cursor);
            const std::size_t next_cursor = cursor + hp.batch_size >= n ? 0 : cursor + hp.batch_size;

            Matrix batch = slice_rows(dataset.matrix, cursor, batch_rows);
            Matrix q = forward(result.net, batch);

            const double epsilon = epsilon_at(global_iter, hp);
            std::vector<int> actions = select_actions(q, epsilon, rng);

            std::vector<ClassLabel> batch_labels(dataset.labels.begin() + static_cast<std::ptrdiff_t>(cursor),
                                                 dataset.labels.begin() + static_cast<std::ptrdiff_t>(cursor + batch_rows));
            std::vector<double> rewards =
                compute_rewards(actions, batch_labels, hp.reward_correct, hp.reward_incorrect);

            // the following window is the next state; read it at the current
            // batch's row count so targets stay record-aligned
            Matrix next_batch = slice_rows_wrapped(dataset.matrix, next_cursor, batch_rows);
            Matrix next_q = forward(result.net, next_batch);
            std::vector<double> targets = compute_targets(rewards, next_q, hp.gamma);

            std::vector<ActionTarget> action_targets(batch_rows);
            for (std::size_t i = 0; i < batch_rows; ++i)
                action_targets[i] = {actions[i], targets[i]};

            BackwardResult back = backward(result.net, batch, action_targets);
            if (!std::isfinite(back.loss))
                throw DivergenceError("training diverged: non-finite loss at episode " +
                                      std::to_string(episode) + ", iteration " +
                                      std::to_string(iter));
            apply_update(result.net, back.grads, result.opt, hp.learning_rate);

            result.history.losses.push_back(back.loss);
            result.history.epsilons.push_back(epsilon);
            for (double r : rewards)
                episode_reward += r;

            cursor = next_cursor;
            ++global_iter;
        }

        const std::chrono::duration<double> elapsed =
            std::chrono::steady_clock::now() - episode_start;
        result.history.episode_rewards.push_back(episode_reward);
        result.history.episode_seconds.push_back(elapsed.count());
        result.rng_state = serialize_rng(rng);
        if (on_episode_end)
            on_episode_end(result);
    }
    return result;
}

std::vector<int> predict(const QNetwork& net, const EncodedDataset& dataset) {
    if (dataset.width() != net.input_width())
        throw Error("predict: dataset width " + std::to_string(dataset.width()) +
                    " does not match network input width " + std::to_string(net.input_width()));
    constexpr std::size_t kChunk = 4096;
    std::vector<int> actions;
    actions.reserve(dataset.size());
    for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
        const std::size_t count = std::min(kChunk, dataset.size() - start);
        Matrix chunk = slice_rows(dataset.matrix, start, count);
        Matrix q = forward(net, chunk);
        for (std::size_t i = 0; i < q.rows; ++i) {
            const double* row = q.row(i);
            int best = 0;
            for (std::size_t a = 1; a < q.cols; ++a)
                if (row[a] > row[best])
                    best = static_cast<int>(a);
            actions.push_back(best);
        }
    }
    return actions;
}

} // namespace dqlids
