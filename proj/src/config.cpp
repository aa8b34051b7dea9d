#include "dqlids/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dqlids/error.hpp"

namespace dqlids {

const char* encoding_name(EncodingMode mode) {
    return mode == EncodingMode::Ordinal ? "ordinal" : "one-hot";
}

EncodingMode encoding_from_name(const std::string& name) {
    if (name == "ordinal")
        return EncodingMode::Ordinal;
    if (name == "one-hot" || name == "onehot")
        return EncodingMode::OneHot;
    throw Error("unknown encoding mode '" + name + "' (expected ordinal or one-hot)");
}

const char* optimizer_name(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "adam")
        return OptimizerKind::Adam;
    if (name == "sgd")
        return OptimizerKind::Sgd;
    throw Error("unknown optimizer '" + name + "' (expected adam or sgd)");
}

const char* policy_name(UnknownCategoryPolicy policy) {
    return policy == UnknownCategoryPolicy::Strict ? "strict" : "lenient";
}

UnknownCategoryPolicy policy_from_name(const std::string& name) {
    if (name == "strict")
        return UnknownCategoryPolicy::Strict;
    if (name == "lenient")
        return UnknownCategoryPolicy::Lenient;
    throw Error("unknown category policy '" + name + "' (expected strict or lenient)");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_num(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size())
            throw Error("");
        return v;
    } catch (...) {
        throw Error("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw Error("config key '" + key + "': expected a nonnegative integer, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw Error("config key '" + key + "': expected true/false, got '" + value + "'");
}

} // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        if (key == "train_file")
            cfg.train_file = value;
        else if (key == "test_file")
            cfg.test_file = value;
        else if (key == "taxonomy")
            cfg.taxonomy_file = value;
        else if (key == "out")
            cfg.out_dir = value;
        else if (key == "episodes")
            cfg.hp.num_episodes = parse_uint(key, value);
        else if (key == "iterations")
            cfg.hp.num_iterations = parse_uint(key, value);
        else if (key == "batch_size")
            cfg.hp.batch_size = parse_uint(key, value);
        else if (key == "epsilon")
            cfg.hp.epsilon_initial = parse_num(key, value);
        else if (key == "epsilon_decay")
            cfg.hp.epsilon_decay = parse_num(key, value);
        else if (key == "epsilon_floor")
            cfg.hp.epsilon_floor = parse_num(key, value);
        else if (key == "gamma")
            cfg.hp.gamma = parse_num(key, value);
        else if (key == "lr")
            cfg.hp.learning_rate = parse_num(key, value);
        else if (key == "seed")
            cfg.hp.seed = parse_uint(key, value);
        else if (key == "reward_correct")
            cfg.hp.reward_correct = parse_num(key, value);
        else if (key == "reward_incorrect")
            cfg.hp.reward_incorrect = parse_num(key, value);
        else if (key == "optimizer")
            cfg.hp.optimizer = optimizer_from_name(value);
        else if (key == "encoding")
            cfg.encoding = encoding_from_name(value);
        else if (key == "unknown_category")
            cfg.unknown_policy = policy_from_name(value);
        else if (key == "shuffle")
            cfg.shuffle = parse_bool(key, value);
        else
            throw Error(path + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string format_resolved_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "train_file=" << cfg.train_file << '\n'
        << "test_file=" << cfg.test_file << '\n'
        << "taxonomy=" << (cfg.taxonomy_file.empty() ? "<builtin>" : cfg.taxonomy_file) << '\n'
        << "out=" << cfg.out_dir << '\n'
        << "episodes=" << cfg.hp.num_episodes << '\n'
        << "iterations=" << cfg.hp.num_iterations << '\n'
        << "batch_size=" << cfg.hp.batch_size << '\n'
        << "epsilon=" << num(cfg.hp.epsilon_initial) << '\n'
        << "epsilon_decay=" << num(cfg.hp.epsilon_decay) << '\n'
        << "epsilon_floor=" << num(cfg.hp.epsilon_floor) << '\n'
        << "gamma=" << num(cfg.hp.gamma) << '\n'
        << "lr=" << num(cfg.hp.learning_rate) << '\n'
        << "seed=" << cfg.hp.seed << '\n'
        << "reward_correct=" << num(cfg.hp.reward_correct) << '\n'
        << "reward_incorrect=" << num(cfg.hp.reward_incorrect) << '\n'
        << "optimizer=" << optimizer_name(cfg.hp.optimizer) << '\n'
        << "encoding=" << encoding_name(cfg.encoding) << '\n'
        << "unknown_category=" << policy_name(cfg.unknown_policy) << '\n'
        << "shuffle=" << (cfg.shuffle ? "true" : "false") << '\n';
    return out.str();
}

} // namespace dqlids
