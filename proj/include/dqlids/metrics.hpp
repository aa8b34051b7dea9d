#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dqlids/dataset.hpp"

namespace dqlids {

// counts[predicted][true]
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

    std::int64_t total() const;
    std::int64_t support(std::size_t true_class) const; // column sum
};

ConfusionMatrix build_confusion(const std::vector<int>& predictions,
                                const std::vector<ClassLabel>& labels);

struct ClassMetrics {
    std::int64_t support = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    // false when the denominator was zero and the metric was reported as 0
    bool precision_defined = true;
    bool recall_defined = true;
};

struct MetricsReport {
    std::array<ClassMetrics, kNumClasses> per_class{};
    // unweighted means over classes with nonzero support
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double macro_accuracy = 0.0;
    double overall_accuracy = 0.0; // trace / total
    std::int64_t total = 0;
};

// One-vs-rest metrics per class plus macro averages. Throws on an empty
// matrix.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

// JSON document with per-class, macro, and overall values.
std::string metrics_to_json(const MetricsReport& report);

// CSV with a header row/column naming the classes.
void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out);

// Plain-text table for terminal output.
void print_metrics(const MetricsReport& report, std::ostream& out);

} // namespace dqlids
