#include "dqlids/metrics.hpp"

#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dqlids/error.hpp"

namespace dqlids {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (const auto& row : counts)
        for (std::int64_t c : row)
            sum += c;
    return sum;
}

std::int64_t ConfusionMatrix::support(std::size_t true_class) const {
    std::int64_t sum = 0;
    for (std::size_t p = 0; p < kNumClasses; ++p)
        sum += counts[p][true_class];
    return sum;
}

ConfusionMatrix build_confusion(const std::vector<int>& predictions,
                                const std::vector<ClassLabel>& labels) {
    if (predictions.size() != labels.size())
        throw Error("build_confusion: " + std::to_string(predictions.size()) +
                    " predictions vs " + std::to_string(labels.size()) + " labels");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i];
        if (p < 0 || static_cast<std::size_t>(p) >= kNumClasses)
            throw Error("build_confusion: prediction " + std::to_string(p) + " out of range");
        ++cm.counts[static_cast<std::size_t>(p)][static_cast<std::size_t>(labels[i])];
    }
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    MetricsReport report;
    report.total = cm.total();
    if (report.total == 0)
        throw Error("compute_metrics: empty confusion matrix");
    const auto total = static_cast<double>(report.total);

    std::int64_t trace = 0;
    std::size_t counted_classes = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const std::int64_t tp = cm.counts[c][c];
        std::int64_t fp = 0, fn = 0;
        for (std::size_t k = 0; k < kNumClasses; ++k) {
            if (k == c)
                continue;
            fp += cm.counts[c][k]; // predicted c, actually k
            fn += cm.counts[k][c]; // predicted k, actually c
        }
        const std::int64_t tn = report.total - tp - fp - fn;
        trace += tp;

        ClassMetrics& m = report.per_class[c];
        m.support = cm.support(c);
        if (tp + fp > 0)
            m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        else
            m.precision_defined = false;
        if (tp + fn > 0)
            m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        else
            m.recall_defined = false;
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        m.accuracy = static_cast<double>(tp + tn) / total;

        if (m.support > 0) {
            ++counted_classes;
            report.macro_precision += m.precision;
            report.macro_recall += m.recall;
            report.macro_f1 += m.f1;
            report.macro_accuracy += m.accuracy;
        }
    }
    if (counted_classes > 0) {
        const auto k = static_cast<double>(counted_classes);
        report.macro_precision /= k;
        report.macro_recall /= k;
        report.macro_f1 /= k;
        report.macro_accuracy /= k;
    }
    report.overall_accuracy = static_cast<double>(trace) / total;
    return report;
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::json doc;
    doc["total"] = report.total;
    doc["overall_accuracy"] = report.overall_accuracy;
    doc["macro"] = {
        {"precision", report.macro_precision},
        {"recall", report.macro_recall},
        {"f1", report.macro_f1},
        {"accuracy", report.macro_accuracy},
    };
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& m = report.per_class[c];
        classes.push_back({
            {"class", class_name(static_cast<ClassLabel>(c))},
            {"support", m.support},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"accuracy", m.accuracy},
            {"precision_defined", m.precision_defined},
            {"recall_defined", m.recall_defined},
        });
    }
    doc["per_class"] = classes;
    return doc.dump(2) + "\n";
}

void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out) {
    out << "predicted\\true";
    for (std::size_t t = 0; t < kNumClasses; ++t)
        out << ',' << class_name(static_cast<ClassLabel>(t));
    out << '\n';
    for (std::size_t p = 0; p < kNumClasses; ++p) {
        out << class_name(static_cast<ClassLabel>(p));
        for (std::size_t t = 0; t < kNumClasses; ++t)
            out << ',' << cm.counts[p][t];
        out << '\n';
    }
}

void print_metrics(const MetricsReport& report, std::ostream& out) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %10s %10s %10s %10s %10s\n", "class", "support",
                  "precision", "recall", "f1", "accuracy");
    out << line;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& m = report.per_class[c];
        std::snprintf(line, sizeof(line), "%-8s %10lld %10.4f %10.4f %10.4f %10.4f%s\n",
                      class_name(static_cast<ClassLabel>(c)),
                      static_cast<long long>(m.support), m.precision, m.recall, m.f1, m.accuracy,
                      !m.precision_defined || !m.recall_defined ? "  (undefined -> 0)" : "");
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-8s %10s %10.4f %10.4f %10.4f %10.4f\n", "macro", "",
                  report.macro_precision, report.macro_recall, report.macro_f1,
                  report.macro_accuracy);
    out << line;
    std::snprintf(line, sizeof(line), "overall accuracy: %.4f  (%lld records)\n",
                  report.overall_accuracy, static_cast<long long>(report.total));
    out << line;
}

} // namespace dqlids
