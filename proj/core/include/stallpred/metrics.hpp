#pragma once

#include <string>
#include <vector>

#include "stallpred/matrix.hpp"

namespace stallpred {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
};

/// Counts with prediction = (score >= threshold); a score exactly at the
/// threshold counts as positive.
ConfusionMatrix confusion(const Vector& scores, const std::vector<int>& labels,
                          double threshold = 0.5);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Zero-denominator metrics report 0 with the matching flag cleared.
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

/// accuracy=(tp+tn)/total, precision=tp/(tp+fp), recall=tp/(tp+fn),
/// f1=2tp/(2tp+fp+fn). Each value is a single correctly-rounded division of
/// exact integer counts. Throws std::invalid_argument on an empty matrix.
ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

/// Probability that a random positive outscores a random negative, ties
/// counted 1/2 (Mann-Whitney rank statistic; exact under ties). Throws
/// UndefinedMetricError unless both classes are present.
double roc_auc(const Vector& scores, const std::vector<int>& labels);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

/// Threshold sweep over the distinct scores (descending), starting above the
/// maximum score. For plotting only; headline metrics stay at the fixed 0.5.
std::vector<RocPoint> roc_curve(const Vector& scores, const std::vector<int>& labels);

std::string roc_curve_to_csv(const std::vector<RocPoint>& points);

struct EvalReport {
    ClassificationMetrics metrics;
    double auc = 0.0;
    ConfusionMatrix cm;
    double threshold = 0.5;
};

EvalReport evaluate_scores(const Vector& scores, const std::vector<int>& labels,
                           double threshold = 0.5);

std::string eval_report_to_json(const EvalReport& report);

}  // namespace stallpred
