#include "stallpred/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stallpred/errors.hpp"
#include "stallpred/text.hpp"

namespace stallpred {

ConfusionMatrix confusion(const Vector& scores, const std::vector<int>& labels,
                          double threshold) {
    if (scores.empty()) throw std::invalid_argument("confusion: empty input");
    if (scores.size() != labels.size())
        throw std::invalid_argument("confusion: length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        const bool truth = labels[i] != 0;
        if (pred && truth)
            ++cm.tp;
        else if (pred && !truth)
            ++cm.fp;
        else if (!pred && truth)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("classification_metrics: empty matrix");
    ClassificationMetrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp > 0)
        m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    else
        m.precision_defined = false;
    if (cm.tp + cm.fn > 0)
        m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    else
        m.recall_defined = false;
    // harmonic mean of precision and recall as one exact fraction
    if (2 * cm.tp + cm.fp + cm.fn > 0)
        m.f1 = static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
    else
        m.f1_defined = false;
    return m;
}

double roc_auc(const Vector& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y != 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedMetricError("roc_auc: needs at least one positive and one negative");

    // Average ranks over the pooled sample; tied scores share the mean rank.
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[idx[k]] != 0) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double p = static_cast<double>(n_pos);
    const double n = static_cast<double>(n_neg);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);
}

std::vector<RocPoint> roc_curve(const Vector& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc_curve: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y != 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedMetricError("roc_curve: needs at least one positive and one negative");

    std::vector<double> thresholds(scores.begin(), scores.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<RocPoint> points;
    points.push_back({thresholds.front() + 1.0, 0.0, 0.0});
    for (double th : thresholds) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t k = 0; k < scores.size(); ++k) {
            if (scores[k] >= th) (labels[k] != 0 ? tp : fp)++;
        }
        points.push_back({th, static_cast<double>(fp) / static_cast<double>(n_neg),
                          static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return points;
}

std::string roc_curve_to_csv(const std::vector<RocPoint>& points) {
    std::string csv = "threshold,fpr,tpr\n";
    for (const auto& p : points) {
        csv += fmt_double(p.threshold);
        csv += ',';
        csv += fmt_double(p.fpr);
        csv += ',';
        csv += fmt_double(p.tpr);
        csv += '\n';
    }
    return csv;
}

EvalReport evaluate_scores(const Vector& scores, const std::vector<int>& labels,
                           double threshold) {
    EvalReport r;
    r.threshold = threshold;
    r.cm = confusion(scores, labels, threshold);
    r.metrics = classification_metrics(r.cm);
    r.auc = roc_auc(scores, labels);
    return r;
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["accuracy"] = report.metrics.accuracy;
    j["precision"] = report.metrics.precision;
    j["recall"] = report.metrics.recall;
    j["f1"] = report.metrics.f1;
    j["auc"] = report.auc;
    j["threshold"] = report.threshold;
    j["confusion"] = {{"tp", report.cm.tp}, {"fp", report.cm.fp},
                      {"tn", report.cm.tn}, {"fn", report.cm.fn}};
    nlohmann::ordered_json undefined = nlohmann::ordered_json::array();
    if (!report.metrics.precision_defined) undefined.push_back("precision");
    if (!report.metrics.recall_defined) undefined.push_back("recall");
    if (!report.metrics.f1_defined) undefined.push_back("f1");
    j["zero_denominator"] = undefined;
    return j.dump(2) + "\n";
}

}  // namespace stallpred
