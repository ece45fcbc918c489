#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "stallpred/errors.hpp"
#include "stallpred/metrics.hpp"
#include "stallpred/rng.hpp"

using namespace stallpred;

namespace {

// Exact integer fraction, converted to double by one correctly-rounded
// division; independent of the implementation's arithmetic path.
double rational(std::uint64_t num, std::uint64_t den) {
    const std::uint64_t g = std::gcd(num, den);
    return static_cast<double>(num / g) / static_cast<double>(den / g);
}

// O(P*N) pairwise comparison with half-credit ties.
double pairwise_auc(const Vector& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("confusion: basic counting and threshold boundary") {
    ConfusionMatrix cm = confusion({0.9, 0.1}, {1, 0});
    CHECK(cm.tp == 1);
    CHECK(cm.tn == 1);
    CHECK(cm.fp == 0);
    CHECK(cm.fn == 0);

    // a score exactly at the threshold counts as positive
    ConfusionMatrix at = confusion({0.5, 0.5}, {1, 0});
    CHECK(at.tp == 1);
    CHECK(at.fp == 1);
    CHECK(at.tn == 0);
}

TEST_CASE("confusion: reconstructed test-set breakdown") {
    // 135 caught positives, 15 missed, all 150 negatives clean
    Vector scores;
    std::vector<int> labels;
    for (int i = 0; i < 135; ++i) {
        scores.push_back(0.9);
        labels.push_back(1);
    }
    for (int i = 0; i < 15; ++i) {
        scores.push_back(0.1);
        labels.push_back(1);
    }
    for (int i = 0; i < 150; ++i) {
        scores.push_back(0.05);
        labels.push_back(0);
    }
    ConfusionMatrix cm = confusion(scores, labels);
    CHECK(cm.tp == 135);
    CHECK(cm.fn == 15);
    CHECK(cm.tn == 150);
    CHECK(cm.fp == 0);
    CHECK(cm.total() == 300);

    ClassificationMetrics m = classification_metrics(cm);
    CHECK(m.accuracy == doctest::Approx(0.95));
    CHECK(m.precision == doctest::Approx(1.0));
    CHECK(m.recall == doctest::Approx(0.90));
    CHECK(m.f1 == doctest::Approx(0.9474).epsilon(1e-4));
}

TEST_CASE("confusion: input validation") {
    CHECK_THROWS_AS(confusion({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(confusion({0.5}, {1, 0}), std::invalid_argument);
}

TEST_CASE("classification_metrics: perfect matrix") {
    ClassificationMetrics m = classification_metrics({10, 0, 10, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
}

TEST_CASE("classification_metrics: agrees exactly with the rational oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        ConfusionMatrix cm;
        cm.tp = rng.below(200);
        cm.fp = rng.below(200);
        cm.tn = rng.below(200);
        cm.fn = rng.below(200);
        if (cm.total() == 0) continue;
        ClassificationMetrics m = classification_metrics(cm);
        CHECK(m.accuracy == rational(cm.tp + cm.tn, cm.total()));
        if (cm.tp + cm.fp > 0) CHECK(m.precision == rational(cm.tp, cm.tp + cm.fp));
        if (cm.tp + cm.fn > 0) CHECK(m.recall == rational(cm.tp, cm.tp + cm.fn));
        if (2 * cm.tp + cm.fp + cm.fn > 0)
            CHECK(m.f1 == rational(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn));
        // integer identity: accuracy * total == tp + tn
        CHECK(m.accuracy * static_cast<double>(cm.total()) ==
              doctest::Approx(static_cast<double>(cm.tp + cm.tn)).epsilon(1e-15));
    }
}

TEST_CASE("classification_metrics: zero denominators flagged") {
    // no predicted positives: precision undefined
    ClassificationMetrics m = classification_metrics({0, 0, 10, 5});
    CHECK(m.precision == 0.0);
    CHECK(!m.precision_defined);
    CHECK(m.recall == 0.0);
    CHECK(m.recall_defined);  // tp+fn = 5 > 0

    // no positives at all: recall and f1 undefined
    ClassificationMetrics n = classification_metrics({0, 0, 10, 0});
    CHECK(!n.recall_defined);
    CHECK(!n.f1_defined);

    CHECK_THROWS_AS(classification_metrics({0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("roc_auc: separation and ties") {
    CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 1, 0, 0}) == 0.5);
    CHECK(roc_auc({0.1, 0.9}, {1, 0}) == 0.0);
}

TEST_CASE("roc_auc: single-class input rejected") {
    CHECK_THROWS_AS(roc_auc({0.5, 0.6}, {1, 1}), UndefinedMetricError);
    CHECK_THROWS_AS(roc_auc({0.5, 0.6}, {0, 0}), UndefinedMetricError);
}

TEST_CASE("roc_auc: matches the pairwise oracle on 200 random points") {
    Rng rng(8);
    Vector scores;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        // quantized scores force plenty of ties
        scores.push_back(std::round(rng.uniform() * 20.0) / 20.0);
        labels.push_back(rng.uniform() < 0.45 ? 1 : 0);
    }
    const double got = roc_auc(scores, labels);
    const double want = pairwise_auc(scores, labels);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("roc_auc: invariant under strictly monotone transforms") {
    Rng rng(9);
    Vector scores;
    std::vector<int> labels;
    for (int i = 0; i < 120; ++i) {
        scores.push_back(rng.normal());
        labels.push_back(rng.uniform() < 0.5 ? 1 : 0);
    }
    const double base = roc_auc(scores, labels);

    Vector expd = scores, affine = scores, logistic = scores;
    for (double& v : expd) v = std::exp(v);
    for (double& v : affine) v = 3.0 * v + 11.0;
    for (double& v : logistic) v = 1.0 / (1.0 + std::exp(-v));
    CHECK(roc_auc(expd, labels) == doctest::Approx(base).epsilon(1e-12));
    CHECK(roc_auc(affine, labels) == doctest::Approx(base).epsilon(1e-12));
    CHECK(roc_auc(logistic, labels) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("roc_auc: label flip with score negation maps to 1 - AUC") {
    Rng rng(10);
    Vector scores;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        scores.push_back(rng.normal());  // continuous: ties have measure zero
        labels.push_back(rng.uniform() < 0.5 ? 1 : 0);
    }
    const double base = roc_auc(scores, labels);
    std::vector<int> flipped = labels;
    for (int& y : flipped) y = 1 - y;
    CHECK(roc_auc(scores, flipped) == doctest::Approx(1.0 - base).epsilon(1e-12));
}

TEST_CASE("roc_curve: endpoints and monotone sweep") {
    Vector scores{0.9, 0.7, 0.7, 0.3, 0.2};
    std::vector<int> labels{1, 1, 0, 0, 1};
    auto pts = roc_curve(scores, labels);
    REQUIRE(pts.size() >= 2);
    CHECK(pts.front().fpr == 0.0);
    CHECK(pts.front().tpr == 0.0);
    CHECK(pts.back().fpr == 1.0);
    CHECK(pts.back().tpr == 1.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].fpr >= pts[i - 1].fpr);
        CHECK(pts[i].tpr >= pts[i - 1].tpr);
    }
    const std::string csv = roc_curve_to_csv(pts);
    CHECK(csv.rfind("threshold,fpr,tpr\n", 0) == 0);
}

TEST_CASE("eval report JSON carries the full breakdown") {
    Vector scores{0.9, 0.8, 0.3, 0.1};
    std::vector<int> labels{1, 1, 0, 0};
    EvalReport r = evaluate_scores(scores, labels, 0.5);
    CHECK(r.metrics.accuracy == 1.0);
    CHECK(r.auc == 1.0);
    const std::string json = eval_report_to_json(r);
    CHECK(json.find("\"accuracy\": 1.0") != std::string::npos);
    CHECK(json.find("\"tp\": 2") != std::string::npos);
    CHECK(json.find("\"zero_denominator\": []") != std::string::npos);
}
