#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wser/features.hpp"
#include "wser/labels.hpp"

namespace wser {

/// t reported when both samples have zero variance but different means.
inline constexpr double kDegenerateT = 1e300;

struct TTest {
    double t = 0;
    double dof = 0;
    double p = 1;
    /// Both sample variances were zero.
    bool degenerate = false;
};

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `dof` degrees
/// of freedom (dof need not be an integer).
double student_t_two_sided(double t, double dof);

/// Welch's unequal-variance two-sample t-test with Welch-Satterthwaite dof.
/// Zero variance in both samples gives t = 0, p = 1 for equal means, and
/// t = +-kDegenerateT, p = 0 otherwise; both cases set `degenerate`.
TTest welch_t(std::span<const double> a, std::span<const double> b);

struct PairTestResult {
    std::string feature;
    Emotion label_a = Emotion::boredom;
    Emotion label_b = Emotion::disgust;
    TTest test;

    /// Zero variance and equal means: carries no information about the pair.
    bool null_degenerate() const { return test.degenerate && test.t == 0.0; }
};

/// One Welch test per feature, ordered by ascending p, then descending |t|,
/// then informative before null-degenerate, then feature name.
std::vector<PairTestResult> rank_pair(const FeatureMatrix& matrix, Emotion a, Emotion b);

struct SchemaSlot {
    PairTestResult result;
    int slot = 0;  // 0 or 1 within the pair
};

/// Two features per label pair, pairs in canonical lexicographic order:
/// 2 x 21 = 42 slots.
struct SelectionSchema {
    std::vector<SchemaSlot> slots;

    std::vector<std::string> feature_names() const;

    /// Canonical text form; one line per slot:
    /// `<pair>  <slot>  <feature>  <t>  <dof>  <p>`.
    std::string to_text() const;
    static SelectionSchema from_text(const std::string& text);

    /// SHA-256 (hex) over the slot feature names in order.
    std::string hash() const;
};

SelectionSchema build_schema(const FeatureMatrix& matrix);

void write_schema(const std::filesystem::path& path, const SelectionSchema& schema);
SelectionSchema read_schema(const std::filesystem::path& path);

/// Materializes the schema's columns in slot order; features used by several
/// slots are repeated.
FeatureMatrix project(const FeatureMatrix& matrix, const SelectionSchema& schema);

}  // namespace wser
