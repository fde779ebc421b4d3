#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "starpo/stability.hpp"
#include "starpo/trajectory.hpp"

namespace starpo {

// Regularized incomplete beta I_x(a, b) via the standard continued-fraction
// expansion (Lentz's method). Raises DivergenceError if it fails to converge.
double regularized_incomplete_beta(double a, double b, double x);

// CDF of Student's t with dof degrees of freedom.
double students_t_cdf(double t, double dof);

// Standard normal CDF.
double normal_cdf(double z);

struct WelchResult {
    double t = 0.0;
    double p = 1.0;
    double dof = 0.0;
    // Both samples constant but with different means: p = 0 by convention.
    bool zero_variance = false;
};

// Two-sided Welch (unequal-variance) t-test. Raises InsufficientSample for
// samples smaller than 2, DegenerateTest when both samples are constant with
// equal means.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double p = 1.0;
    bool exact = false;          // exact enumeration path taken
    bool tie_corrected = false;  // ties present, variance tie-corrected
};

// Exact count distribution of the Mann-Whitney U statistic for sample sizes
// (n, m) under the null, counts[u] for u = 0..n*m. Exposed for oracle tests.
std::vector<std::uint64_t> mann_whitney_counts(int n, int m);

// Two-sided Mann-Whitney U test with midranks. Exact p by enumeration when
// min(|a|,|b|) <= 8 and the pooled sample is tie-free; otherwise a normal
// approximation with tie and continuity corrections. Raises InsufficientSample
// on an empty sample.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

// One labeled observation of the association study.
struct LabeledSample {
    StabilityScores scores;
    AbnormalityFlags flags;
    ErrorLabel label = ErrorLabel::None;
};

enum class TestKind { Welch, MannWhitney };
const char* test_kind_name(TestKind kind);

// What a study row conditions on. The *_low/high conditions partition samples
// by abnormality flag and compare error-occurrence indicators; the *_value
// conditions partition samples by error label and compare raw metric values.
enum class StudyCondition { AcfLow, AcfHigh, PeLow, AcfValue, PeValue };
const char* study_condition_name(StudyCondition cond);
bool is_occurrence_condition(StudyCondition cond);

struct StudyRow {
    ErrorLabel error_type = ErrorLabel::None;
    StudyCondition condition = StudyCondition::AcfLow;
    TestKind test = TestKind::Welch;
    bool tested = false;
    double p = 1.0;
    int direction = 0;  // sign of (abnormal - normal) rate, or (error - rest) metric mean
    std::int64_t n_abnormal = 0;  // flagged (occurrence) or error-labeled (value) group size
    std::int64_t n_normal = 0;
    std::string note;  // reason when untested
};

struct SignificanceReport {
    std::vector<StudyRow> rows;  // fixed order: error type, condition, test
    double alpha = 0.05;

    const StudyRow* find(ErrorLabel error_type, StudyCondition cond, TestKind test) const;
};

bool row_significant(const StudyRow& row, double alpha);

// Runs every (error type x condition x test) combination over the samples.
// Rows whose partitions are too small or whose test degenerates are marked
// untested rather than dropped. Raises EmptyStudy on no samples, InvalidParams
// unless 0 < alpha < 1.
SignificanceReport association_study(const std::vector<LabeledSample>& samples, double alpha);

// CSV: error_type,condition,test,p,direction,n_abnormal,n_normal,significant
std::string report_to_csv(const SignificanceReport& report);

// Aligned plain-text summary, one row per error type.
std::string report_to_table(const SignificanceReport& report);

}  // namespace starpo
