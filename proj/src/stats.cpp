#include "starpo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>

#include "starpo/ioutil.hpp"

namespace starpo {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the incomplete beta, evaluated with Lentz's method.
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 3e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    raise(Errc::divergence, "incomplete beta continued fraction failed to converge");
}

double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) raise(Errc::invalid_params, "beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    // Use the expansion on whichever side converges fast, mirror the other.
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double students_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) raise(Errc::invalid_params, "degrees of freedom must be positive");
    if (t == 0.0) return 0.5;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        raise(Errc::insufficient_sample, "welch_t_test needs at least 2 values per sample");

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = sample_mean(a);
    const double mb = sample_mean(b);
    const double va = sample_variance(a, ma);
    const double vb = sample_variance(b, mb);

    WelchResult res;
    const double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        if (ma == mb)
            raise(Errc::degenerate_test, "both samples constant with equal means");
        res.t = ma > mb ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
        res.p = 0.0;
        res.zero_variance = true;
        res.dof = na + nb - 2.0;
        return res;
    }
    res.t = (ma - mb) / std::sqrt(se2);
    res.dof = se2 * se2 /
              ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    res.p = regularized_incomplete_beta(0.5 * res.dof, 0.5, res.dof / (res.dof + res.t * res.t));
    return res;
}

std::vector<std::uint64_t> mann_whitney_counts(int n, int m) {
    if (n < 0 || m < 0) raise(Errc::invalid_params, "sample sizes must be non-negative");
    // counts[u] = number of rank arrangements of n-vs-m with statistic u,
    // built by the two-term recurrence on which sample holds the largest value.
    std::vector<std::vector<std::uint64_t>> table(
        static_cast<std::size_t>(n) + 1,
        std::vector<std::uint64_t>(static_cast<std::size_t>(n) * m + 1, 0));
    for (int i = 0; i <= n; ++i) table[i][0] = 1;  // m = 0 column for each prefix
    for (int j = 1; j <= m; ++j) {
        std::vector<std::vector<std::uint64_t>> next(
            static_cast<std::size_t>(n) + 1,
            std::vector<std::uint64_t>(static_cast<std::size_t>(n) * m + 1, 0));
        for (int i = 0; i <= n; ++i) {
            for (int u = 0; u <= i * j; ++u) {
                std::uint64_t total = table[i][u];  // largest value in sample b
                if (i >= 1 && u >= j) total += next[i - 1][u - j];  // largest in sample a
                next[i][u] = total;
            }
        }
        table = std::move(next);
    }
    return table[n];
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        raise(Errc::insufficient_sample, "mann_whitney_u needs at least 1 value per sample");

    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t N = n + m;

    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> pooled;
    pooled.reserve(N);
    for (double x : a) pooled.push_back({x, true});
    for (double x : b) pooled.push_back({x, false});
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const Tagged& l, const Tagged& r) { return l.value < r.value; });

    // Midranks over tie groups; collect tie-group sizes for the variance correction.
    std::vector<double> ranks(N);
    std::vector<std::size_t> tie_sizes;
    bool ties = false;
    for (std::size_t i = 0; i < N;) {
        std::size_t j = i;
        while (j < N && pooled[j].value == pooled[i].value) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[k] = midrank;
        if (j - i > 1) {
            ties = true;
            tie_sizes.push_back(j - i);
        }
        i = j;
    }

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        if (pooled[i].from_a) rank_sum_a += ranks[i];

    MannWhitneyResult res;
    res.u = rank_sum_a - 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);

    if (!ties && std::min(n, m) <= 8) {
        const auto counts = mann_whitney_counts(static_cast<int>(n), static_cast<int>(m));
        const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        const auto u_int = static_cast<std::size_t>(std::llround(res.u));
        std::uint64_t below = 0, above = 0;
        for (std::size_t u = 0; u <= u_int; ++u) below += counts[u];
        for (std::size_t u = u_int; u < counts.size(); ++u) above += counts[u];
        const double cdf_lo = static_cast<double>(below) / static_cast<double>(total);
        const double cdf_hi = static_cast<double>(above) / static_cast<double>(total);
        res.p = std::min(1.0, 2.0 * std::min(cdf_lo, cdf_hi));
        res.exact = true;
        return res;
    }

    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    const double NN = static_cast<double>(N);
    const double mu = 0.5 * nn * mm;
    double tie_term = 0.0;
    for (std::size_t t : tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double var = nn * mm / 12.0 * ((NN + 1.0) - tie_term / (NN * (NN - 1.0)));
    res.tie_corrected = ties;
    if (var <= 0.0) {  // every pooled value identical: no evidence either way
        res.p = 1.0;
        return res;
    }
    const double dev = std::abs(res.u - mu);
    const double z = std::max(0.0, dev - 0.5) / std::sqrt(var);
    res.p = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
    return res;
}

const char* test_kind_name(TestKind kind) {
    switch (kind) {
        case TestKind::Welch: return "t";
        case TestKind::MannWhitney: return "mwu";
    }
    return "?";
}

const char* study_condition_name(StudyCondition cond) {
    switch (cond) {
        case StudyCondition::AcfLow: return "acf_low";
        case StudyCondition::AcfHigh: return "acf_high";
        case StudyCondition::PeLow: return "pe_low";
        case StudyCondition::AcfValue: return "acf_value";
        case StudyCondition::PeValue: return "pe_value";
    }
    return "?";
}

bool is_occurrence_condition(StudyCondition cond) {
    return cond == StudyCondition::AcfLow || cond == StudyCondition::AcfHigh ||
           cond == StudyCondition::PeLow;
}

const StudyRow* SignificanceReport::find(ErrorLabel error_type, StudyCondition cond,
                                         TestKind test) const {
    for (const auto& row : rows)
        if (row.error_type == error_type && row.condition == cond && row.test == test)
            return &row;
    return nullptr;
}

bool row_significant(const StudyRow& row, double alpha) { return row.tested && row.p < alpha; }

namespace {

bool condition_flag(const AbnormalityFlags& flags, StudyCondition cond) {
    switch (cond) {
        case StudyCondition::AcfLow: return flags.acf_abnormal_low;
        case StudyCondition::AcfHigh: return flags.acf_abnormal_high;
        case StudyCondition::PeLow: return flags.pe_abnormal_low;
        default: raise(Errc::invalid_params, "not an occurrence condition");
    }
}

double condition_metric(const StabilityScores& scores, StudyCondition cond) {
    return cond == StudyCondition::AcfValue ? scores.r_acf : scores.r_pe;
}

StudyRow run_row(const std::vector<LabeledSample>& samples, ErrorLabel error_type,
                 StudyCondition cond, TestKind test) {
    StudyRow row;
    row.error_type = error_type;
    row.condition = cond;
    row.test = test;

    // Group 1 vs group 2: flagged vs unflagged samples compared on the
    // error indicator, or error-labeled vs rest compared on the raw metric.
    std::vector<double> g1, g2;
    if (is_occurrence_condition(cond)) {
        for (const auto& s : samples) {
            const double indicator = s.label == error_type ? 1.0 : 0.0;
            (condition_flag(s.flags, cond) ? g1 : g2).push_back(indicator);
        }
    } else {
        for (const auto& s : samples) {
            const double value = condition_metric(s.scores, cond);
            (s.label == error_type ? g1 : g2).push_back(value);
        }
    }
    row.n_abnormal = static_cast<std::int64_t>(g1.size());
    row.n_normal = static_cast<std::int64_t>(g2.size());
    if (g1.size() < 2 || g2.size() < 2) {
        row.note = "partition too small";
        return row;
    }

    const double diff = sample_mean(g1) - sample_mean(g2);
    row.direction = diff > 0.0 ? 1 : diff < 0.0 ? -1 : 0;
    try {
        if (test == TestKind::Welch) {
            row.p = welch_t_test(g1, g2).p;
        } else {
            row.p = mann_whitney_u(g1, g2).p;
        }
        row.tested = true;
    } catch (const Error& e) {
        if (e.code() != Errc::degenerate_test) throw;
        row.note = "degenerate: no variation in either group";
    }
    return row;
}

}  // namespace

SignificanceReport association_study(const std::vector<LabeledSample>& samples, double alpha) {
    if (samples.empty()) raise(Errc::empty_study, "association study over zero samples");
    if (!(alpha > 0.0 && alpha < 1.0)) raise(Errc::invalid_params, "alpha must lie in (0,1)");

    static constexpr ErrorLabel kErrors[] = {ErrorLabel::SemanticDrift, ErrorLabel::LogicalLeap,
                                             ErrorLabel::RepetitionLoop};
    static constexpr StudyCondition kConditions[] = {
        StudyCondition::AcfLow, StudyCondition::AcfHigh, StudyCondition::PeLow,
        StudyCondition::AcfValue, StudyCondition::PeValue};
    static constexpr TestKind kTests[] = {TestKind::Welch, TestKind::MannWhitney};

    SignificanceReport report;
    report.alpha = alpha;
    for (ErrorLabel error_type : kErrors)
        for (StudyCondition cond : kConditions)
            for (TestKind test : kTests)
                report.rows.push_back(run_row(samples, error_type, cond, test));
    return report;
}

std::string report_to_csv(const SignificanceReport& report) {
    std::string out = "error_type,condition,test,p,direction,n_abnormal,n_normal,significant\n";
    for (const auto& row : report.rows) {
        out += label_to_string(row.error_type);
        out += ',';
        out += study_condition_name(row.condition);
        out += ',';
        out += test_kind_name(row.test);
        out += ',';
        out += row.tested ? format_double(row.p) : "NA";
        out += ',';
        out += std::to_string(row.direction);
        out += ',';
        out += std::to_string(row.n_abnormal);
        out += ',';
        out += std::to_string(row.n_normal);
        out += ',';
        out += !row.tested ? "untested" : (row.p < report.alpha ? "yes" : "no");
        out += '\n';
    }
    return out;
}

namespace {

std::string stars(const StudyRow* row, double alpha) {
    if (!row || !row->tested) return "untested";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", row->p);
    std::string s(buf);
    if (row->p < alpha / 5.0)
        s += "**";
    else if (row->p < alpha)
        s += "*";
    return s;
}

}  // namespace

std::string report_to_table(const SignificanceReport& report) {
    static constexpr ErrorLabel kErrors[] = {ErrorLabel::SemanticDrift, ErrorLabel::LogicalLeap,
                                             ErrorLabel::RepetitionLoop};
    const char* kHeaders[] = {"ACF Low", "ACF High", "PE Low", "PE (t)", "PE (M-W)"};

    std::vector<std::vector<std::string>> cells;
    for (ErrorLabel e : kErrors) {
        std::vector<std::string> line;
        line.push_back(label_to_string(e));
        line.push_back(stars(report.find(e, StudyCondition::AcfLow, TestKind::Welch), report.alpha));
        line.push_back(stars(report.find(e, StudyCondition::AcfHigh, TestKind::Welch), report.alpha));
        line.push_back(stars(report.find(e, StudyCondition::PeLow, TestKind::Welch), report.alpha));
        line.push_back(stars(report.find(e, StudyCondition::PeValue, TestKind::Welch), report.alpha));
        line.push_back(
            stars(report.find(e, StudyCondition::PeValue, TestKind::MannWhitney), report.alpha));
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> width = {10};
    for (std::size_t c = 0; c < 5; ++c) width.push_back(std::strlen(kHeaders[c]));
    for (const auto& line : cells)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size() + 2, ' ');
    };
    std::string out = pad("error_type", width[0]);
    for (std::size_t c = 0; c < 5; ++c) out += pad(kHeaders[c], width[c + 1]);
    out += '\n';
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) out += pad(line[c], width[c]);
        out += '\n';
    }
    return out;
}

}  // namespace starpo
