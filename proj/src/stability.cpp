#include "starpo/stability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "starpo/ioutil.hpp"

namespace starpo {

Matrix step_deltas(const Matrix& steps) {
    const Eigen::Index K = steps.rows();
    if (K < 2) raise(Errc::too_short, "need at least 2 steps, got " + std::to_string(K));
    return steps.bottomRows(K - 1) - steps.topRows(K - 1);
}

std::vector<double> acf_pairs(const Matrix& deltas, double epsilon_norm,
                              std::int64_t* zero_delta_count) {
    const Eigen::Index n = deltas.rows();
    if (n < 2) raise(Errc::too_few_deltas, "need at least 2 deltas, got " + std::to_string(n));

    std::vector<double> pairs;
    pairs.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index k = 1; k < n; ++k) {
        const double na = deltas.row(k - 1).norm();
        const double nb = deltas.row(k).norm();
        if (na < epsilon_norm || nb < epsilon_norm) {
            pairs.push_back(0.0);
            if (zero_delta_count) ++*zero_delta_count;
            continue;
        }
        const double cos = deltas.row(k - 1).dot(deltas.row(k)) / (na * nb);
        pairs.push_back(std::clamp(cos, -1.0, 1.0));
    }
    return pairs;
}

AcfResult acf_reward(const Matrix& steps, double epsilon_norm) {
    AcfResult res;
    if (steps.rows() < 3) {
        res.degenerate = true;
        return res;
    }
    res.pairs = acf_pairs(step_deltas(steps), epsilon_norm, &res.zero_delta_count);
    double sum = 0.0;
    for (double v : res.pairs) sum += v;
    res.r_acf = sum / static_cast<double>(res.pairs.size());
    return res;
}

PathEfficiencyResult path_efficiency(const Matrix& steps, double epsilon_pe) {
    const Eigen::Index K = steps.rows();
    if (K < 2) raise(Errc::too_short, "need at least 2 steps, got " + std::to_string(K));
    if (!(epsilon_pe > 0.0)) raise(Errc::invalid_params, "epsilon_pe must be positive");

    PathEfficiencyResult res;
    res.net_displacement = (steps.row(K - 1) - steps.row(0)).norm();
    for (Eigen::Index k = 1; k < K; ++k)
        res.path_length += (steps.row(k) - steps.row(k - 1)).norm();
    res.r_pe = res.net_displacement / (res.path_length + epsilon_pe);
    return res;
}

StabilityScores compute_scores(const Matrix& steps, const StabilityParams& params) {
    StabilityScores s;
    const AcfResult acf = acf_reward(steps, params.epsilon_norm);
    s.r_acf = acf.r_acf;
    s.acf_pairs = acf.pairs;
    s.degenerate_acf = acf.degenerate;
    s.zero_delta_count = acf.zero_delta_count;
    const PathEfficiencyResult pe = path_efficiency(steps, params.epsilon_pe);
    s.r_pe = pe.r_pe;
    s.net_displacement = pe.net_displacement;
    s.path_length = pe.path_length;
    return s;
}

StabilityScores compute_scores(const Trajectory& traj, const StabilityParams& params) {
    traj.validate();
    return compute_scores(traj.steps, params);
}

double quantile_linear(std::vector<double> values, double p) {
    if (values.empty()) raise(Errc::insufficient_sample, "quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        raise(Errc::invalid_params, "quantile level must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return values[0];
    const double h = static_cast<double>(n - 1) * p;
    const std::size_t lo = std::min(static_cast<std::size_t>(h), n - 2);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

AbnormalityCalibration calibrate_abnormality(const std::vector<StabilityScores>& sample,
                                             double tail_mass) {
    if (sample.size() < 2)
        raise(Errc::insufficient_sample,
              "calibration needs at least 2 scores, got " + std::to_string(sample.size()));
    if (!(tail_mass > 0.0 && tail_mass < 0.5))
        raise(Errc::invalid_params, "tail_mass must lie in (0, 0.5)");

    std::vector<double> acf, pe;
    acf.reserve(sample.size());
    pe.reserve(sample.size());
    for (const auto& s : sample) {
        acf.push_back(s.r_acf);
        pe.push_back(s.r_pe);
    }
    AbnormalityCalibration calib;
    calib.acf_low = quantile_linear(acf, tail_mass);
    calib.acf_high = quantile_linear(acf, 1.0 - tail_mass);
    calib.pe_low = quantile_linear(pe, tail_mass);
    calib.tail_mass = tail_mass;
    calib.sample_size = static_cast<std::int64_t>(sample.size());
    return calib;
}

AbnormalityFlags flag_abnormal(const StabilityScores& scores,
                               const AbnormalityCalibration& calib) {
    AbnormalityFlags f;
    f.acf_abnormal_low = scores.r_acf < calib.acf_low;
    f.acf_abnormal_high = scores.r_acf > calib.acf_high;
    f.pe_abnormal_low = scores.r_pe < calib.pe_low;
    return f;
}

namespace {

std::string flags_to_string(const AbnormalityFlags& flags) {
    std::string out;
    auto add = [&out](const char* name) {
        if (!out.empty()) out += ',';
        out += name;
    };
    if (flags.acf_abnormal_low) add("acf_low");
    if (flags.acf_abnormal_high) add("acf_high");
    if (flags.pe_abnormal_low) add("pe_low");
    return out;
}

}  // namespace

void write_scores_meta(Trajectory& traj, const StabilityScores& scores) {
    traj.meta["r_acf"] = format_double(scores.r_acf);
    traj.meta["r_pe"] = format_double(scores.r_pe);
    traj.meta["D"] = format_double(scores.net_displacement);
    traj.meta["L"] = format_double(scores.path_length);
}

void write_flags_meta(Trajectory& traj, const AbnormalityFlags& flags) {
    traj.meta["flags"] = flags_to_string(flags);
}

AbnormalityFlags flags_from_meta(const Trajectory& traj) {
    AbnormalityFlags f;
    const auto it = traj.meta.find("flags");
    if (it == traj.meta.end()) return f;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "acf_low") f.acf_abnormal_low = true;
        else if (tok == "acf_high") f.acf_abnormal_high = true;
        else if (tok == "pe_low") f.pe_abnormal_low = true;
        else if (!tok.empty()) raise(Errc::parse_error, "unknown flag '" + tok + "'");
    }
    return f;
}

void save_calibration(const AbnormalityCalibration& calib, const std::string& path) {
    std::string out;
    out += "acf_low = " + format_double(calib.acf_low) + "\n";
    out += "acf_high = " + format_double(calib.acf_high) + "\n";
    out += "pe_low = " + format_double(calib.pe_low) + "\n";
    out += "tail_mass = " + format_double(calib.tail_mass) + "\n";
    out += "sample_size = " + std::to_string(calib.sample_size) + "\n";
    atomic_write_file(path, out);
}

AbnormalityCalibration load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open: " + path);

    AbnormalityCalibration calib;
    bool saw_low = false, saw_high = false, saw_pe = false, saw_tail = false, saw_n = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            raise(Errc::parse_error, path + ":" + std::to_string(lineno) + ": expected key = value");
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        try {
            if (key == "acf_low") { calib.acf_low = std::stod(value); saw_low = true; }
            else if (key == "acf_high") { calib.acf_high = std::stod(value); saw_high = true; }
            else if (key == "pe_low") { calib.pe_low = std::stod(value); saw_pe = true; }
            else if (key == "tail_mass") { calib.tail_mass = std::stod(value); saw_tail = true; }
            else if (key == "sample_size") { calib.sample_size = std::stoll(value); saw_n = true; }
            else raise(Errc::parse_error, path + ": unknown calibration key '" + key + "'");
        } catch (const std::invalid_argument&) {
            raise(Errc::parse_error, path + ":" + std::to_string(lineno) + ": bad number '" + value + "'");
        } catch (const std::out_of_range&) {
            raise(Errc::parse_error, path + ":" + std::to_string(lineno) + ": number out of range");
        }
    }
    if (!(saw_low && saw_high && saw_pe && saw_tail && saw_n))
        raise(Errc::schema_error, path + ": incomplete calibration file");
    if (calib.acf_low > calib.acf_high)
        raise(Errc::schema_error, path + ": acf_low exceeds acf_high");
    if (calib.sample_size < 1) raise(Errc::schema_error, path + ": sample_size must be >= 1");
    return calib;
}

}  // namespace starpo
