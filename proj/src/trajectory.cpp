#include "starpo/trajectory.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include "starpo/ioutil.hpp"

namespace starpo {

std::string label_to_string(ErrorLabel label) {
    switch (label) {
        case ErrorLabel::None: return "none";
        case ErrorLabel::SemanticDrift: return "drift";
        case ErrorLabel::LogicalLeap: return "leap";
        case ErrorLabel::RepetitionLoop: return "loop";
    }
    return "none";
}

ErrorLabel label_from_string(const std::string& s) {
    if (s == "none") return ErrorLabel::None;
    if (s == "drift") return ErrorLabel::SemanticDrift;
    if (s == "leap") return ErrorLabel::LogicalLeap;
    if (s == "loop") return ErrorLabel::RepetitionLoop;
    raise(Errc::parse_error, "unknown label '" + s + "'");
}

void Trajectory::validate() const {
    if (steps.rows() < 1) raise(Errc::invalid_trajectory, "trajectory '" + id + "' has no steps");
    if (steps.cols() < 1) raise(Errc::invalid_trajectory, "trajectory '" + id + "' has dimension 0");
    if (!steps.allFinite())
        raise(Errc::invalid_trajectory, "trajectory '" + id + "' has non-finite embedding values");
    if (step_texts && static_cast<Eigen::Index>(step_texts->size()) != steps.rows())
        raise(Errc::invalid_trajectory,
              "trajectory '" + id + "' step_texts length does not match step count");
    if (task_reward) {
        const double r = *task_reward;
        if (!std::isfinite(r) || r < 0.0 || r > 1.0)
            raise(Errc::invalid_trajectory,
                  "trajectory '" + id + "' task_reward outside [0,1]");
    }
}

bool Trajectory::operator==(const Trajectory& other) const {
    if (id != other.id || label != other.label || meta != other.meta) return false;
    if (steps.rows() != other.steps.rows() || steps.cols() != other.steps.cols()) return false;
    // bit-exact comparison; round-trip through files must preserve values
    if (std::memcmp(steps.data(), other.steps.data(),
                    sizeof(double) * static_cast<std::size_t>(steps.size())) != 0 &&
        steps.size() > 0)
        return false;
    if (step_texts != other.step_texts) return false;
    if (task_reward.has_value() != other.task_reward.has_value()) return false;
    if (task_reward && *task_reward != *other.task_reward) return false;
    return true;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool all_whitespace(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

std::vector<std::string> split_on_string(const std::string& text, const std::string& sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = text.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(text.substr(pos));
            break;
        }
        parts.push_back(text.substr(pos, next - pos));
        pos = next + sep.size();
    }
    return parts;
}

}  // namespace

std::vector<std::string> segment_steps(const std::string& text, const Segmentation& rule) {
    if (text.empty() || all_whitespace(text))
        raise(Errc::empty_input, "segment_steps requires non-whitespace text");

    std::vector<std::string> raw;
    switch (rule.rule) {
        case SegmentationRule::LineDelimited:
            raw = split_on_string(text, "\n");
            break;
        case SegmentationRule::SentenceDelimited: {
            // a span ends right after '.', '!' or '?'
            std::string cur;
            for (char c : text) {
                cur.push_back(c);
                if (c == '.' || c == '!' || c == '?') {
                    raw.push_back(cur);
                    cur.clear();
                }
            }
            if (!cur.empty()) raw.push_back(cur);
            break;
        }
        case SegmentationRule::ExplicitMarker: {
            if (rule.marker.empty())
                raise(Errc::invalid_params, "explicit-marker segmentation needs a marker");
            raw = split_on_string(text, rule.marker);
            break;
        }
    }

    std::vector<std::string> spans;
    for (const auto& part : raw) {
        std::string t = trim(part);
        if (!t.empty()) spans.push_back(std::move(t));
    }
    if (spans.empty()) raise(Errc::empty_input, "no non-empty spans after segmentation");
    return spans;
}

Trajectory embed_steps(const std::vector<std::vector<Vector>>& token_vectors_per_step) {
    if (token_vectors_per_step.empty()) raise(Errc::empty_step, "no steps given");

    Eigen::Index dim = -1;
    for (std::size_t k = 0; k < token_vectors_per_step.size(); ++k) {
        const auto& tokens = token_vectors_per_step[k];
        if (tokens.empty())
            raise(Errc::empty_step, "step " + std::to_string(k) + " has no token vectors");
        for (const auto& v : tokens) {
            if (dim < 0) dim = v.size();
            if (v.size() != dim)
                raise(Errc::dim_mismatch,
                      "token vector in step " + std::to_string(k) + " has dimension " +
                          std::to_string(v.size()) + ", expected " + std::to_string(dim));
        }
    }
    if (dim < 1) raise(Errc::dim_mismatch, "token vectors must have dimension >= 1");

    Trajectory traj;
    traj.steps.resize(static_cast<Eigen::Index>(token_vectors_per_step.size()), dim);
    for (std::size_t k = 0; k < token_vectors_per_step.size(); ++k) {
        const auto& tokens = token_vectors_per_step[k];
        Vector mean = Vector::Zero(dim);
        for (const auto& v : tokens) mean += v;
        mean /= static_cast<double>(tokens.size());
        traj.steps.row(static_cast<Eigen::Index>(k)) = mean.transpose();
    }
    return traj;
}

namespace {

using nlohmann::json;

std::string quote_json_string(const std::string& s) { return json(s).dump(); }

}  // namespace

std::string trajectory_to_record(const Trajectory& traj) {
    traj.validate();
    std::string out;
    out.reserve(64 + static_cast<std::size_t>(traj.steps.size()) * 20);
    out += "{\"id\":";
    out += quote_json_string(traj.id);
    out += ",\"steps\":[";
    for (Eigen::Index k = 0; k < traj.steps.rows(); ++k) {
        if (k) out += ',';
        out += '[';
        for (Eigen::Index j = 0; j < traj.steps.cols(); ++j) {
            if (j) out += ',';
            out += format_double(traj.steps(k, j));
        }
        out += ']';
    }
    out += ']';
    if (traj.step_texts) {
        out += ",\"texts\":[";
        for (std::size_t i = 0; i < traj.step_texts->size(); ++i) {
            if (i) out += ',';
            out += quote_json_string((*traj.step_texts)[i]);
        }
        out += ']';
    }
    if (traj.task_reward) {
        out += ",\"task_reward\":";
        out += format_double(*traj.task_reward);
    }
    if (traj.label != ErrorLabel::None) {
        out += ",\"label\":";
        out += quote_json_string(label_to_string(traj.label));
    }
    if (!traj.meta.empty()) {
        out += ",\"meta\":{";
        bool first = true;
        for (const auto& [key, value] : traj.meta) {
            if (!first) out += ',';
            first = false;
            out += quote_json_string(key);
            out += ':';
            out += quote_json_string(value);
        }
        out += '}';
    }
    out += '}';
    return out;
}

Trajectory trajectory_from_record(const std::string& line) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::exception& e) {
        raise(Errc::parse_error, e.what());
    }
    if (!rec.is_object()) raise(Errc::parse_error, "record is not an object");

    Trajectory traj;
    try {
        traj.id = rec.at("id").get<std::string>();
        const auto& steps = rec.at("steps");
        if (!steps.is_array() || steps.empty())
            raise(Errc::invalid_trajectory, "steps must be a non-empty array");
        const std::size_t rows = steps.size();
        std::size_t cols = 0;
        for (std::size_t k = 0; k < rows; ++k) {
            const auto& row = steps.at(k);
            if (!row.is_array()) raise(Errc::invalid_trajectory, "step is not an array");
            if (k == 0) {
                cols = row.size();
                if (cols == 0) raise(Errc::invalid_trajectory, "step has dimension 0");
                traj.steps.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            } else if (row.size() != cols) {
                raise(Errc::invalid_trajectory,
                      "step " + std::to_string(k) + " has mismatched dimension");
            }
            for (std::size_t j = 0; j < cols; ++j) {
                const auto& cell = row.at(j);
                if (!cell.is_number()) raise(Errc::invalid_trajectory, "non-numeric embedding value");
                traj.steps(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                    cell.get<double>();
            }
        }
        if (rec.contains("texts")) {
            std::vector<std::string> texts;
            for (const auto& t : rec.at("texts")) texts.push_back(t.get<std::string>());
            traj.step_texts = std::move(texts);
        }
        if (rec.contains("task_reward")) traj.task_reward = rec.at("task_reward").get<double>();
        if (rec.contains("label")) traj.label = label_from_string(rec.at("label").get<std::string>());
        if (rec.contains("meta")) {
            for (const auto& [key, value] : rec.at("meta").items())
                traj.meta[key] = value.get<std::string>();
        }
    } catch (const json::exception& e) {
        raise(Errc::parse_error, e.what());
    }
    traj.validate();
    return traj;
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open: " + path);

    std::vector<Trajectory> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || all_whitespace(line)) continue;
        try {
            out.push_back(trajectory_from_record(line));
        } catch (const Error& e) {
            raise(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void save_trajectories(const std::vector<Trajectory>& trajectories, const std::string& path) {
    std::string content;
    for (const auto& traj : trajectories) {
        content += trajectory_to_record(traj);
        content += '\n';
    }
    atomic_write_file(path, content);
}

}  // namespace starpo
