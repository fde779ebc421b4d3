#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "starpo/error.hpp"

namespace starpo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// One per-step semantic embedding h_k.
using StepEmbedding = Vector;

enum class ErrorLabel { None, SemanticDrift, LogicalLeap, RepetitionLoop };

std::string label_to_string(ErrorLabel label);
ErrorLabel label_from_string(const std::string& s);

// A reasoning trajectory: K step embeddings stacked as rows of a K x d
// matrix, optional step texts, an optional task reward in [0,1], an error
// label, and a free-form string map for annotations. Values are immutable
// by convention once built; treat instances as values.
struct Trajectory {
    std::string id;
    Matrix steps;  // K x d, row k is h_{k+1}
    std::optional<std::vector<std::string>> step_texts;
    std::optional<double> task_reward;
    ErrorLabel label = ErrorLabel::None;
    std::map<std::string, std::string> meta;

    Eigen::Index step_count() const { return steps.rows(); }
    Eigen::Index dim() const { return steps.cols(); }
    auto step(Eigen::Index k) const { return steps.row(k); }

    // Throws Errc::invalid_trajectory on any broken invariant: K >= 1,
    // d >= 1, finite components, texts length == K, reward in [0,1].
    void validate() const;

    bool operator==(const Trajectory& other) const;
};

enum class SegmentationRule { LineDelimited, SentenceDelimited, ExplicitMarker };

struct Segmentation {
    SegmentationRule rule = SegmentationRule::LineDelimited;
    std::string marker;  // used by ExplicitMarker only
};

// Splits reasoning text into ordered, non-empty step spans. Spans are
// trimmed; delimiter characters (newline / sentence holdover whitespace /
// the marker string) are not part of any span.
std::vector<std::string> segment_steps(const std::string& text, const Segmentation& rule);

// Builds a trajectory whose step k is the component-wise mean of that
// step's token vectors. All vectors must share one dimension.
Trajectory embed_steps(const std::vector<std::vector<Vector>>& token_vectors_per_step);

// Line-oriented trajectory file IO. One JSON object per line; numbers are
// written with 17 significant digits so values round-trip exactly.
std::vector<Trajectory> load_trajectories(const std::string& path);
void save_trajectories(const std::vector<Trajectory>& trajectories, const std::string& path);

std::string trajectory_to_record(const Trajectory& traj);
Trajectory trajectory_from_record(const std::string& line);

}  // namespace starpo
