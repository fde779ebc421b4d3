#pragma once

#include <cstdint>
#include <vector>

#include "starpo/rng.hpp"
#include "starpo/trajectory.hpp"

namespace starpo {

// Shape parameters for one synthetic trajectory. kind None means stable.
struct GeneratorParams {
    ErrorLabel kind = ErrorLabel::None;
    int steps = 8;             // K
    int dim = 16;              // embedding dimension
    double noise_scale = 0.05; // per-step isotropic noise, in units of step size
    std::uint64_t seed = 0;

    void validate() const;  // steps >= 3, dim >= 2, noise_scale >= 0
};

// One synthetic trajectory realizing the requested error shape:
//   stable — fixed unit direction plus noise;
//   drift  — per-step direction follows a random walk on the sphere;
//   leap   — stable with one inserted jump of 10x the step size;
//   loop   — steps alternate between two anchors.
// Deterministic given params. The label field records the kind.
Trajectory gen_synthetic(const GeneratorParams& params);

struct CorpusParams {
    int per_class = 500;
    int steps = 8;
    int dim = 16;
    double noise_scale = 0.05;
    std::uint64_t seed = 0;
};

// per_class trajectories of each kind (stable, drift, leap, loop), labeled,
// with per-trajectory derived seeds and ids "<label>-<index>".
std::vector<Trajectory> gen_corpus(const CorpusParams& params);

}  // namespace starpo
