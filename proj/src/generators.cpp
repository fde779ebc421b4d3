#include "starpo/generators.hpp"

#include <cmath>

namespace starpo {

namespace {

constexpr double kLeapMagnitude = 10.0;  // jump size relative to the base step
constexpr double kDriftWalk = 0.7;       // direction random-walk step size

Vector random_normal_vector(Rng& rng, int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    return v;
}

Vector random_unit_vector(Rng& rng, int dim) {
    while (true) {
        Vector v = random_normal_vector(rng, dim);
        const double norm = v.norm();
        if (norm > 1e-12) return v / norm;
    }
}

}  // namespace

void GeneratorParams::validate() const {
    if (steps < 3) raise(Errc::invalid_params, "generator needs at least 3 steps");
    if (dim < 2) raise(Errc::invalid_params, "generator needs dimension at least 2");
    if (noise_scale < 0.0) raise(Errc::invalid_params, "noise_scale must be non-negative");
}

Trajectory gen_synthetic(const GeneratorParams& params) {
    params.validate();
    Rng rng(derive_seed(params.seed, 0x9e1u, static_cast<std::uint64_t>(params.kind)));

    const int K = params.steps;
    const int d = params.dim;
    Matrix steps(K, d);

    switch (params.kind) {
        case ErrorLabel::None: {
            const Vector u = random_unit_vector(rng, d);
            Vector h = Vector::Zero(d);
            steps.row(0) = h.transpose();
            for (int k = 1; k < K; ++k) {
                h += u + params.noise_scale * random_normal_vector(rng, d);
                steps.row(k) = h.transpose();
            }
            break;
        }
        case ErrorLabel::SemanticDrift: {
            Vector w = random_unit_vector(rng, d);
            Vector h = Vector::Zero(d);
            steps.row(0) = h.transpose();
            for (int k = 1; k < K; ++k) {
                w += kDriftWalk * random_normal_vector(rng, d);
                const double norm = w.norm();
                if (norm > 1e-12) w /= norm;
                h += w + params.noise_scale * random_normal_vector(rng, d);
                steps.row(k) = h.transpose();
            }
            break;
        }
        case ErrorLabel::LogicalLeap: {
            const Vector u = random_unit_vector(rng, d);
            const Vector jump = kLeapMagnitude * random_unit_vector(rng, d);
            // delta index in [2, K-2] so the jump sits between two normal steps
            const int jump_at =
                2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(
                        K >= 5 ? K - 4 + 1 : 1)));
            Vector h = Vector::Zero(d);
            steps.row(0) = h.transpose();
            for (int k = 1; k < K; ++k) {
                if (k == jump_at)
                    h += jump;
                else
                    h += u + params.noise_scale * random_normal_vector(rng, d);
                steps.row(k) = h.transpose();
            }
            break;
        }
        case ErrorLabel::RepetitionLoop: {
            const Vector anchor_a = random_normal_vector(rng, d);
            const Vector anchor_b = anchor_a + random_unit_vector(rng, d);
            for (int k = 0; k < K; ++k) {
                const Vector& anchor = k % 2 == 0 ? anchor_a : anchor_b;
                steps.row(k) =
                    (anchor + params.noise_scale * random_normal_vector(rng, d)).transpose();
            }
            break;
        }
    }

    Trajectory traj;
    traj.id = std::string(label_to_string(params.kind)) + "-seed" + std::to_string(params.seed);
    traj.steps = std::move(steps);
    traj.label = params.kind;
    traj.validate();
    return traj;
}

std::vector<Trajectory> gen_corpus(const CorpusParams& params) {
    if (params.per_class < 1) raise(Errc::invalid_params, "per_class must be at least 1");

    static constexpr ErrorLabel kKinds[] = {ErrorLabel::None, ErrorLabel::SemanticDrift,
                                            ErrorLabel::LogicalLeap, ErrorLabel::RepetitionLoop};
    std::vector<Trajectory> corpus;
    corpus.reserve(static_cast<std::size_t>(params.per_class) * 4);
    for (std::size_t c = 0; c < 4; ++c) {
        for (int i = 0; i < params.per_class; ++i) {
            GeneratorParams gp;
            gp.kind = kKinds[c];
            gp.steps = params.steps;
            gp.dim = params.dim;
            gp.noise_scale = params.noise_scale;
            gp.seed = derive_seed(params.seed, c, static_cast<std::uint64_t>(i));
            Trajectory traj = gen_synthetic(gp);
            traj.id = std::string(label_to_string(gp.kind)) + "-" + std::to_string(i);
            corpus.push_back(std::move(traj));
        }
    }
    return corpus;
}

}  // namespace starpo
