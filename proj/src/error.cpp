#include "starpo/error.hpp"

namespace starpo {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::empty_input: return "EmptyInput";
        case Errc::empty_step: return "EmptyStep";
        case Errc::dim_mismatch: return "DimMismatch";
        case Errc::parse_error: return "ParseError";
        case Errc::invalid_trajectory: return "InvalidTrajectory";
        case Errc::io_error: return "IoError";
        case Errc::too_short: return "TooShort";
        case Errc::too_few_deltas: return "TooFewDeltas";
        case Errc::insufficient_sample: return "InsufficientSample";
        case Errc::invalid_log_prob: return "InvalidLogProb";
        case Errc::shape_mismatch: return "ShapeMismatch";
        case Errc::divergence: return "DivergenceError";
        case Errc::invalid_puzzle: return "InvalidPuzzle";
        case Errc::illegal_action: return "IllegalAction";
        case Errc::not_terminal: return "NotTerminal";
        case Errc::dead_end: return "DeadEnd";
        case Errc::invalid_params: return "InvalidParams";
        case Errc::degenerate_test: return "DegenerateTest";
        case Errc::empty_study: return "EmptyStudy";
        case Errc::schema_error: return "SchemaError";
        case Errc::invalid_config: return "InvalidConfig";
    }
    return "UnknownError";
}

}  // namespace starpo
