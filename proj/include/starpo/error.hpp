#pragma once

#include <stdexcept>
#include <string>

namespace starpo {

// Error identities used across the library. Tests match on the code, so
// every distinct failure mode gets its own entry.
enum class Errc {
    empty_input,
    empty_step,
    dim_mismatch,
    parse_error,
    invalid_trajectory,
    io_error,
    too_short,
    too_few_deltas,
    insufficient_sample,
    invalid_log_prob,
    shape_mismatch,
    divergence,
    invalid_puzzle,
    illegal_action,
    not_terminal,
    dead_end,
    invalid_params,
    degenerate_test,
    empty_study,
    schema_error,
    invalid_config,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace starpo
