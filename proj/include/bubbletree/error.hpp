#pragma once

#include <stdexcept>
#include <string>

namespace bubbletree {

/// Default tolerance for every classification and verification inequality.
inline constexpr double kDefaultTolerance = 1e-9;

enum class Errc {
    invalid_input,
    constraint_violation,
    polar_node,
    assumption_violation,
    rectangularity_required,
    not_risk_neutral,
    arbitrage,
    cap_exceeded,
    infeasible,
    unbounded,
};

const char* to_string(Errc code);

/// Exit status used by the command line tool for an error category:
/// 1 input/schema, 2 arbitrage where no-arbitrage was required, 3 solver/cap.
int exit_code(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace bubbletree
