#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace bubbletree::lp {

enum class Sense { le, ge, eq };
enum class Status { optimal, infeasible, unbounded };

struct Row {
    std::vector<double> coeffs;  // dense, one entry per variable
    Sense sense = Sense::le;
    double rhs = 0.0;
};

/// Dense linear program: optimize c.x subject to rows, lower <= x <= upper.
/// A lower bound of -inf marks a free variable.
struct Problem {
    std::vector<double> objective;
    std::vector<Row> rows;
    std::vector<double> lower;  // defaults to 0 when empty
    std::vector<double> upper;  // defaults to +inf when empty
    bool maximize = false;

    explicit Problem(std::size_t vars = 0) : objective(vars, 0.0) {}
    std::size_t vars() const { return objective.size(); }
    Row& add_row(Sense sense, double rhs);
};

struct Result {
    Status status = Status::infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Two-phase primal simplex on a dense tableau with Bland's rule, so the
/// pivot sequence (and thus the returned basic solution) is deterministic.
Result solve(const Problem& problem, double feasibility_tol = 1e-8);

}  // namespace bubbletree::lp
