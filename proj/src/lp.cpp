#include "bubbletree/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bubbletree::lp {

Row& Problem::add_row(Sense sense, double rhs) {
    rows.push_back(Row{std::vector<double>(vars(), 0.0), sense, rhs});
    return rows.back();
}

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-11;

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), a_(rows * (cols + 1), 0.0), cost_(cols + 1, 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, n_); }
    double& cost(std::size_t c) { return cost_[c]; }
    double& value() { return cost_[n_]; }  // holds minus the objective
    std::size_t& basis(std::size_t r) { return basis_[r]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double p = at(pr, pc);
        for (std::size_t c = 0; c <= n_; ++c) at(pr, c) /= p;
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
        const double f = cost_[pc];
        if (f != 0.0) {
            for (std::size_t c = 0; c <= n_; ++c) cost_[c] -= f * at(pr, c);
            cost_[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    /// Minimizes the current cost row over columns [0, allowed). Returns
    /// false when unbounded.
    bool run(std::size_t allowed) {
        const std::size_t limit = 200000;
        for (std::size_t iter = 0; iter < limit; ++iter) {
            std::size_t enter = allowed;
            for (std::size_t c = 0; c < allowed; ++c) {
                if (cost_[c] < -kCostEps) {
                    enter = c;
                    break;
                }
            }
            if (enter == allowed) return true;
            std::size_t leave = m_;
            double best = 0.0;
            for (std::size_t r = 0; r < m_; ++r) {
                const double v = at(r, enter);
                if (v <= kPivotEps) continue;
                const double ratio = rhs(r) / v;
                if (leave == m_ || ratio < best - 1e-12 ||
                    (ratio <= best + 1e-12 && basis_[r] < basis_[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex iteration limit reached");
    }

private:
    std::size_t m_, n_;
    std::vector<double> a_;
    std::vector<double> cost_;
    std::vector<std::size_t> basis_;
};

}  // namespace

Result solve(const Problem& problem, double feasibility_tol) {
    const std::size_t n = problem.vars();
    auto lower = [&](std::size_t j) { return problem.lower.empty() ? 0.0 : problem.lower[j]; };
    auto upper = [&](std::size_t j) { return problem.upper.empty() ? kInf : problem.upper[j]; };

    // Standard variables: x_j = shift_j + y_pos - y_neg (y_neg only if free).
    std::vector<std::size_t> pos(n), neg(n, SIZE_MAX);
    std::vector<double> shift(n, 0.0);
    std::size_t ns = 0;
    for (std::size_t j = 0; j < n; ++j) {
        pos[j] = ns++;
        if (std::isinf(lower(j))) {
            neg[j] = ns++;
        } else {
            shift[j] = lower(j);
        }
    }

    struct StdRow {
        std::vector<double> coeffs;
        Sense sense;
        double rhs;
    };
    std::vector<StdRow> rows;
    auto push = [&](const std::vector<double>& coeffs, Sense sense, double rhs) {
        StdRow row{std::vector<double>(ns, 0.0), sense, rhs};
        for (std::size_t j = 0; j < n; ++j) {
            const double a = coeffs[j];
            if (a == 0.0) continue;
            row.coeffs[pos[j]] += a;
            if (neg[j] != SIZE_MAX) row.coeffs[neg[j]] -= a;
            row.rhs -= a * shift[j];
        }
        if (row.rhs < 0.0) {
            for (double& v : row.coeffs) v = -v;
            row.rhs = -row.rhs;
            if (row.sense == Sense::le) row.sense = Sense::ge;
            else if (row.sense == Sense::ge) row.sense = Sense::le;
        }
        rows.push_back(std::move(row));
    };
    for (const Row& row : problem.rows) {
        if (row.coeffs.size() != n) throw std::invalid_argument("lp row width mismatch");
        push(row.coeffs, row.sense, row.rhs);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isinf(upper(j))) continue;
        if (upper(j) < lower(j)) return Result{Status::infeasible, 0.0, {}};
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        push(e, Sense::le, upper(j));
    }

    const std::size_t m = rows.size();
    std::size_t slacks = 0, artificials = 0;
    for (const auto& row : rows) {
        if (row.sense != Sense::eq) ++slacks;
        if (row.sense != Sense::le) ++artificials;
    }
    const std::size_t real_cols = ns + slacks;
    Tableau tab(m, real_cols + artificials);
    std::size_t next_slack = ns, next_art = real_cols;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = rows[r];
        for (std::size_t c = 0; c < ns; ++c) tab.at(r, c) = row.coeffs[c];
        tab.rhs(r) = row.rhs;
        if (row.sense == Sense::le) {
            tab.at(r, next_slack) = 1.0;
            tab.basis(r) = next_slack++;
        } else {
            if (row.sense == Sense::ge) tab.at(r, next_slack++) = -1.0;
            tab.at(r, next_art) = 1.0;
            tab.basis(r) = next_art++;
            for (std::size_t c = 0; c <= tab.cols(); ++c) {
                if (c < real_cols || c == tab.cols()) tab.cost(c) -= tab.at(r, c);
            }
        }
    }

    if (artificials > 0) {
        tab.run(tab.cols());
        if (-tab.value() > feasibility_tol) return Result{Status::infeasible, 0.0, {}};
        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis(r) < real_cols) continue;
            for (std::size_t c = 0; c < real_cols; ++c) {
                if (std::abs(tab.at(r, c)) > 1e-9) {
                    tab.pivot(r, c);
                    break;
                }
            }
        }
    }

    // Phase two cost row.
    std::vector<double> c_std(real_cols, 0.0);
    const double sign = problem.maximize ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = sign * problem.objective[j];
        c_std[pos[j]] += c;
        if (neg[j] != SIZE_MAX) c_std[neg[j]] -= c;
    }
    for (std::size_t c = 0; c <= tab.cols(); ++c) tab.cost(c) = 0.0;
    for (std::size_t c = 0; c < real_cols; ++c) tab.cost(c) = c_std[c];
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t b = tab.basis(r);
        if (b >= real_cols || c_std[b] == 0.0) continue;
        const double f = c_std[b];
        for (std::size_t c = 0; c <= tab.cols(); ++c) tab.cost(c) -= f * tab.at(r, c);
    }
    if (!tab.run(real_cols)) return Result{Status::unbounded, 0.0, {}};

    std::vector<double> y(tab.cols(), 0.0);
    for (std::size_t r = 0; r < m; ++r) y[tab.basis(r)] = tab.rhs(r);
    Result result;
    result.status = Status::optimal;
    result.x.resize(n);
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double v = shift[j] + y[pos[j]];
        if (neg[j] != SIZE_MAX) v -= y[neg[j]];
        result.x[j] = v;
        obj += problem.objective[j] * v;
    }
    result.objective = obj;
    for (const Row& row : problem.rows) {
        double lhs = 0.0, scale = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            lhs += row.coeffs[j] * result.x[j];
            scale = std::max(scale, std::abs(row.coeffs[j] * result.x[j]));
        }
        const double excess = row.sense == Sense::le ? lhs - row.rhs
                              : row.sense == Sense::ge ? row.rhs - lhs
                                                       : std::abs(lhs - row.rhs);
        if (excess > 1e-7 * scale) throw std::runtime_error("simplex lost feasibility");
    }
    return result;
}

}  // namespace bubbletree::lp
