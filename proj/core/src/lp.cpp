#include "czvar/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "czvar/common.hpp"

namespace czvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tableau {
    Eigen::MatrixXd m;            // B⁻¹[A | I]
    std::vector<int> basis;       // variable index per row
    Eigen::VectorXd xb;           // basic values
    std::vector<bool> at_upper;   // nonbasic state
    std::vector<bool> is_basic;
    Eigen::VectorXd upper;
};

// Minimizes cost over the current tableau. Returns false if unbounded.
bool run(Tableau& t, const Eigen::VectorXd& cost, double tol, int& iterations) {
    const int rows = int(t.m.rows()), cols = int(t.m.cols());
    for (int guard = 0; guard < 100000; ++guard) {
        Eigen::VectorXd cb(rows);
        for (int i = 0; i < rows; ++i) cb(i) = cost(t.basis[i]);
        int enter = -1;
        for (int j = 0; j < cols && enter < 0; ++j) {
            if (t.is_basic[j]) continue;
            const double d = cost(j) - cb.dot(t.m.col(j));
            if (!t.at_upper[j] && d < -tol && t.upper(j) > 0) enter = j;
            if (t.at_upper[j] && d > tol) enter = j;
        }
        if (enter < 0) return true;
        ++iterations;
        const double dir = t.at_upper[enter] ? -1.0 : 1.0;
        // Ratio test; ties broken by the smallest variable index (Bland).
        double theta = t.upper(enter);
        int leave_row = -1, leave_var = enter;
        bool leave_to_upper = false;
        for (int i = 0; i < rows; ++i) {
            const double delta = dir * t.m(i, enter);
            double lim;
            bool to_upper = false;
            if (delta > tol) {
                lim = std::max(0.0, t.xb(i)) / delta;
            } else if (delta < -tol && std::isfinite(t.upper(t.basis[i]))) {
                lim = std::max(0.0, t.upper(t.basis[i]) - t.xb(i)) / -delta;
                to_upper = true;
            } else {
                continue;
            }
            const bool better = lim < theta - tol || (lim <= theta + tol && t.basis[i] < leave_var);
            if (better) {
                theta = lim;
                leave_row = i;
                leave_var = t.basis[i];
                leave_to_upper = to_upper;
            }
        }
        if (!std::isfinite(theta)) return false;
        t.xb -= theta * dir * t.m.col(enter);
        if (leave_row < 0) {
            t.at_upper[enter] = !t.at_upper[enter];
            continue;
        }
        const double start = t.at_upper[enter] ? t.upper(enter) : 0.0;
        const int leaving = t.basis[leave_row];
        t.is_basic[leaving] = false;
        t.at_upper[leaving] = leave_to_upper;
        const double piv = t.m(leave_row, enter);
        t.m.row(leave_row) /= piv;
        for (int i = 0; i < rows; ++i)
            if (i != leave_row && t.m(i, enter) != 0) t.m.row(i) -= t.m(i, enter) * t.m.row(leave_row);
        t.basis[leave_row] = enter;
        t.is_basic[enter] = true;
        t.at_upper[enter] = false;
        t.xb(leave_row) = start + dir * theta;
    }
    throw DomainError("simplex iteration limit reached");
}

}  // namespace

LPResult solve_bounded_lp(const BoundedLP& lp, double tol) {
    const int rows = int(lp.a.rows()), n = int(lp.a.cols());
    if (lp.b.size() != rows || lp.c.size() != n || lp.upper.size() != n)
        throw InvalidArgument("inconsistent linear program dimensions");
    Tableau t;
    t.m.resize(rows, n + rows);
    t.m.leftCols(n) = lp.a;
    t.m.rightCols(rows).setIdentity();
    t.xb = lp.b;
    for (int i = 0; i < rows; ++i)
        if (t.xb(i) < 0) {
            t.m.row(i).head(n) *= -1;
            t.xb(i) *= -1;
        }
    t.upper.resize(n + rows);
    t.upper.head(n) = lp.upper;
    t.upper.tail(rows).setConstant(kInf);
    t.basis.resize(rows);
    t.is_basic.assign(n + rows, false);
    t.at_upper.assign(n + rows, false);
    for (int i = 0; i < rows; ++i) {
        t.basis[i] = n + i;
        t.is_basic[n + i] = true;
    }

    LPResult res;
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + rows);
    cost.tail(rows).setOnes();
    run(t, cost, tol, res.iterations);
    double infeas = 0;
    for (int i = 0; i < rows; ++i)
        if (t.basis[i] >= n) infeas += t.xb(i);
    const double scale = 1 + lp.b.cwiseAbs().sum();
    if (infeas > 1e3 * tol * scale) return res;

    t.upper.tail(rows).setZero();
    cost.setZero();
    cost.head(n) = -lp.c;
    if (!run(t, cost, tol, res.iterations)) {
        res.status = LPResult::Status::unbounded;
        return res;
    }
    res.x.resize(n);
    for (int j = 0; j < n; ++j) res.x(j) = t.at_upper[j] ? lp.upper(j) : 0.0;
    for (int i = 0; i < rows; ++i)
        if (t.basis[i] < n) res.x(t.basis[i]) = t.xb(i);
    res.value = lp.c.dot(res.x);
    res.status = LPResult::Status::optimal;
    return res;
}

}  // namespace czvar
