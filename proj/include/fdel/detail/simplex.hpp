#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace fdel::detail {

/// Dense two-phase tableau simplex with Bland's rule:
/// max c'x subject to A x = b, x >= 0, with b >= 0.
/// Returns nullopt when the constraints are infeasible and +inf when unbounded.
class DenseSimplex {
public:
    DenseSimplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double eps = 1e-11)
        : m_(a.rows()), n_(a.cols()), eps_(eps), tab_(m_ + 1, n_ + m_ + 1), basis_(static_cast<std::size_t>(m_)) {
        tab_.setZero();
        tab_.topLeftCorner(m_, n_) = a;
        tab_.block(0, n_, m_, m_).setIdentity();
        tab_.col(n_ + m_).head(m_) = b;
        for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
    }

    [[nodiscard]] std::optional<double> maximize(const Eigen::VectorXd& c) {
        // Phase 1: minimize the sum of artificials.
        tab_.row(m_).setZero();
        for (Eigen::Index i = 0; i < m_; ++i) {
            tab_.row(m_).head(n_) -= tab_.row(i).head(n_);
            tab_(m_, n_ + m_) -= tab_(i, n_ + m_);
        }
        if (!run(n_)) return std::nullopt;
        if (-tab_(m_, n_ + m_) > eps_ * static_cast<double>(m_ + 1)) return std::nullopt;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < n_) continue;
            for (Eigen::Index j = 0; j < n_; ++j)
                if (std::abs(tab_(i, j)) > eps_) {
                    pivot(i, j);
                    break;
                }
        }

        // Phase 2: reduced costs of min -c'x.
        tab_.row(m_).setZero();
        tab_.row(m_).head(n_) = -c.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index bj = basis_[static_cast<std::size_t>(i)];
            const double cb = bj < n_ ? -c[bj] : 0.0;
            if (cb != 0.0) tab_.row(m_) -= cb * tab_.row(i);
        }
        if (!run(n_)) return std::numeric_limits<double>::infinity();
        return tab_(m_, n_ + m_);
    }

private:
    void pivot(Eigen::Index row, Eigen::Index col) {
        tab_.row(row) /= tab_(row, col);
        for (Eigen::Index i = 0; i <= m_; ++i)
            if (i != row && tab_(i, col) != 0.0) tab_.row(i) -= tab_(i, col) * tab_.row(row);
        basis_[static_cast<std::size_t>(row)] = col;
    }

    /// Minimize over columns [0, allowed); false when unbounded.
    bool run(Eigen::Index allowed) {
        const Eigen::Index rhs = n_ + m_;
        const long cap = 50 * (m_ + n_ + 1);
        for (long it = 0; it < cap; ++it) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed; ++j)
                if (tab_(m_, j) < -eps_) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (tab_(i, enter) <= eps_) continue;
                const double ratio = tab_(i, rhs) / tab_(i, enter);
                if (ratio < best - eps_ ||
                    (ratio <= best + eps_ && leave >= 0 &&
                     basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    if (ratio < best) best = ratio;
                    leave = i;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        return true;
    }

    Eigen::Index m_, n_;
    double eps_;
    Eigen::MatrixXd tab_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace fdel::detail
