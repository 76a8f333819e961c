#ifndef TVFCGCG_COEFF_QP_HPP
#define TVFCGCG_COEFF_QP_HPP

// Fully-corrective coefficient update: minimize the reduced objective
//
//   f(lambda) = 1/(2 alpha) (lambda' G lambda - 2 b' lambda + |y_d|^2)
//               + sum_j pi_j lambda_j        s.t.  lambda_j >= 0
//
// over the active-set coefficients, with one optional free-sign entry (the
// coefficient of the whole domain, Per(Omega,Omega) = 0). A primal active-set
// method in the style of Lawson-Hanson NNLS: faces are solved exactly,
// blocking variables are set to zero exactly, and the entering variable is
// chosen Bland-style (lowest index) which rules out cycling. Reaches the same
// KKT points as a semismooth Newton method on the normal map reformulation.
//
// The outer solver terminates on dual gaps of 1e-10 while alpha is as small
// as 1e-4, so KKT residuals must be driven to 1e-11 in absolute terms. Face
// systems and gradients are therefore evaluated in extended precision.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tvfcgcg {

struct ReducedProblem {
    Eigen::MatrixXd gram;       // G_ij = (o_i, o_j)_M
    Eigen::VectorXd linear;     // b_j  = (o_j, y_d)_M
    Eigen::VectorXd perimeters; // pi_j
    double alpha = 1.0;
    double ydd = 0.0;           // |y_d|_M^2, constant part of the objective
    int free_sign_index = -1;   // unconstrained entry, never pruned

    int dim() const { return static_cast<int>(linear.size()); }
};

struct Coefficients {
    Eigen::VectorXd lambda;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool regularized = false;
    bool hit_iteration_cap = false;
};

inline double reduced_objective(const ReducedProblem& rp, const Eigen::VectorXd& lambda)
{
    return 0.5 / rp.alpha *
               (lambda.dot(rp.gram * lambda) - 2.0 * rp.linear.dot(lambda) + rp.ydd) +
           rp.perimeters.dot(lambda);
}

inline Eigen::VectorXd reduced_gradient(const ReducedProblem& rp, const Eigen::VectorXd& lambda)
{
    const int n = rp.dim();
    Eigen::VectorXd g(n);
    for (int j = 0; j < n; ++j) {
        long double acc = 0.0L;
        for (int k = 0; k < n; ++k)
            acc += static_cast<long double>(rp.gram(j, k)) * static_cast<long double>(lambda[k]);
        acc = (acc - static_cast<long double>(rp.linear[j])) / static_cast<long double>(rp.alpha);
        g[j] = static_cast<double>(acc + static_cast<long double>(rp.perimeters[j]));
    }
    return g;
}

namespace detail {

// Dense Cholesky in extended precision; regularizes on a nonpositive pivot.
class FaceSolver {
public:
    // Returns false if regularization was needed.
    bool factor(const std::vector<long double>& G, int m, long double reg)
    {
        m_ = m;
        L_ = G;
        if (try_factor()) return true;
        L_ = G;
        for (int i = 0; i < m_; ++i) L_[i * m_ + i] += reg;
        if (!try_factor())
            throw std::runtime_error("coefficient face system is not positive definite");
        return false;
    }

    std::vector<long double> solve(const std::vector<long double>& rhs) const
    {
        std::vector<long double> x(rhs);
        for (int i = 0; i < m_; ++i) {
            long double s = x[i];
            for (int k = 0; k < i; ++k) s -= L_[i * m_ + k] * x[k];
            x[i] = s / L_[i * m_ + i];
        }
        for (int i = m_ - 1; i >= 0; --i) {
            long double s = x[i];
            for (int k = i + 1; k < m_; ++k) s -= L_[k * m_ + i] * x[k];
            x[i] = s / L_[i * m_ + i];
        }
        return x;
    }

private:
    bool try_factor()
    {
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j <= i; ++j) {
                long double s = L_[i * m_ + j];
                for (int k = 0; k < j; ++k) s -= L_[i * m_ + k] * L_[j * m_ + k];
                if (i == j) {
                    if (!(s > 0.0L)) return false;
                    L_[i * m_ + i] = std::sqrt(s);
                } else {
                    L_[i * m_ + j] = s / L_[j * m_ + j];
                }
            }
        }
        return true;
    }

    std::vector<long double> L_;
    int m_ = 0;
};

} // namespace detail

inline Coefficients solve_coeffs(const ReducedProblem& rp, const Coefficients* warm = nullptr)
{
    const int n = rp.dim();
    if (rp.gram.rows() != n || rp.gram.cols() != n || rp.perimeters.size() != n)
        throw std::invalid_argument("reduced problem dimensions are inconsistent");

    Coefficients out;
    out.lambda = Eigen::VectorXd::Zero(n);
    if (n == 0) {
        out.objective = 0.5 / rp.alpha * rp.ydd;
        return out;
    }

    std::vector<char> free_set(n, 0);
    if (warm && warm->lambda.size() == n) {
        for (int j = 0; j < n; ++j) {
            if (warm->lambda[j] > 0.0) {
                out.lambda[j] = warm->lambda[j];
                free_set[j] = 1;
            }
        }
    }
    if (rp.free_sign_index >= 0) {
        free_set[rp.free_sign_index] = 1;
        if (warm && warm->lambda.size() == n)
            out.lambda[rp.free_sign_index] = warm->lambda[rp.free_sign_index];
    }

    const double kkt_tol = 1e-11;
    const int max_iter = 100 * n;

    // Solves the face system G_FF x = b_F - alpha pi_F in extended precision
    // with one refinement pass.
    detail::FaceSolver chol;
    auto solve_face = [&](const std::vector<int>& face) -> std::vector<long double> {
        const int m = static_cast<int>(face.size());
        std::vector<long double> G(static_cast<size_t>(m) * m);
        std::vector<long double> rhs(m);
        long double trace = 0.0L;
        for (int r = 0; r < m; ++r) {
            rhs[r] = static_cast<long double>(rp.linear[face[r]]) -
                     static_cast<long double>(rp.alpha) *
                         static_cast<long double>(rp.perimeters[face[r]]);
            for (int c = 0; c < m; ++c) G[r * m + c] = rp.gram(face[r], face[c]);
            trace += G[r * m + r];
        }
        long double reg = 1e-12L * std::max<long double>(trace, 1.0L) / m;
        if (!chol.factor(G, m, reg)) out.regularized = true;

        std::vector<long double> x = chol.solve(rhs);
        std::vector<long double> resid(m);
        for (int r = 0; r < m; ++r) {
            long double s = rhs[r];
            for (int c = 0; c < m; ++c) s -= G[r * m + c] * x[c];
            resid[r] = s;
        }
        std::vector<long double> corr = chol.solve(resid);
        for (int r = 0; r < m; ++r) x[r] += corr[r];
        return x;
    };

    int last_enter = -1;
    int repeat_enters = 0;
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        std::vector<int> face;
        for (int j = 0; j < n; ++j)
            if (free_set[j]) face.push_back(j);

        bool blocked = false;
        if (!face.empty()) {
            std::vector<long double> trial = solve_face(face);

            // Largest feasible step from the current point towards the face
            // optimum; constrained variables whose trial value is negative
            // limit the step to lambda_j / (lambda_j - trial_j).
            long double theta = 1.0L;
            std::vector<long double> step(face.size(), 2.0L);
            for (size_t r = 0; r < face.size(); ++r) {
                int j = face[r];
                if (j == rp.free_sign_index || trial[r] >= 0.0L) continue;
                long double cur = out.lambda[j];
                step[r] = cur <= 0.0L ? 0.0L : cur / (cur - trial[r]);
                theta = std::min(theta, step[r]);
            }
            if (theta < 1.0L) {
                for (size_t r = 0; r < face.size(); ++r) {
                    int j = face[r];
                    if (step[r] <= theta * (1.0L + 1e-15L)) {
                        // Blocking variable hits its bound: exact zero, leaves
                        // the face. Guarantees progress even from theta = 0.
                        out.lambda[j] = 0.0;
                        free_set[j] = 0;
                    } else {
                        long double moved =
                            out.lambda[j] + theta * (trial[r] - out.lambda[j]);
                        out.lambda[j] = static_cast<double>(moved);
                        if (j != rp.free_sign_index && out.lambda[j] < 0.0) out.lambda[j] = 0.0;
                    }
                }
                blocked = true;
            } else {
                for (size_t r = 0; r < face.size(); ++r)
                    out.lambda[face[r]] = static_cast<double>(trial[r]);
            }
        }
        if (blocked) continue;

        // Face is optimal; look for a bound variable with negative gradient.
        Eigen::VectorXd grad = reduced_gradient(rp, out.lambda);
        int enter = -1;
        for (int j = 0; j < n; ++j) {
            if (!free_set[j] && grad[j] < -kkt_tol) {
                enter = j; // Bland: lowest index
                break;
            }
        }
        if (enter < 0) {
            double res = 0.0;
            for (int j = 0; j < n; ++j) {
                if (free_set[j])
                    res = std::max(res, std::abs(grad[j]));
                else
                    res = std::max(res, std::max(0.0, -grad[j]));
            }
            out.kkt_residual = res;
            out.objective = reduced_objective(rp, out.lambda);
            return out;
        }
        // A variable that keeps re-entering while pinned at zero marks the
        // precision floor: stop and report the residual achieved.
        repeat_enters = (enter == last_enter && out.lambda[enter] == 0.0) ? repeat_enters + 1 : 0;
        last_enter = enter;
        if (repeat_enters >= 3) break;
        free_set[enter] = 1;
    }

    out.hit_iteration_cap = true;
    Eigen::VectorXd grad = reduced_gradient(rp, out.lambda);
    double res = 0.0;
    for (int j = 0; j < n; ++j) {
        if (free_set[j])
            res = std::max(res, std::abs(grad[j]));
        else
            res = std::max(res, std::max(0.0, -grad[j]));
    }
    out.kkt_residual = res;
    out.objective = reduced_objective(rp, out.lambda);
    return out;
}

// Indices with lambda == 0 exactly, never the free-sign entry. The caller
// removes the corresponding active-set entries.
inline std::vector<int> prune_indices(const ReducedProblem& rp, const Coefficients& coeffs)
{
    std::vector<int> drop;
    for (int j = 0; j < coeffs.lambda.size(); ++j)
        if (coeffs.lambda[j] == 0.0 && j != rp.free_sign_index) drop.push_back(j);
    return drop;
}

} // namespace tvfcgcg

#endif
