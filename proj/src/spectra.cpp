#include "scred/spectra.hpp"

#include "scred/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace scred {

bool EigenSolution::any_degenerate() const {
    return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
}

double gershgorin_norm(const SparseMatrix& m) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

void normalize_phases(Eigen::MatrixXcd& vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        auto col = vectors.col(j);
        double best = col.cwiseAbs().maxCoeff();
        Eigen::Index idx = 0;
        for (Eigen::Index i = 0; i < col.size(); ++i)
            if (std::abs(col(i)) >= best * (1.0 - 1e-12)) {
                idx = i;
                break;
            }
        if (best > 0) col *= std::conj(col(idx)) / std::abs(col(idx));
    }
}

namespace {

void finish(EigenSolution& s, const SparseMatrix* sparse, const Eigen::MatrixXcd* dense, double next_value) {
    normalize_phases(s.vectors);
    const Eigen::Index k = s.values.size();
    Eigen::MatrixXcd hv = sparse ? Eigen::MatrixXcd(*sparse * s.vectors) : Eigen::MatrixXcd(*dense * s.vectors);
    s.residuals.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) s.residuals(j) = (hv.col(j) - s.values(j) * s.vectors.col(j)).norm();
    s.degenerate.assign(static_cast<std::size_t>(k), false);
    const double gap = 1e-10 * std::max(s.norm_estimate, 1e-300);
    for (Eigen::Index j = 0; j + 1 < k; ++j)
        if (s.values(j + 1) - s.values(j) <= gap) s.degenerate[j] = s.degenerate[j + 1] = true;
    if (k > 0 && std::isfinite(next_value) && next_value - s.values(k - 1) <= gap) s.degenerate[k - 1] = true;
}

class BlockLanczos {
public:
    BlockLanczos(const SparseMatrix& a, int k, const SolverOptions& opts)
        : a_(a), n_(a.rows()), k_(k), opts_(opts), rng_(opts.seed) {
        p_ = opts.block_size > 0 ? opts.block_size : std::min(k, 8);
        p_ = static_cast<int>(std::min<Eigen::Index>(p_, std::max<Eigen::Index>(1, n_ / 4)));
        m_ = static_cast<int>(std::min<Eigen::Index>(n_, 2 * k + 4 * p_ + 10));
        m_ -= (m_ - p_) % p_;
        q_ = std::max(k, std::min(m_ - 2 * p_, k + (m_ - k) / 2));
        if (q_ + p_ > m_) throw UnsupportedError("problem too small for the iterative solver");
        norm_ = gershgorin_norm(a);
    }

    EigenSolution run() {
        V_.resize(n_, m_);
        AV_.resize(n_, m_);
        Eigen::MatrixXcd start(n_, p_);
        start.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n_)));
        for (int j = 1; j < p_; ++j) start.col(j) = random_vector();
        int cur = 0;
        append(start, cur);
        const double target = opts_.tolerance * norm_;
        for (int restart = 0;; ++restart) {
            while (cur + p_ <= m_) {
                Eigen::MatrixXcd next = AV_.middleCols(cur - p_, p_);
                append(next, cur);
            }
            Eigen::MatrixXcd t = V_.leftCols(cur).adjoint() * AV_.leftCols(cur);
            t = 0.5 * (t + t.adjoint()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t);
            Eigen::MatrixXcd s = es.eigenvectors().leftCols(q_);
            Eigen::MatrixXcd y = V_.leftCols(cur) * s;
            Eigen::MatrixXcd ay = AV_.leftCols(cur) * s;
            std::vector<double> res(static_cast<std::size_t>(k_));
            bool done = true;
            for (int j = 0; j < k_; ++j) {
                res[j] = (ay.col(j) - es.eigenvalues()(j) * y.col(j)).norm();
                if (res[j] > target) done = false;
            }
            if (done) {
                EigenSolution out;
                out.values = es.eigenvalues().head(k_);
                out.vectors = y.leftCols(k_);
                out.norm_estimate = norm_;
                out.tolerance = opts_.tolerance;
                out.iterations = restart;
                out.dense = false;
                finish(out, &a_, nullptr, es.eigenvalues()(k_));
                return out;
            }
            if (restart >= opts_.max_restarts)
                throw ConvergenceError("Lanczos did not converge after " + std::to_string(restart) + " restarts", res);
            Eigen::MatrixXcd f = AV_.middleCols(cur - p_, p_);
            orthogonalize(f, cur);
            V_.leftCols(q_) = y;
            AV_.leftCols(q_) = ay;
            cur = q_;
            place(f, cur);
        }
    }

private:
    Eigen::VectorXcd random_vector() {
        std::normal_distribution<double> g;
        Eigen::VectorXcd v(n_);
        for (Eigen::Index i = 0; i < n_; ++i) v(i) = g(rng_);
        return v;
    }

    // Orthonormalizes block columns against V[:, :cur] and each other, replacing lost directions.
    void orthogonalize(Eigen::MatrixXcd& b, int cur) {
        for (int j = 0; j < b.cols(); ++j) {
            for (int attempt = 0;; ++attempt) {
                double before = b.col(j).norm();
                for (int pass = 0; pass < 2; ++pass) {
                    if (cur > 0) b.col(j) -= V_.leftCols(cur) * (V_.leftCols(cur).adjoint() * b.col(j));
                    if (j > 0) b.col(j) -= b.leftCols(j) * (b.leftCols(j).adjoint() * b.col(j));
                }
                double after = b.col(j).norm();
                if (after > 1e-10 * std::max(before, 1e-300) && after > 0) {
                    b.col(j) /= after;
                    break;
                }
                if (attempt > 5) throw NumericError("could not extend the Krylov basis");
                b.col(j) = random_vector();
            }
        }
    }

    void place(const Eigen::MatrixXcd& b, int& cur) {
        V_.middleCols(cur, b.cols()) = b;
        AV_.middleCols(cur, b.cols()) = a_ * b;
        cur += static_cast<int>(b.cols());
    }

    void append(Eigen::MatrixXcd& b, int& cur) {
        orthogonalize(b, cur);
        place(b, cur);
    }

    const SparseMatrix& a_;
    Eigen::Index n_;
    int k_, p_ = 1, m_ = 0, q_ = 0;
    SolverOptions opts_;
    std::mt19937_64 rng_;
    double norm_ = 0.0;
    Eigen::MatrixXcd V_, AV_;
};

}  // namespace

EigenSolution dense_eigenpairs(const Eigen::MatrixXcd& h, int k) {
    if (k < 1 || k > h.rows()) throw UnsupportedError("requested " + std::to_string(k) + " eigenpairs of a " +
                                                      std::to_string(h.rows()) + "-dimensional matrix");
    Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    EigenSolution out;
    out.values = es.eigenvalues().head(k);
    out.vectors = es.eigenvectors().leftCols(k);
    out.norm_estimate = herm.cwiseAbs().rowwise().sum().maxCoeff();
    out.tolerance = 0.0;
    out.dense = true;
    double next = k < h.rows() ? es.eigenvalues()(k) : std::numeric_limits<double>::infinity();
    finish(out, nullptr, &herm, next);
    return out;
}

EigenSolution lowest_eigenpairs(const SparseMatrix& h, int k, const SolverOptions& opts) {
    if (k < 1 || k >= h.rows())
        throw UnsupportedError("requested " + std::to_string(k) + " eigenpairs; need 1 <= k < dimension " +
                               std::to_string(h.rows()));
    if (h.rows() <= opts.dense_threshold) {
        auto out = dense_eigenpairs(Eigen::MatrixXcd(h), k);
        out.tolerance = opts.tolerance;
        return out;
    }
    return BlockLanczos(h, k, opts).run();
}

EigenSolution lowest_eigenpairs(const OperatorMatrix& h, int k, const SolverOptions& opts) {
    return lowest_eigenpairs(h.matrix(), k, opts);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

ConvergenceTable convergence_study(const std::function<OperatorMatrix(const std::vector<int>&)>& build,
                                   const std::vector<std::vector<int>>& schedule, int k, double tolerance,
                                   const SolverOptions& opts, int workers) {
    ConvergenceTable table;
    table.tolerance = tolerance;
    table.rows.resize(schedule.size());
    parallel_for(schedule.size(), workers, [&](std::size_t r) {
        auto& row = table.rows[r];
        row.truncations = schedule[r];
        auto t0 = std::chrono::steady_clock::now();
        try {
            OperatorMatrix h = build(schedule[r]);
            row.dimension = h.dimension();
            auto sol = lowest_eigenpairs(h, k, opts);
            row.eigenvalues = sol.values;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    table.converged_at.assign(static_cast<std::size_t>(k), -1);
    if (table.rows.empty() || !table.rows.back().ok) return table;
    const auto& final_values = table.rows.back().eigenvalues;
    for (int j = 0; j < k; ++j) {
        int first = static_cast<int>(table.rows.size()) - 1;
        for (int r = first - 1; r >= 0; --r) {
            const auto& row = table.rows[r];
            if (!row.ok || row.eigenvalues.size() <= j) break;
            double ref = final_values(j);
            if (std::abs(row.eigenvalues(j) - ref) > tolerance * std::abs(ref)) break;
            first = r;
        }
        table.converged_at[j] = first;
    }
    return table;
}

}  // namespace scred
