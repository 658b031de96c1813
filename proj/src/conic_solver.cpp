#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kurnet/conic.hpp"

namespace kurnet::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepScale = 0.99;
constexpr double kKktReg = 1e-10;

const double kSqrt2 = std::sqrt(2.0);

/// Layout of the stacked cone vector: LP slice first, then one scaled-svec
/// slice per PSD block. svec ordering is column-major lower triangle with
/// sqrt(2) on off-diagonal entries, so plain dot products equal trace
/// inner products.
struct ConeLayout {
    int lp = 0;
    std::vector<int> dims;
    std::vector<int> offs;  // offsets of each PSD slice
    int total = 0;
    double degree = 0.0;
};

int svec_len(int p) { return p * (p + 1) / 2; }

void smat(const double* v, Eigen::MatrixXd& M) {
    const int p = static_cast<int>(M.rows());
    int k = 0;
    for (int j = 0; j < p; ++j)
        for (int i = j; i < p; ++i, ++k) {
            const double x = (i == j) ? v[k] : v[k] / kSqrt2;
            M(i, j) = x;
            M(j, i) = x;
        }
}

void svec(const Eigen::MatrixXd& M, double* v) {
    const int p = static_cast<int>(M.rows());
    int k = 0;
    for (int j = 0; j < p; ++j)
        for (int i = j; i < p; ++i, ++k) v[k] = (i == j) ? M(i, j) : kSqrt2 * M(i, j);
}

/// Nesterov-Todd scaling point for the LP slice and each PSD block.
struct Scaling {
    Eigen::VectorXd d;                  // LP: W = diag(d)
    Eigen::VectorXd lambda_lp;          // sqrt(s z)
    std::vector<Eigen::MatrixXd> R;     // per block
    std::vector<Eigen::MatrixXd> Rinv;
    std::vector<Eigen::VectorXd> sigma; // scaled point eigenvalues
};

class SdpCones {
  public:
    explicit SdpCones(ConeLayout layout) : lay_(std::move(layout)) {}

    const ConeLayout& layout() const { return lay_; }

    bool compute_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z, Scaling& W) const {
        W.d.resize(lay_.lp);
        W.lambda_lp.resize(lay_.lp);
        for (int i = 0; i < lay_.lp; ++i) {
            if (s(i) <= 0.0 || z(i) <= 0.0) return false;
            W.d(i) = std::sqrt(s(i) / z(i));
            W.lambda_lp(i) = std::sqrt(s(i) * z(i));
        }
        const int nb = static_cast<int>(lay_.dims.size());
        W.R.assign(nb, {});
        W.Rinv.assign(nb, {});
        W.sigma.assign(nb, {});
        for (int bidx = 0; bidx < nb; ++bidx) {
            const int p = lay_.dims[bidx];
            Eigen::MatrixXd S(p, p), Z(p, p);
            smat(s.data() + lay_.offs[bidx], S);
            smat(z.data() + lay_.offs[bidx], Z);
            Eigen::LLT<Eigen::MatrixXd> ls(S), lz(Z);
            if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
            const Eigen::MatrixXd Ls = ls.matrixL();
            const Eigen::MatrixXd Lz = lz.matrixL();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls,
                                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
            const Eigen::VectorXd sig = svd.singularValues();
            if (sig.minCoeff() <= 0.0) return false;
            const Eigen::VectorXd isqrt = sig.array().sqrt().inverse().matrix();
            W.R[bidx] = Ls * svd.matrixV() * isqrt.asDiagonal();
            W.Rinv[bidx] = isqrt.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
            W.sigma[bidx] = sig;
        }
        return true;
    }

    // W u  = (d .* u,  svec(R^T U R))
    Eigen::VectorXd apply_W(const Scaling& W, const Eigen::VectorXd& u) const {
        return transform(u, [&](int b, const Eigen::MatrixXd& U) -> Eigen::MatrixXd {
            return W.R[b].transpose() * U * W.R[b];
        }, W.d, false);
    }
    // W^{-T} u = (u ./ d, svec(R^{-1} U R^{-T}))
    Eigen::VectorXd apply_WinvT(const Scaling& W, const Eigen::VectorXd& u) const {
        return transform(u, [&](int b, const Eigen::MatrixXd& U) -> Eigen::MatrixXd {
            return W.Rinv[b] * U * W.Rinv[b].transpose();
        }, W.d, true);
    }
    // W^T u = (d .* u, svec(R U R^T))
    Eigen::VectorXd apply_WT(const Scaling& W, const Eigen::VectorXd& u) const {
        return transform(u, [&](int b, const Eigen::MatrixXd& U) -> Eigen::MatrixXd {
            return W.R[b] * U * W.R[b].transpose();
        }, W.d, false);
    }
    // W^{-1} u = (u ./ d, svec(R^{-T} U R^{-1}))
    Eigen::VectorXd apply_Winv(const Scaling& W, const Eigen::VectorXd& u) const {
        return transform(u, [&](int b, const Eigen::MatrixXd& U) -> Eigen::MatrixXd {
            return W.Rinv[b].transpose() * U * W.Rinv[b];
        }, W.d, true);
    }

    /// Symmetrized product u o v in scaled coordinates.
    Eigen::VectorXd jordan_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(lay_.total);
        out.head(lay_.lp) = u.head(lay_.lp).cwiseProduct(v.head(lay_.lp));
        for (std::size_t b = 0; b < lay_.dims.size(); ++b) {
            const int p = lay_.dims[b];
            Eigen::MatrixXd U(p, p), V(p, p);
            smat(u.data() + lay_.offs[b], U);
            smat(v.data() + lay_.offs[b], V);
            const Eigen::MatrixXd P = 0.5 * (U * V + V * U);
            svec(P, out.data() + lay_.offs[b]);
        }
        return out;
    }

    /// Solves lambda o x = dvec where lambda is the scaled point (diagonal
    /// per PSD block).
    Eigen::VectorXd jordan_solve(const Scaling& W, const Eigen::VectorXd& dvec) const {
        Eigen::VectorXd out(lay_.total);
        out.head(lay_.lp) = dvec.head(lay_.lp).cwiseQuotient(W.lambda_lp);
        for (std::size_t b = 0; b < lay_.dims.size(); ++b) {
            const int p = lay_.dims[b];
            Eigen::MatrixXd D(p, p);
            smat(dvec.data() + lay_.offs[b], D);
            Eigen::MatrixXd X(p, p);
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j)
                    X(i, j) = 2.0 * D(i, j) / (W.sigma[b](i) + W.sigma[b](j));
            svec(X, out.data() + lay_.offs[b]);
        }
        return out;
    }

    Eigen::VectorXd identity() const {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(lay_.total);
        e.head(lay_.lp).setOnes();
        for (std::size_t b = 0; b < lay_.dims.size(); ++b) {
            const int p = lay_.dims[b];
            int k = 0;
            for (int j = 0; j < p; ++j)
                for (int i = j; i < p; ++i, ++k)
                    if (i == j) e(lay_.offs[b] + k) = 1.0;
        }
        return e;
    }

    Eigen::VectorXd lambda_vec(const Scaling& W) const {
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(lay_.total);
        lam.head(lay_.lp) = W.lambda_lp;
        for (std::size_t b = 0; b < lay_.dims.size(); ++b) {
            const int p = lay_.dims[b];
            int k = 0;
            for (int j = 0; j < p; ++j)
                for (int i = j; i < p; ++i, ++k)
                    if (i == j) lam(lay_.offs[b] + k) = W.sigma[b](i);
        }
        return lam;
    }

    /// max t >= 0 with ref + alpha * dir in the cone iff alpha <= 1/t.
    /// ref is the scaled point lambda (sigma diagonal per block) or, when
    /// W is null, an explicit cone point.
    double max_step(const Eigen::VectorXd& dir, const Scaling* W,
                    const Eigen::VectorXd* ref) const {
        double t = 0.0;
        for (int i = 0; i < lay_.lp; ++i) {
            const double base = W ? W->lambda_lp(i) : (*ref)(i);
            t = std::max(t, -dir(i) / base);
        }
        for (std::size_t b = 0; b < lay_.dims.size(); ++b) {
            const int p = lay_.dims[b];
            Eigen::MatrixXd D(p, p);
            smat(dir.data() + lay_.offs[b], D);
            Eigen::MatrixXd Mref(p, p);
            if (W) {
                Mref = W->sigma[b].asDiagonal();
            } else {
                smat(ref->data() + lay_.offs[b], Mref);
            }
            Eigen::LLT<Eigen::MatrixXd> llt(Mref);
            if (llt.info() != Eigen::Success) return kInf;
            const Eigen::MatrixXd L = llt.matrixL();
            Eigen::MatrixXd T = L.triangularView<Eigen::Lower>().solve(D);
            T = L.triangularView<Eigen::Lower>().solve(T.transpose().eval());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                0.5 * (T + T.transpose().eval()), Eigen::EigenvaluesOnly);
            t = std::max(t, -es.eigenvalues().minCoeff());
        }
        return t;
    }

    /// Shift a point into the interior of the cone: x += (1 + t) e when it
    /// is not safely positive (t = -min eigenvalue).
    void shift_interior(Eigen::VectorXd& x) const {
        double t = -kInf;
        for (int i = 0; i < lay_.lp; ++i) t = std::max(t, -x(i));
        for (std::size_t b = 0; b < lay_.dims.size(); ++b) {
            const int p = lay_.dims[b];
            Eigen::MatrixXd M(p, p);
            smat(x.data() + lay_.offs[b], M);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
            t = std::max(t, -es.eigenvalues().minCoeff());
        }
        if (lay_.total == 0) return;
        if (t >= -1e-8 * std::max(1.0, x.norm())) {
            x += (1.0 + t) * identity();
        }
    }

  private:
    template <typename BlockFn>
    Eigen::VectorXd transform(const Eigen::VectorXd& u, BlockFn&& fn,
                              const Eigen::VectorXd& d, bool inverse) const {
        Eigen::VectorXd out(lay_.total);
        if (inverse)
            out.head(lay_.lp) = u.head(lay_.lp).cwiseQuotient(d);
        else
            out.head(lay_.lp) = u.head(lay_.lp).cwiseProduct(d);
        for (std::size_t b = 0; b < lay_.dims.size(); ++b) {
            const int p = lay_.dims[b];
            Eigen::MatrixXd U(p, p);
            smat(u.data() + lay_.offs[b], U);
            Eigen::MatrixXd V = fn(static_cast<int>(b), U);
            V = 0.5 * (V + V.transpose().eval());
            svec(V, out.data() + lay_.offs[b]);
        }
        return out;
    }

    ConeLayout lay_;
};

}  // namespace

/// Converts the declarative Program into stacked standard form
///   min c^T x  s.t.  A x = b,  G x + s = h,  s in (LP x PSD) cone
/// and runs the self-dual-embedding predictor-corrector iteration.
class SolverImpl {
  public:
    SolverImpl(const Program& prog, const SolveOptions& opt)
        : opt_(opt), cones_(build_layout(prog)) {
        nx_ = prog.variable_count();
        neq_ = prog.equality_count();
        const ConeLayout& lay = cones_.layout();

        c_ = Eigen::VectorXd::Zero(nx_);
        for (const auto& [v, coef] : prog.objective_) c_(v) += coef;

        b_ = Eigen::VectorXd::Zero(neq_);
        std::vector<Eigen::Triplet<double>> ta;
        for (int r = 0; r < neq_; ++r) {
            b_(r) = prog.eq_rhs_[r];
            for (const auto& [v, coef] : prog.eq_rows_[r]) ta.emplace_back(r, v, coef);
        }
        A_.resize(neq_, nx_);
        A_.setFromTriplets(ta.begin(), ta.end());

        h_ = Eigen::VectorXd::Zero(lay.total);
        std::vector<Eigen::Triplet<double>> tg;
        for (int r = 0; r < lay.lp; ++r) {
            h_(r) = prog.ineq_rhs_[r];
            for (const auto& [v, coef] : prog.ineq_rows_[r]) tg.emplace_back(r, v, coef);
        }
        // PSD blocks: s_b = svec(C_b + sum_i x_i A_{bi}) so G rows carry
        // -svec(A_{bi}) and h carries svec(C_b).
        for (const auto& t : prog.psd_terms_) {
            const int p = lay.dims[t.block];
            const int off = lay.offs[t.block];
            const int i = std::max(t.row, t.col);
            const int j = std::min(t.row, t.col);
            const int k = off + svec_index(p, i, j);
            const double scale = (i == j) ? 1.0 : kSqrt2;
            if (t.var >= 0)
                tg.emplace_back(k, t.var, -scale * t.coeff);
            else
                h_(k) += scale * t.coeff;
        }
        G_.resize(lay.total, nx_);
        G_.setFromTriplets(tg.begin(), tg.end());
        Gt_ = G_.transpose();
        At_ = A_.transpose();
    }

    Solution run();

  private:
    static int svec_index(int p, int i, int j) {
        // column-major lower triangle, i >= j
        return j * p - j * (j - 1) / 2 + (i - j);
    }

    static ConeLayout build_layout(const Program& prog) {
        ConeLayout lay;
        lay.lp = prog.inequality_count();
        int off = lay.lp;
        lay.degree = lay.lp;
        for (int b = 0; b < prog.psd_block_count(); ++b) {
            const int p = prog.psd_dim(b);
            lay.dims.push_back(p);
            lay.offs.push_back(off);
            off += svec_len(p);
            lay.degree += p;
        }
        lay.total = off;
        if (lay.total == 0)
            throw std::invalid_argument("conic::solve: program has no conic constraints");
        return lay;
    }

    void build_kkt(const Scaling& W);
    bool factor_kkt();
    // Solves [0 A^T G^T; A 0 0; G 0 -W^T W] (ux,uy,uz) = (bx,by,bz).
    void solve_kkt(const Scaling& W, const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                   const Eigen::VectorXd& bz, Eigen::VectorXd& ux, Eigen::VectorXd& uy,
                   Eigen::VectorXd& uz);

    SolveOptions opt_;
    SdpCones cones_;
    int nx_ = 0, neq_ = 0;
    Eigen::VectorXd c_, b_, h_;
    Eigen::SparseMatrix<double> G_, Gt_, A_, At_;

    Eigen::SparseMatrix<double> H_;  // G^T W^{-1} W^{-T} G
    Eigen::SparseMatrix<double> K_;  // [[H + dI, A^T], [A, -dI]]
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool kkt_analyzed_ = false;
};

void SolverImpl::build_kkt(const Scaling& W) {
    const ConeLayout& lay = cones_.layout();
    std::vector<Eigen::Triplet<double>> th;
    th.reserve(G_.nonZeros() * 4);

    // LP slice: H += sum_r (1/d_r^2) g_r g_r^T, accumulated row-wise.
    {
        Eigen::SparseMatrix<double, Eigen::RowMajor> Grow(G_);
        for (int r = 0; r < lay.lp; ++r) {
            const double w2 = 1.0 / (W.d(r) * W.d(r));
            std::vector<std::pair<int, double>> row;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Grow, r); it;
                 ++it)
                row.emplace_back(static_cast<int>(it.col()), it.value());
            for (const auto& [ci, vi] : row)
                for (const auto& [cj, vj] : row) th.emplace_back(ci, cj, w2 * vi * vj);
        }
    }

    // PSD blocks: scale the active columns and take pairwise inner products.
    for (std::size_t bidx = 0; bidx < lay.dims.size(); ++bidx) {
        const int p = lay.dims[bidx];
        const int off = lay.offs[bidx];
        const int len = svec_len(p);
        // active variables in this block
        std::vector<int> active;
        std::vector<Eigen::VectorXd> cols;
        for (int v = 0; v < nx_; ++v) {
            bool touches = false;
            for (Eigen::SparseMatrix<double>::InnerIterator it(G_, v); it; ++it) {
                if (it.row() >= off && it.row() < off + len) {
                    touches = true;
                    break;
                }
            }
            if (!touches) continue;
            Eigen::VectorXd col = Eigen::VectorXd::Zero(len);
            for (Eigen::SparseMatrix<double>::InnerIterator it(G_, v); it; ++it)
                if (it.row() >= off && it.row() < off + len) col(it.row() - off) = it.value();
            Eigen::MatrixXd M(p, p);
            smat(col.data(), M);
            Eigen::MatrixXd scaled = W.Rinv[bidx] * M * W.Rinv[bidx].transpose();
            scaled = 0.5 * (scaled + scaled.transpose().eval());
            Eigen::VectorXd sv(len);
            svec(scaled, sv.data());
            active.push_back(v);
            cols.push_back(std::move(sv));
        }
        const int na = static_cast<int>(active.size());
        if (na == 0) continue;
        Eigen::MatrixXd S(len, na);
        for (int k = 0; k < na; ++k) S.col(k) = cols[k];
        Eigen::MatrixXd Hb = S.transpose() * S;
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < na; ++j) th.emplace_back(active[i], active[j], Hb(i, j));
    }

    H_.resize(nx_, nx_);
    H_.setFromTriplets(th.begin(), th.end());

    // Quasidefinite augmented system with static regularization.
    std::vector<Eigen::Triplet<double>> tk;
    tk.reserve(H_.nonZeros() + 2 * A_.nonZeros() + nx_ + neq_);
    for (int v = 0; v < nx_; ++v)
        for (Eigen::SparseMatrix<double>::InnerIterator it(H_, v); it; ++it)
            tk.emplace_back(static_cast<int>(it.row()), v, it.value());
    for (int v = 0; v < nx_; ++v) tk.emplace_back(v, v, kKktReg);
    for (int v = 0; v < nx_; ++v)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A_, v); it; ++it) {
            tk.emplace_back(nx_ + static_cast<int>(it.row()), v, it.value());
            tk.emplace_back(v, nx_ + static_cast<int>(it.row()), it.value());
        }
    for (int r = 0; r < neq_; ++r) tk.emplace_back(nx_ + r, nx_ + r, -kKktReg);
    K_.resize(nx_ + neq_, nx_ + neq_);
    K_.setFromTriplets(tk.begin(), tk.end());
}

bool SolverImpl::factor_kkt() {
    if (!kkt_analyzed_) {
        lu_.analyzePattern(K_);
        kkt_analyzed_ = true;
    }
    lu_.factorize(K_);
    return lu_.info() == Eigen::Success;
}

void SolverImpl::solve_kkt(const Scaling& W, const Eigen::VectorXd& bx,
                           const Eigen::VectorXd& by, const Eigen::VectorXd& bz,
                           Eigen::VectorXd& ux, Eigen::VectorXd& uy, Eigen::VectorXd& uz) {
    // Reduce: [[H, A^T],[A, 0]] (ux, uy) = (bx + G^T W^{-1} W^{-T} bz, by)
    const Eigen::VectorXd wz = cones_.apply_Winv(W, cones_.apply_WinvT(W, bz));
    Eigen::VectorXd rhs(nx_ + neq_);
    rhs.head(nx_) = bx + Gt_ * wz;
    rhs.tail(neq_) = by;

    Eigen::VectorXd u = lu_.solve(rhs);
    // Iterative refinement against the unregularized system.
    for (int it = 0; it < 4; ++it) {
        Eigen::VectorXd resid(nx_ + neq_);
        resid.head(nx_) = rhs.head(nx_) - H_ * u.head(nx_) - At_ * u.tail(neq_);
        resid.tail(neq_) = rhs.tail(neq_) - A_ * u.head(nx_);
        if (resid.norm() <= 1e-14 * std::max(1.0, rhs.norm())) break;
        u += lu_.solve(resid);
    }
    ux = u.head(nx_);
    uy = u.tail(neq_);
    uz = cones_.apply_Winv(W, cones_.apply_WinvT(W, G_ * ux - bz));
}

Solution SolverImpl::run() {
    const ConeLayout& lay = cones_.layout();
    Solution sol;
    std::ostringstream log;

    // --- Initial point: least-squares KKT solves with identity scaling.
    Scaling Wid;
    Wid.d = Eigen::VectorXd::Ones(lay.lp);
    Wid.lambda_lp = Eigen::VectorXd::Ones(lay.lp);
    for (int p : lay.dims) {
        Wid.R.push_back(Eigen::MatrixXd::Identity(p, p));
        Wid.Rinv.push_back(Eigen::MatrixXd::Identity(p, p));
        Wid.sigma.push_back(Eigen::VectorXd::Ones(p));
    }
    build_kkt(Wid);
    if (!factor_kkt()) {
        sol.log = "initial KKT factorization failed";
        return sol;
    }
    Eigen::VectorXd x(nx_), y(neq_), zt(lay.total);
    solve_kkt(Wid, Eigen::VectorXd::Zero(nx_), b_, h_, x, y, zt);
    Eigen::VectorXd s = h_ - G_ * x;
    cones_.shift_interior(s);

    Eigen::VectorXd xd(nx_), z(lay.total);
    solve_kkt(Wid, -c_, Eigen::VectorXd::Zero(neq_), Eigen::VectorXd::Zero(lay.total), xd, y, z);
    cones_.shift_interior(z);

    double tau = 1.0, kappa = 1.0;

    Scaling W;
    const double bnorm = std::max(1.0, b_.norm());
    const double hnorm = std::max(1.0, h_.norm());
    const double cnorm = std::max(1.0, c_.norm());

    // Best certificate rays seen so far, for the same fallback treatment.
    struct BestRay {
        double res = std::numeric_limits<double>::infinity();
        Eigen::VectorXd v1, v2;
        int iter = 0;
    } best_inf, best_unb;

    // Best iterate seen so far; the final fallback when the iteration
    // stalls just above the target tolerances or breaks down numerically.
    struct Best {
        double merit = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x, y, z;
        double tau = 1.0;
        double pres = 1.0, dres = 1.0, relgap = 1.0, pcost = 0.0;
        int iter = 0;
    } best;

    auto fill_optimal = [&](const Best& it) {
        sol.status = Status::Optimal;
        sol.x = it.x / it.tau;
        sol.eq_duals = it.y / it.tau;
        sol.ineq_duals = (it.z / it.tau).head(lay.lp);
        sol.psd_duals.clear();
        for (std::size_t bidx = 0; bidx < lay.dims.size(); ++bidx) {
            Eigen::MatrixXd Zb(lay.dims[bidx], lay.dims[bidx]);
            Eigen::VectorXd zb =
                it.z.segment(lay.offs[bidx], svec_len(lay.dims[bidx])) / it.tau;
            smat(zb.data(), Zb);
            sol.psd_duals.push_back(Zb);
        }
        sol.objective = it.pcost;
        sol.rel_gap = it.relgap;
        sol.primal_residual = it.pres;
        sol.dual_residual = it.dres;
        sol.iterations = it.iter;
        sol.log = log.str();
    };

    int iter = 0;
    for (; iter < opt_.max_iterations; ++iter) {
        // Residuals of the self-dual embedding.
        const Eigen::VectorXd rx = At_ * y + Gt_ * z + c_ * tau;
        const Eigen::VectorXd ry = A_ * x - b_ * tau;
        const Eigen::VectorXd rz = G_ * x + s - h_ * tau;
        const double rtau = kappa + c_.dot(x) + b_.dot(y) + h_.dot(z);
        const double gap = s.dot(z);

        const double pcost = c_.dot(x) / tau;
        const double dcost = -(b_.dot(y) + h_.dot(z)) / tau;
        const double true_gap = gap / (tau * tau);
        const double relgap = true_gap / std::max(1.0, std::abs(pcost));
        const double pres = std::max(ry.norm() / bnorm, rz.norm() / hnorm) / tau;
        const double dres = rx.norm() / cnorm / tau;

        {
            log << "it " << iter << " pcost " << pcost << " dcost " << dcost << " gap "
                << true_gap << " pres " << pres << " dres " << dres << " tau " << tau
                << " kappa " << kappa << "\n";
        }

        if (!std::isfinite(gap) || !std::isfinite(pres) || !std::isfinite(dres)) break;

        const double merit = std::max({pres / opt_.feas_tol, dres / opt_.feas_tol,
                                       relgap / opt_.gap_tol});
        if (merit < best.merit) {
            best = {merit, x, y, z, tau, pres, dres, relgap, pcost, iter};
        }

        if (pres <= opt_.feas_tol && dres <= opt_.feas_tol && relgap <= opt_.gap_tol) {
            fill_optimal(best);
            return sol;
        }

        // No measurable progress for a while: the iterate is rattling on the
        // attainable accuracy floor, so stop and use the fallback below.
        if (iter - std::max({best.iter, best_inf.iter, best_unb.iter}) >= 10) {
            log << "stalled\n";
            break;
        }

        // Infeasibility certificates.
        const double dual_obj_ray = -(b_.dot(y) + h_.dot(z));
        if (dual_obj_ray > 0.0) {
            const double pinfres = (At_ * y + Gt_ * z).norm() / cnorm / dual_obj_ray;
            if (pinfres < best_inf.res)
                best_inf = {pinfres, y / dual_obj_ray, z / dual_obj_ray, iter};
            if (pinfres <= opt_.feas_tol) {
                sol.status = Status::Infeasible;
                sol.eq_duals = y / dual_obj_ray;
                sol.ineq_duals = (z / dual_obj_ray).head(lay.lp);
                sol.iterations = iter;
                sol.log = log.str();
                return sol;
            }
        }
        if (c_.dot(x) < 0.0) {
            const double scale = -c_.dot(x);
            const double dinfres =
                std::max((A_ * x).norm() / bnorm, (G_ * x + s).norm() / hnorm) / scale;
            if (dinfres < best_unb.res) best_unb = {dinfres, x / scale, {}, iter};
            if (dinfres <= opt_.feas_tol) {
                sol.status = Status::Unbounded;
                sol.x = x / scale;
                sol.iterations = iter;
                sol.log = log.str();
                return sol;
            }
        }

        // NT scaling and KKT factorization.
        if (!cones_.compute_scaling(s, z, W)) {
            log << "scaling failed (iterate left the cone)\n";
            break;
        }
        build_kkt(W);
        if (!factor_kkt()) {
            log << "KKT factorization failed\n";
            break;
        }
        const Eigen::VectorXd lambda = cones_.lambda_vec(W);
        const double mu = (gap + tau * kappa) / (lay.degree + 1.0);

        Eigen::VectorXd x1(nx_), y1(neq_), z1(lay.total);
        solve_kkt(W, -c_, b_, h_, x1, y1, z1);
        const double denom_base = c_.dot(x1) + b_.dot(y1) + h_.dot(z1) - kappa / tau;

        auto direction = [&](const Eigen::VectorXd& dlam, double dkappa, double resid_scale,
                             Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz,
                             Eigen::VectorXd& ds, double& dtau, double& dkap) -> bool {
            const Eigen::VectorXd lam_inv_d = cones_.jordan_solve(W, dlam);
            const Eigen::VectorXd btz =
                -resid_scale * rz - cones_.apply_WT(W, lam_inv_d);
            Eigen::VectorXd u0x(nx_), u0y(neq_), u0z(lay.total);
            solve_kkt(W, -resid_scale * rx, -resid_scale * ry, btz, u0x, u0y, u0z);
            const double num = -resid_scale * rtau - dkappa / tau -
                               (c_.dot(u0x) + b_.dot(u0y) + h_.dot(u0z));
            if (std::abs(denom_base) < 1e-14) return false;
            dtau = num / denom_base;
            dx = u0x + dtau * x1;
            dy = u0y + dtau * y1;
            dz = u0z + dtau * z1;
            ds = cones_.apply_WT(W, lam_inv_d - cones_.apply_W(W, dz));
            dkap = (dkappa - kappa * dtau) / tau;
            return true;
        };

        // Affine (predictor) direction.
        Eigen::VectorXd dxa, dya, dza, dsa;
        double dtaua = 0.0, dkapa = 0.0;
        const Eigen::VectorXd lam_sq = cones_.jordan_product(lambda, lambda);
        if (!direction(-lam_sq, -tau * kappa, 1.0, dxa, dya, dza, dsa, dtaua, dkapa)) {
            log << "singular embedding system\n";
            break;
        }

        const Eigen::VectorXd rho_s_a = cones_.apply_WinvT(W, dsa);
        const Eigen::VectorXd rho_z_a = cones_.apply_W(W, dza);
        double t = std::max(cones_.max_step(rho_s_a, &W, nullptr),
                            cones_.max_step(rho_z_a, &W, nullptr));
        if (dtaua < 0.0) t = std::max(t, -dtaua / tau);
        if (dkapa < 0.0) t = std::max(t, -dkapa / kappa);
        const double alpha_aff = t > 0.0 ? std::min(1.0, 1.0 / t) : 1.0;

        const double mu_aff =
            ((lambda + alpha_aff * rho_s_a).dot(lambda + alpha_aff * rho_z_a) +
             (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkapa)) /
            (lay.degree + 1.0);
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

        // Combined (corrector) direction.
        const Eigen::VectorXd e = cones_.identity();
        const Eigen::VectorXd dlam = -lam_sq - cones_.jordan_product(rho_s_a, rho_z_a) +
                                     sigma * mu * e;
        const double dkappa_rhs = -tau * kappa - dtaua * dkapa + sigma * mu;
        Eigen::VectorXd dx, dy, dz, ds;
        double dtau = 0.0, dkap = 0.0;
        if (!direction(dlam, dkappa_rhs, 1.0 - sigma, dx, dy, dz, ds, dtau, dkap)) {
            log << "singular embedding system (corrector)\n";
            break;
        }

        const Eigen::VectorXd rho_s = cones_.apply_WinvT(W, ds);
        const Eigen::VectorXd rho_z = cones_.apply_W(W, dz);
        t = std::max(cones_.max_step(rho_s, &W, nullptr), cones_.max_step(rho_z, &W, nullptr));
        if (dtau < 0.0) t = std::max(t, -dtau / tau);
        if (dkap < 0.0) t = std::max(t, -dkap / kappa);
        const double alpha = t > 0.0 ? std::min(1.0, kStepScale / t) : 1.0;
        if (alpha < 1e-13) {
            log << "step collapsed\n";
            break;
        }

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkap;
    }

    // Reduced-accuracy fallback: accept the best iterate or certificate when
    // it sits within two decades of the requested tolerances (the iteration
    // hit its accuracy floor). Prefer whichever came closest to its target.
    const double opt_merit = best.merit;
    const double inf_merit = best_inf.res / opt_.feas_tol;
    const double unb_merit = best_unb.res / opt_.feas_tol;
    if (opt_merit <= 100.0 && opt_merit <= inf_merit && opt_merit <= unb_merit) {
        log << "accepting reduced-accuracy iterate from it " << best.iter << "\n";
        fill_optimal(best);
        return sol;
    }
    if (inf_merit <= 100.0 && inf_merit <= unb_merit) {
        log << "accepting reduced-accuracy infeasibility ray from it " << best_inf.iter
            << "\n";
        sol.status = Status::Infeasible;
        sol.eq_duals = best_inf.v1;
        sol.ineq_duals = best_inf.v2.head(lay.lp);
        sol.iterations = iter;
        sol.log = log.str();
        return sol;
    }
    if (unb_merit <= 100.0) {
        log << "accepting reduced-accuracy unboundedness ray from it " << best_unb.iter
            << "\n";
        sol.status = Status::Unbounded;
        sol.x = best_unb.v1;
        sol.iterations = iter;
        sol.log = log.str();
        return sol;
    }

    sol.status = Status::NumericalFailure;
    sol.iterations = iter;
    sol.x = x / tau;
    sol.eq_duals = y / tau;
    sol.ineq_duals = (z / tau).head(lay.lp);
    sol.objective = c_.dot(x) / tau;
    sol.log = log.str();
    return sol;
}

Solution solve(const Program& program, const SolveOptions& options) {
    SolverImpl impl(program, options);
    return impl.run();
}

}  // namespace kurnet::conic
