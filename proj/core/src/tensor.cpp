#include "cesnet/tensor.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cesnet/error.hpp"

namespace cesnet {

namespace {

using Index = Eigen::Index;

void check_mode(int mode) {
    if (mode < 1 || mode > 3) throw InputError(fmt::format("tensor mode must be 1, 2 or 3, got {}", mode));
}

Index ix(std::size_t i) { return static_cast<Index>(i); }

// Row and column of X(i,j,k) in the mode-n unfolding.
std::pair<std::size_t, std::size_t> unfold_pos(const Tensor3::Dims& d, int mode, std::size_t i, std::size_t j,
                                               std::size_t k) {
    switch (mode) {
        case 1: return {i, j + d[1] * k};
        case 2: return {j, k + d[2] * i};
        default: return {k, i + d[0] * j};
    }
}

// Orients each column so that its largest-magnitude entry is positive.
void fix_signs(Eigen::MatrixXd& u) {
    for (Index c = 0; c < u.cols(); ++c) {
        Index arg = 0;
        u.col(c).cwiseAbs().maxCoeff(&arg);
        if (u(arg, c) < 0) u.col(c) = -u.col(c);
    }
}

// All left singular vectors of `m` (rows x rows), ordered by decreasing
// singular value. Uses the eigendecomposition of the smaller Gram matrix;
// for tall matrices the leading vectors are completed to a full basis.
Eigen::MatrixXd left_singular_vectors(const Eigen::MatrixXd& m) {
    const Index rows = m.rows(), cols = m.cols();
    if (rows <= cols) {
        Eigen::MatrixXd gram = m * m.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
        return eig.eigenvectors().rowwise().reverse();
    }
    Eigen::MatrixXd gram = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    Eigen::VectorXd lambda = eig.eigenvalues().reverse();
    Eigen::MatrixXd v = eig.eigenvectors().rowwise().reverse();
    const double smax = std::sqrt(std::max(lambda(0), 0.0));
    Index rank = 0;
    while (rank < cols && std::sqrt(std::max(lambda(rank), 0.0)) > 1e-7 * smax) ++rank;

    Eigen::MatrixXd lead = m * v.leftCols(rank);
    for (Index c = 0; c < rank; ++c) lead.col(c) /= std::sqrt(lambda(c));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(lead);
    Eigen::MatrixXd q = qr.householderQ();
    for (Index c = 0; c < rank; ++c)
        if (q.col(c).dot(lead.col(c)) < 0) q.col(c) = -q.col(c);
    return q;
}

}  // namespace

double Tensor3::norm() const {
    return std::sqrt(std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0));
}

Eigen::MatrixXd unfold(const Tensor3& x, int mode) {
    check_mode(mode);
    const auto& d = x.dims();
    const std::size_t rows = x.dim(mode);
    Eigen::MatrixXd m(ix(rows), ix(rows == 0 ? 0 : x.size() / rows));
    for (std::size_t k = 0; k < d[2]; ++k)
        for (std::size_t j = 0; j < d[1]; ++j)
            for (std::size_t i = 0; i < d[0]; ++i) {
                auto [r, c] = unfold_pos(d, mode, i, j, k);
                m(ix(r), ix(c)) = x(i, j, k);
            }
    return m;
}

Tensor3 refold(const Eigen::MatrixXd& m, int mode, const Tensor3::Dims& d) {
    check_mode(mode);
    Tensor3 x(d);
    if (m.rows() != ix(x.dim(mode)) || static_cast<std::size_t>(m.size()) != x.size())
        throw InputError("matrix shape does not match the tensor dimensions for refolding");
    for (std::size_t k = 0; k < d[2]; ++k)
        for (std::size_t j = 0; j < d[1]; ++j)
            for (std::size_t i = 0; i < d[0]; ++i) {
                auto [r, c] = unfold_pos(d, mode, i, j, k);
                x(i, j, k) = m(ix(r), ix(c));
            }
    return x;
}

Tensor3 mode_product(const Tensor3& x, const Eigen::MatrixXd& m, int mode) {
    check_mode(mode);
    if (m.cols() != ix(x.dim(mode)))
        throw InputError(fmt::format("mode-{} product needs {} columns, got {}", mode, x.dim(mode), m.cols()));
    Tensor3::Dims d = x.dims();
    d[static_cast<std::size_t>(mode - 1)] = static_cast<std::size_t>(m.rows());
    return refold(m * unfold(x, mode), mode, d);
}

CesTensor make_tensor(const DailyCounts& counts, const TensorPrep& prep) {
    const std::size_t F = counts.n_features(), A = counts.n_activities(), D = counts.n_days();
    CesTensor t{Tensor3({F, A, D}), counts.features(), counts.activities(), {}};
    for (std::size_t d = 0; d < D; ++d) t.days.push_back(counts.window().at(d).iso());
    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t f = 0; f < F; ++f) t.values(f, a, d) = static_cast<double>(counts.at(f, a, d));
    if (prep.normalize_days) {
        for (std::size_t d = 0; d < D; ++d) {
            double total = 0;
            for (std::size_t a = 0; a < A; ++a)
                for (std::size_t f = 0; f < F; ++f) total += t.values(f, a, d);
            if (total > 0)
                for (std::size_t a = 0; a < A; ++a)
                    for (std::size_t f = 0; f < F; ++f) t.values(f, a, d) /= total;
        }
    }
    if (prep.center && D > 0) {
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t f = 0; f < F; ++f) {
                double mean = 0;
                for (std::size_t d = 0; d < D; ++d) mean += t.values(f, a, d);
                mean /= static_cast<double>(D);
                for (std::size_t d = 0; d < D; ++d) t.values(f, a, d) -= mean;
            }
    }
    return t;
}

HosvdResult hosvd(const Tensor3& x, std::optional<Tensor3::Dims> ranks) {
    for (double v : x.data())
        if (!std::isfinite(v)) throw NumericalError("tensor has non-finite entries");
    const auto& d = x.dims();
    Tensor3::Dims r = ranks.value_or(d);
    for (std::size_t n = 0; n < 3; ++n)
        if (r[n] == 0 || r[n] > d[n])
            throw InputError(fmt::format("rank {} for mode {} must lie in [1, {}]", r[n], n + 1, d[n]));

    HosvdResult out;
    out.degenerate = x.norm() == 0.0;
    for (int mode = 1; mode <= 3; ++mode) {
        const auto n = static_cast<std::size_t>(mode - 1);
        Eigen::MatrixXd u = out.degenerate ? Eigen::MatrixXd::Identity(ix(d[n]), ix(d[n]))
                                           : left_singular_vectors(unfold(x, mode));
        fix_signs(u);
        out.factors[n] = u.leftCols(ix(r[n]));
    }
    Tensor3 core = x;
    for (int mode = 1; mode <= 3; ++mode)
        core = mode_product(core, out.factors[static_cast<std::size_t>(mode - 1)].transpose(), mode);
    for (int mode = 1; mode <= 3; ++mode)
        out.singular_values[static_cast<std::size_t>(mode - 1)] = unfold(core, mode).rowwise().norm();
    out.core = std::move(core);
    return out;
}

Tensor3 reconstruct(const HosvdResult& r) {
    Tensor3 x = r.core;
    for (int mode = 1; mode <= 3; ++mode) x = mode_product(x, r.factors[static_cast<std::size_t>(mode - 1)], mode);
    return x;
}

LabeledMatrix leading_outer_product(const HosvdResult& r, const std::array<std::vector<std::string>, 3>& labels,
                                    int mode_a, int mode_b) {
    check_mode(mode_a);
    check_mode(mode_b);
    const auto& ua = r.factors[static_cast<std::size_t>(mode_a - 1)];
    const auto& ub = r.factors[static_cast<std::size_t>(mode_b - 1)];
    const auto& la = labels[static_cast<std::size_t>(mode_a - 1)];
    const auto& lb = labels[static_cast<std::size_t>(mode_b - 1)];
    if (la.size() != static_cast<std::size_t>(ua.rows()) || lb.size() != static_cast<std::size_t>(ub.rows()))
        throw InputError("label count does not match factor dimensions");
    static const char* names[] = {"feature", "activity", "date"};
    return {names[mode_a - 1], la, lb, ua.col(0) * ub.col(0).transpose()};
}

}  // namespace cesnet
