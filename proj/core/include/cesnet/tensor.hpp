#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cesnet/ingest.hpp"
#include "cesnet/labeled_matrix.hpp"

namespace cesnet {

/// Dense third-order tensor, first index fastest in memory.
class Tensor3 {
public:
    using Dims = std::array<std::size_t, 3>;

    Tensor3() = default;
    explicit Tensor3(Dims dims) : dims_(dims), data_(dims[0] * dims[1] * dims[2], 0.0) {}

    const Dims& dims() const { return dims_; }
    std::size_t dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode - 1)); }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }
    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    double norm() const;

private:
    Dims dims_{0, 0, 0};
    std::vector<double> data_;
};

/// Mode-n unfolding (n in 1..3). Columns run over the remaining indices in
/// cyclic order, earlier one fastest: mode 1 -> (j, k), mode 2 -> (k, i),
/// mode 3 -> (i, j). For a 2x2x2 tensor holding 1..8 in memory order the
/// mode-1 unfolding is [[1,3,5,7],[2,4,6,8]].
Eigen::MatrixXd unfold(const Tensor3& x, int mode);
Tensor3 refold(const Eigen::MatrixXd& m, int mode, const Tensor3::Dims& dims);

/// n-mode product X x_n M, with M of shape (J, I_n).
Tensor3 mode_product(const Tensor3& x, const Eigen::MatrixXd& m, int mode);

/// Feature x activity x day counts with axis labels.
struct CesTensor {
    Tensor3 values;
    std::vector<std::string> features;
    std::vector<std::string> activities;
    std::vector<std::string> days;  // ISO dates
};

struct TensorPrep {
    /// Subtract each (feature, activity) cell's mean over days.
    bool center = false;
    /// Divide each day slice by its total (zero days stay zero).
    bool normalize_days = false;
};

CesTensor make_tensor(const DailyCounts& counts, const TensorPrep& prep = {});

struct HosvdResult {
    Tensor3 core;
    /// U1 (features), U2 (activities), U3 (days); orthonormal columns.
    std::array<Eigen::MatrixXd, 3> factors;
    /// Frobenius norms of core slices along each mode, non-increasing.
    std::array<Eigen::VectorXd, 3> singular_values;
    /// Set for an all-zero input: factors are identity, core is zero.
    bool degenerate = false;
};

/// Higher-order SVD. U_n holds the left singular vectors of the mode-n
/// unfolding, each column signed so its largest-magnitude entry is positive.
/// With `ranks`, factors and core are truncated to the leading columns.
/// Throws NumericalError on non-finite input.
HosvdResult hosvd(const Tensor3& x, std::optional<Tensor3::Dims> ranks = std::nullopt);

/// core x1 U1 x2 U2 x3 U3.
Tensor3 reconstruct(const HosvdResult& r);

/// Outer product of the first columns of factors `mode_a` and `mode_b`.
LabeledMatrix leading_outer_product(const HosvdResult& r, const std::array<std::vector<std::string>, 3>& labels,
                                    int mode_a, int mode_b);

}  // namespace cesnet
