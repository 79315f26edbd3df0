#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/rational.hpp>

namespace oracle {

namespace {

using Rational = boost::rational<std::int64_t>;

// Sum over ordered pairs (i, j) of lines with total_i > total_j of the
// decreasing-fill share of line j.
Rational paired(const std::vector<std::vector<int>>& lines, std::int64_t& pairs) {
    Rational sum = 0;
    const std::size_t n = lines.size();
    pairs += static_cast<std::int64_t>(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            int ti = std::accumulate(lines[i].begin(), lines[i].end(), 0);
            int tj = std::accumulate(lines[j].begin(), lines[j].end(), 0);
            if (!(ti > tj)) continue;
            int fill = 0, below = 0;
            for (std::size_t k = 0; k < lines[j].size(); ++k) {
                if (lines[j][k] > 0) ++fill;
                if (lines[j][k] > 0 && lines[j][k] < lines[i][k]) ++below;
            }
            if (fill > 0) sum += Rational(100 * below, fill);
        }
    return sum;
}

}  // namespace

double wnodf(const Eigen::MatrixXi& w) {
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(w.rows())), cols(static_cast<std::size_t>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            rows[static_cast<std::size_t>(r)].push_back(w(r, c));
            cols[static_cast<std::size_t>(c)].push_back(w(r, c));
        }
    std::int64_t pairs = 0;
    Rational total = paired(rows, pairs) + paired(cols, pairs);
    if (pairs == 0) return 0.0;
    Rational v = total / Rational(pairs) / Rational(100);
    return static_cast<double>(v.numerator()) / static_cast<double>(v.denominator());
}

double modularity(const Eigen::MatrixXd& w, const std::vector<int>& rows, const std::vector<int>& cols) {
    const double m = w.sum();
    double q = 0.0;
    for (Eigen::Index f = 0; f < w.rows(); ++f)
        for (Eigen::Index a = 0; a < w.cols(); ++a)
            if (rows[static_cast<std::size_t>(f)] == cols[static_cast<std::size_t>(a)])
                q += w(f, a) - w.row(f).sum() * w.col(a).sum() / m;
    return q / m;
}

Partition best_modularity(const Eigen::MatrixXd& w) {
    const auto F = static_cast<std::size_t>(w.rows());
    const std::size_t n = F + static_cast<std::size_t>(w.cols());
    std::vector<int> label(n, 0);
    Partition best;
    best.q = -1e300;
    // restricted growth strings: node i takes a used label or the next new one
    auto visit = [&](auto&& self, std::size_t i, int used) -> void {
        if (i == n) {
            std::vector<int> rows(label.begin(), label.begin() + static_cast<std::ptrdiff_t>(F));
            std::vector<int> cols(label.begin() + static_cast<std::ptrdiff_t>(F), label.end());
            double q = modularity(w, rows, cols);
            if (q > best.q) best = {q, rows, cols};
            return;
        }
        for (int l = 0; l <= used; ++l) {
            label[i] = l;
            self(self, i + 1, std::max(used, l + 1));
        }
    };
    visit(visit, 0, 0);
    return best;
}

double connectance(const Eigen::MatrixXd& w) {
    const double m = w.sum();
    auto diversity_mass = [](const Eigen::VectorXd& line) {
        double t = line.sum();
        if (t <= 0) return 0.0;
        double h = 0;
        for (Eigen::Index i = 0; i < line.size(); ++i)
            if (line(i) > 0) h -= line(i) / t * std::log2(line(i) / t);
        return t * std::exp2(h);
    };
    double ld = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r) ld += diversity_mass(w.row(r).transpose());
    for (Eigen::Index c = 0; c < w.cols(); ++c) ld += diversity_mass(w.col(c));
    ld /= 2.0 * m;
    return ld / static_cast<double>(w.rows() + w.cols());
}

std::complex<double> morlet_direct(const std::vector<double>& x, double scale, std::size_t n, double omega0) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::complex<double> sum = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        double eta = (static_cast<double>(k) - static_cast<double>(n)) / scale;
        std::complex<double> psi = std::pow(std::numbers::pi, -0.25) * std::exp(std::complex<double>(0, omega0 * eta)) *
                                   std::exp(-0.5 * eta * eta);
        sum += (x[k] - mean) * std::conj(psi);
    }
    return sum / std::sqrt(scale);
}

}  // namespace oracle
