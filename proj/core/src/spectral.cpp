#include "cesnet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>
#include <fftw3.h>
#include <fmt/format.h>

#include "cesnet/error.hpp"
#include "cesnet/random.hpp"

namespace cesnet {

namespace {

using cd = std::complex<double>;
using std::numbers::pi;

// In-place complex DFT of a fixed length. Forward has sign -1; neither
// direction is normalized.
class Fft {
public:
    explicit Fft(std::size_t n)
        : n_(n), buf_(fftw_alloc_complex(n)) {
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    void forward(std::vector<cd>& v) { run(fwd_, v); }
    void backward(std::vector<cd>& v) { run(bwd_, v); }

private:
    void run(fftw_plan plan, std::vector<cd>& v) {
        std::copy(v.begin(), v.end(), reinterpret_cast<cd*>(buf_));
        fftw_execute(plan);
        std::copy_n(reinterpret_cast<const cd*>(buf_), n_, v.begin());
    }

    std::size_t n_;
    fftw_complex* buf_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Angular frequencies of an n-point DFT in the usual FFT ordering.
std::vector<double> angular_frequencies(std::size_t n, double dt) {
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) {
        double kk = k <= n / 2 ? static_cast<double>(k) : -static_cast<double>(n - k);
        w[k] = 2.0 * pi * kk / (static_cast<double>(n) * dt);
    }
    return w;
}

// Morlet daughter in Fourier space, normalized to unit energy at scale s.
double morlet_hat(double s, double w, double omega0, double dt) {
    if (w <= 0) return 0.0;
    double e = s * w - omega0;
    return std::sqrt(2.0 * pi * s / dt) * std::pow(pi, -0.25) * std::exp(-0.5 * e * e);
}

struct Grid {
    std::vector<double> scales;
    std::vector<double> periods;
    std::vector<double> coi;
};

Grid make_grid(std::size_t n, const WaveletParams& p) {
    if (p.omega0 <= 0 || p.s0 <= 0 || p.dj <= 0 || p.dt <= 0)
        throw InputError("wavelet parameters must be positive");
    const double factor = morlet_fourier_factor(p.omega0);
    int jmax = p.j_max;
    if (jmax < 0) {
        double ratio = (static_cast<double>(n) * p.dt / 2.0) / (factor * p.s0);
        jmax = ratio > 1 ? static_cast<int>(std::floor(std::log2(ratio) / p.dj + 1e-9)) : 0;
    }
    Grid g;
    for (int j = 0; j <= jmax; ++j) {
        double s = p.s0 * std::exp2(j * p.dj);
        g.scales.push_back(s);
        g.periods.push_back(factor * s);
    }
    // e-folding time sqrt(2) s, expressed as a period
    const double coi_factor = factor / std::sqrt(2.0);
    g.coi.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double edge = static_cast<double>(std::min(t, n - 1 - t));
        g.coi[t] = coi_factor * p.dt * std::max(edge, 1e-5);
    }
    return g;
}

struct Transformed {
    std::vector<double> x;
    double mean = 0;
    double variance = 0;
    double signal_variance = 0;
};

Transformed prepare(const TimeSeries& series, bool normalize) {
    const std::size_t n = series.size();
    if (n < 8) throw InputError(fmt::format("wavelet analysis needs at least 8 samples, got {}", n));
    for (double v : series.values)
        if (!std::isfinite(v)) throw InputError("series contains non-finite values");
    Transformed t;
    t.mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(n);
    t.x.resize(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        t.x[i] = series.values[i] - t.mean;
        ss += t.x[i] * t.x[i];
    }
    t.variance = ss / static_cast<double>(n - 1);
    t.signal_variance = t.variance;
    // relative test: a constant series leaves only rounding residue
    double scale = std::max(std::abs(t.mean), 1.0);
    if (t.variance <= 1e-28 * scale * scale) {
        std::fill(t.x.begin(), t.x.end(), 0.0);
        t.variance = 0;
        t.signal_variance = 0;
    } else if (normalize) {
        double sd = std::sqrt(t.variance);
        for (auto& v : t.x) v /= sd;
        t.signal_variance = 1.0;
    }
    return t;
}

Eigen::MatrixXcd transform(const std::vector<double>& x, const Grid& g, const WaveletParams& p) {
    const std::size_t n = x.size();
    // pad to twice the nearest power of two
    const std::size_t npad = std::size_t{1} << (static_cast<int>(std::floor(std::log2(static_cast<double>(n)) + 0.4999)) + 1);
    Fft fft(npad);
    std::vector<cd> xhat(npad, 0.0);
    std::copy(x.begin(), x.end(), xhat.begin());
    fft.forward(xhat);
    for (auto& v : xhat) v /= static_cast<double>(npad);

    const auto w = angular_frequencies(npad, p.dt);
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(g.scales.size()), static_cast<Eigen::Index>(n));
    std::vector<cd> buf(npad);
    for (std::size_t j = 0; j < g.scales.size(); ++j) {
        for (std::size_t k = 0; k < npad; ++k) buf[k] = xhat[k] * morlet_hat(g.scales[j], w[k], p.omega0, p.dt);
        fft.backward(buf);
        for (std::size_t t = 0; t < n; ++t) out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)) = buf[t];
    }
    return out;
}

double red_noise(double lag1, double period, double dt) {
    return (1.0 - lag1 * lag1) / (1.0 + lag1 * lag1 - 2.0 * lag1 * std::cos(2.0 * pi * dt / period));
}

}  // namespace

double morlet_fourier_factor(double omega0) {
    return 4.0 * pi / (omega0 + std::sqrt(2.0 + omega0 * omega0));
}

double morlet_reconstruction_factor(double omega0, double dj, double s0, double dt) {
    // Response to a unit delta, summed over scales up to the record length.
    const std::size_t n = 1 << 14;
    const auto w = angular_frequencies(n, dt);
    double sum = 0.0;
    for (double s = s0; s <= static_cast<double>(n) * dt; s *= std::exp2(dj)) {
        double wd = 0.0;
        for (std::size_t k = 1; k <= n / 2; ++k) wd += morlet_hat(s, w[k], omega0, dt);
        wd /= static_cast<double>(n);
        sum += wd / std::sqrt(s);
    }
    return dj * std::sqrt(dt) / std::pow(pi, -0.25) * sum;
}

double estimate_lag1(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 3) return 0.0;
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double c0 = 0, c1 = 0, c2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = x[i] - mean;
        c0 += a * a;
        if (i + 1 < n) c1 += a * (x[i + 1] - mean);
        if (i + 2 < n) c2 += a * (x[i + 2] - mean);
    }
    if (c0 <= 0) return 0.0;
    double a1 = c1 / c0, a2 = c2 / c0;
    double lag1 = a2 > 0 ? 0.5 * (a1 + std::sqrt(a2)) : a1;
    return std::clamp(lag1, 0.0, 0.999);
}

WaveletSpectrum cwt(const TimeSeries& series, const WaveletParams& params) {
    auto t = prepare(series, params.normalize);
    auto g = make_grid(series.size(), params);

    WaveletSpectrum s;
    s.params = params;
    s.scales = g.scales;
    s.periods = g.periods;
    s.coi = g.coi;
    s.input_mean = t.mean;
    s.input_variance = t.variance;
    s.signal_variance = t.signal_variance;
    s.coefficients = transform(t.x, g, params);
    s.power = s.coefficients.cwiseAbs2();
    s.lag1 = estimate_lag1(t.x);
    for (double period : s.periods) s.background.push_back(red_noise(s.lag1, period, params.dt));
    s.significant = significance(s, params.significance_level).mask;
    return s;
}

Significance significance(const WaveletSpectrum& spectrum, double level) {
    if (!(level > 0 && level < 1)) throw InputError("significance level must lie in (0, 1)");
    const auto ns = spectrum.n_scales(), nt = spectrum.n_times();
    Significance out;
    out.mask = BoolMatrix::Constant(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt), false);
    // chi-square with 2 dof divided by its dof is a unit exponential
    const double chi2_over_dof = -std::log(1.0 - level);
    for (std::size_t j = 0; j < ns; ++j)
        out.threshold.push_back(spectrum.signal_variance * spectrum.background[j] * chi2_over_dof);
    if (spectrum.signal_variance <= 0) return out;
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t t = 0; t < nt; ++t) {
            auto jj = static_cast<Eigen::Index>(j), tt = static_cast<Eigen::Index>(t);
            out.mask(jj, tt) = spectrum.in_coi(j, t) && spectrum.power(jj, tt) > out.threshold[j];
        }
    return out;
}

std::vector<double> global_power(const WaveletSpectrum& spectrum, bool coi_only) {
    std::vector<double> out;
    for (std::size_t j = 0; j < spectrum.n_scales(); ++j) {
        double sum = 0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < spectrum.n_times(); ++t) {
            if (coi_only && !spectrum.in_coi(j, t)) continue;
            sum += spectrum.power(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t));
            ++count;
        }
        out.push_back(count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

double reconstructed_variance(const WaveletSpectrum& spectrum, bool coi_only) {
    const auto& p = spectrum.params;
    const double cdelta = morlet_reconstruction_factor(p.omega0, p.dj, p.s0, p.dt);
    auto gp = global_power(spectrum, coi_only);
    double sum = 0;
    for (std::size_t j = 0; j < gp.size(); ++j)
        if (std::isfinite(gp[j])) sum += gp[j] / spectrum.scales[j];
    return p.dj * p.dt / cdelta * sum;
}

std::vector<Ridge> ridges(const WaveletSpectrum& spectrum, const RidgeOptions& options) {
    const auto ns = spectrum.n_scales(), nt = spectrum.n_times();
    std::vector<Ridge> done, open;
    for (std::size_t t = 0; t < nt; ++t) {
        auto tt = static_cast<Eigen::Index>(t);
        std::vector<std::size_t> peaks;
        for (std::size_t j = 1; j + 1 < ns; ++j) {
            auto jj = static_cast<Eigen::Index>(j);
            double p = spectrum.power(jj, tt);
            if (spectrum.significant(jj, tt) && p > spectrum.power(jj - 1, tt) && p >= spectrum.power(jj + 1, tt))
                peaks.push_back(j);
        }
        // greedy nearest-neighbour linking, closest pairs first
        struct Link {
            std::size_t dist, ridge, peak;
        };
        std::vector<Link> links;
        for (std::size_t r = 0; r < open.size(); ++r)
            for (std::size_t k = 0; k < peaks.size(); ++k) {
                auto last = open[r].back().scale;
                auto dist = last > peaks[k] ? last - peaks[k] : peaks[k] - last;
                if (dist <= options.max_jump) links.push_back({dist, r, k});
            }
        std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
            return std::tie(a.dist, a.ridge, a.peak) < std::tie(b.dist, b.ridge, b.peak);
        });
        std::vector<char> ridge_used(open.size(), 0), peak_used(peaks.size(), 0);
        std::vector<Ridge> next;
        for (const auto& l : links) {
            if (ridge_used[l.ridge] || peak_used[l.peak]) continue;
            ridge_used[l.ridge] = peak_used[l.peak] = 1;
            open[l.ridge].push_back({t, peaks[l.peak]});
        }
        for (std::size_t r = 0; r < open.size(); ++r) {
            if (ridge_used[r])
                next.push_back(std::move(open[r]));
            else
                done.push_back(std::move(open[r]));
        }
        for (std::size_t k = 0; k < peaks.size(); ++k)
            if (!peak_used[k]) next.push_back({RidgePoint{t, peaks[k]}});
        open = std::move(next);
    }
    for (auto& r : open) done.push_back(std::move(r));
    std::erase_if(done, [&](const Ridge& r) { return r.size() < options.min_length; });
    std::sort(done.begin(), done.end(), [](const Ridge& a, const Ridge& b) {
        return std::tie(a.front().time, a.front().scale) < std::tie(b.front().time, b.front().scale);
    });
    return done;
}

// ---------------------------------------------------------------------------
// Cross-wavelet analysis

double cross_power_quantile(double level) {
    if (!(level > 0 && level < 1)) throw InputError("significance level must lie in (0, 1)");
    // P(E1 * E2 > z) = 2 sqrt(z) K1(2 sqrt(z))
    auto tail = [&](double z) {
        double r = 2.0 * std::sqrt(z);
        return r * boost::math::cyl_bessel_k(1, r) - (1.0 - level);
    };
    double lo = 1e-12, hi = 1.0;
    while (tail(hi) > 0) hi *= 2;
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(tail, lo, hi, tol, iters);
    return 0.5 * (a + b);
}

namespace {

void check_aligned(const TimeSeries& x, const TimeSeries& y) {
    if (x.size() != y.size() || x.start != y.start)
        throw InputError(fmt::format("series are not aligned ({} vs {} samples)", x.size(), y.size()));
}

struct Pair {
    WaveletSpectrum x, y;
};

CrossSpectrum cross_from(const Pair& p) {
    CrossSpectrum c;
    c.params = p.x.params;
    c.scales = p.x.scales;
    c.periods = p.x.periods;
    c.coi = p.x.coi;
    c.lag1_x = p.x.lag1;
    c.lag1_y = p.y.lag1;
    c.cross = p.x.coefficients.cwiseProduct(p.y.coefficients.conjugate());
    c.power = c.cross.cwiseAbs();
    c.phase = c.cross.unaryExpr([](const cd& v) { return v == cd{} ? 0.0 : std::arg(v); }).real();

    const auto ns = c.n_scales(), nt = c.n_times();
    c.significant = BoolMatrix::Constant(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(nt), false);
    const double vv = p.x.signal_variance * p.y.signal_variance;
    if (vv <= 0) return c;
    const double factor = std::sqrt(cross_power_quantile(c.params.significance_level) * vv);
    for (std::size_t j = 0; j < ns; ++j) {
        double level = factor * std::sqrt(p.x.background[j] * p.y.background[j]);
        for (std::size_t t = 0; t < nt; ++t) {
            auto jj = static_cast<Eigen::Index>(j), tt = static_cast<Eigen::Index>(t);
            c.significant(jj, tt) = c.in_coi(j, t) && c.power(jj, tt) > level;
        }
    }
    return c;
}

// Gaussian smoothing along time (std = scale) followed by a boxcar of
// 0.6 octaves along scale, both with zero padding at the edges.
class Smoother {
public:
    Smoother(const std::vector<double>& scales, std::size_t n, const WaveletParams& p)
        : scales_(scales), n_(n), npad_(next_pow2(n)), fft_(npad_) {
        k2_.resize(npad_);
        for (std::size_t m = 0; m < npad_; ++m) {
            double kk = m <= npad_ / 2 ? static_cast<double>(m) : static_cast<double>(npad_ - m);
            double k = 2.0 * pi * kk / static_cast<double>(npad_);
            k2_[m] = k * k;
        }
        for (auto& s : scales_) s /= p.dt;
        double steps = 0.6 / (2.0 * p.dj);
        double frac = std::fmod(steps, 1.0);
        int mid = 2 * static_cast<int>(std::lround(steps)) - 1;
        kernel_.push_back(frac);
        for (int i = 0; i < mid; ++i) kernel_.push_back(1.0);
        kernel_.push_back(frac);
        double norm = mid + 2.0 * frac;
        for (auto& v : kernel_) v /= norm;
    }

    Eigen::MatrixXcd operator()(const Eigen::MatrixXcd& in) {
        const auto ns = static_cast<Eigen::Index>(scales_.size());
        Eigen::MatrixXcd timed(ns, static_cast<Eigen::Index>(n_));
        std::vector<cd> buf(npad_);
        for (Eigen::Index j = 0; j < ns; ++j) {
            std::fill(buf.begin(), buf.end(), cd{});
            for (std::size_t t = 0; t < n_; ++t) buf[t] = in(j, static_cast<Eigen::Index>(t));
            fft_.forward(buf);
            const double s2 = scales_[static_cast<std::size_t>(j)] * scales_[static_cast<std::size_t>(j)];
            for (std::size_t m = 0; m < npad_; ++m) buf[m] *= std::exp(-0.5 * s2 * k2_[m]);
            fft_.backward(buf);
            for (std::size_t t = 0; t < n_; ++t)
                timed(j, static_cast<Eigen::Index>(t)) = buf[t] / static_cast<double>(npad_);
        }
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(ns, static_cast<Eigen::Index>(n_));
        const auto half = static_cast<Eigen::Index>(kernel_.size() / 2);
        for (Eigen::Index j = 0; j < ns; ++j)
            for (std::size_t q = 0; q < kernel_.size(); ++q) {
                Eigen::Index src = j + static_cast<Eigen::Index>(q) - half;
                if (src >= 0 && src < ns) out.row(j) += kernel_[q] * timed.row(src);
            }
        return out;
    }

private:
    std::vector<double> scales_;
    std::size_t n_, npad_;
    Fft fft_;
    std::vector<double> k2_;
    std::vector<double> kernel_;
};

void fill_coherence(CrossSpectrum& c, const Pair& p) {
    const auto ns = static_cast<Eigen::Index>(c.n_scales());
    Eigen::VectorXd inv_s(ns);
    for (Eigen::Index j = 0; j < ns; ++j) inv_s(j) = 1.0 / c.scales[static_cast<std::size_t>(j)];

    Smoother smooth(c.scales, c.n_times(), c.params);
    Eigen::MatrixXcd sx = smooth(inv_s.asDiagonal() * p.x.power.cast<cd>());
    Eigen::MatrixXcd sy = smooth(inv_s.asDiagonal() * p.y.power.cast<cd>());
    Eigen::MatrixXcd sxy = smooth(inv_s.asDiagonal() * c.cross);

    c.coherence.resize(ns, static_cast<Eigen::Index>(c.n_times()));
    for (Eigen::Index j = 0; j < ns; ++j)
        for (Eigen::Index t = 0; t < c.coherence.cols(); ++t) {
            double den = sx(j, t).real() * sy(j, t).real();
            double v = den > 0 ? std::norm(sxy(j, t)) / den : 0.0;
            c.coherence(j, t) = std::clamp(v, 0.0, 1.0);
            c.phase(j, t) = sxy(j, t) == cd{} ? 0.0 : std::arg(sxy(j, t));
        }
}

}  // namespace

CrossSpectrum xwt(const TimeSeries& x, const TimeSeries& y, const WaveletParams& params) {
    check_aligned(x, y);
    Pair p{cwt(x, params), cwt(y, params)};
    return cross_from(p);
}

CrossSpectrum coherence(const TimeSeries& x, const TimeSeries& y, const WaveletParams& params) {
    check_aligned(x, y);
    Pair p{cwt(x, params), cwt(y, params)};
    auto c = cross_from(p);
    fill_coherence(c, p);
    return c;
}

namespace {

TimeSeries ar1_surrogate(std::size_t n, double lag1, Rng& rng) {
    std::normal_distribution<double> z;
    TimeSeries s{Date{}, std::vector<double>(n)};
    double scale = std::sqrt(1.0 - lag1 * lag1);
    double v = z(rng);
    for (std::size_t burn = 0; burn < 50; ++burn) v = lag1 * v + scale * z(rng);
    for (auto& out : s.values) {
        v = lag1 * v + scale * z(rng);
        out = v;
    }
    return s;
}

}  // namespace

std::vector<double> coherence_thresholds(const CrossSpectrum& spectrum, double level, std::size_t surrogates,
                                         std::uint64_t seed) {
    if (!(level > 0 && level < 1)) throw InputError("significance level must lie in (0, 1)");
    const auto ns = spectrum.n_scales(), nt = spectrum.n_times();
    WaveletParams p = spectrum.params;
    p.j_max = static_cast<int>(ns) - 1;
    std::vector<std::vector<double>> samples(ns);
    Rng rng(seed);
    for (std::size_t k = 0; k < surrogates; ++k) {
        auto sx = ar1_surrogate(nt, spectrum.lag1_x, rng);
        auto sy = ar1_surrogate(nt, spectrum.lag1_y, rng);
        auto c = coherence(sx, sy, p);
        for (std::size_t j = 0; j < ns; ++j)
            for (std::size_t t = 0; t < nt; ++t)
                if (c.in_coi(j, t))
                    samples[j].push_back(c.coherence(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(t)));
    }
    std::vector<double> out(ns, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < ns; ++j) {
        auto& v = samples[j];
        if (v.empty()) continue;
        auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(v.size())));
        rank = std::clamp<std::size_t>(rank, 1, v.size()) - 1;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank), v.end());
        out[j] = v[rank];
    }
    return out;
}

}  // namespace cesnet
