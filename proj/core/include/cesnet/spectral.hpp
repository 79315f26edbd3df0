#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cesnet/series.hpp"

namespace cesnet {

/// Morlet continuous wavelet transform settings. Times are in days.
struct WaveletParams {
    double omega0 = 6.0;
    double s0 = 2.0;
    double dj = 0.25;
    /// Largest scale index; negative picks the largest scale with period <= N*dt/2.
    int j_max = -1;
    double dt = 1.0;
    /// Divide the mean-removed series by its standard deviation.
    bool normalize = true;
    /// Confidence level of the red-noise significance test.
    double significance_level = 0.95;
};

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Time x period wavelet field. Matrices are indexed (scale, time).
struct WaveletSpectrum {
    WaveletParams params;
    std::vector<double> scales;
    std::vector<double> periods;
    Eigen::MatrixXcd coefficients;
    /// |W|^2 of the transformed (mean-removed, optionally normalized) series.
    Eigen::MatrixXd power;
    /// Largest period inside the cone of influence at each time.
    std::vector<double> coi;
    /// Variance of the transformed series (1 when normalized, 0 for a constant input).
    double signal_variance = 0.0;
    double input_mean = 0.0;
    double input_variance = 0.0;
    /// AR(1) coefficient of the red-noise background.
    double lag1 = 0.0;
    /// Expected background power per scale, in units of the transformed series.
    std::vector<double> background;
    BoolMatrix significant;

    std::size_t n_scales() const { return scales.size(); }
    std::size_t n_times() const { return coi.size(); }
    bool in_coi(std::size_t scale, std::size_t time) const { return periods[scale] <= coi[time]; }
};

/// Morlet Fourier factor: period = factor * scale.
double morlet_fourier_factor(double omega0);

/// Reconstruction factor C_delta of the Morlet wavelet for the given grid:
/// the delta response summed over scales s0 * 2^(j dj). With s0 well below
/// the Nyquist scale it converges to the full-range constant (about 0.778).
double morlet_reconstruction_factor(double omega0, double dj, double s0 = 2.0, double dt = 1.0);

/// Red-noise AR(1) coefficient from the first two autocorrelations.
double estimate_lag1(std::span<const double> x);

/// Morlet CWT computed in the frequency domain on the zero-padded,
/// mean-removed series, with the red-noise significance mask filled in.
/// Throws InputError for fewer than 8 samples or non-finite values.
WaveletSpectrum cwt(const TimeSeries& series, const WaveletParams& params = {});

struct Significance {
    /// Power threshold per scale.
    std::vector<double> threshold;
    /// Pointwise test result; false outside the cone of influence.
    BoolMatrix mask;
};

/// Pointwise chi-square (2 dof) test of power against the AR(1) background.
/// A constant series yields an empty mask.
Significance significance(const WaveletSpectrum& spectrum, double level = 0.95);

/// Time-average power per scale; `coi_only` restricts to in-cone points
/// (scales without any in-cone point get NaN).
std::vector<double> global_power(const WaveletSpectrum& spectrum, bool coi_only = false);

/// Series variance recovered from scale-integrated power. With `coi_only`,
/// each scale's power is averaged over in-cone times only.
double reconstructed_variance(const WaveletSpectrum& spectrum, bool coi_only = false);

struct RidgePoint {
    std::size_t time;
    std::size_t scale;
};
using Ridge = std::vector<RidgePoint>;

struct RidgeOptions {
    /// Largest scale-index jump when linking maxima at consecutive times.
    std::size_t max_jump = 2;
    /// Ridges with fewer points are dropped.
    std::size_t min_length = 3;
};

/// Chains per-time local power maxima across periods that pass the
/// significance test into ridges, linking nearest neighbours in scale.
std::vector<Ridge> ridges(const WaveletSpectrum& spectrum, const RidgeOptions& options = {});

/// Cross-wavelet quantities; matrices indexed (scale, time).
struct CrossSpectrum {
    WaveletParams params;
    std::vector<double> scales;
    std::vector<double> periods;
    std::vector<double> coi;
    /// W_x * conj(W_y) of the normalized series.
    Eigen::MatrixXcd cross;
    /// |W_xy|.
    Eigen::MatrixXd power;
    /// arg W_xy for xwt, arg of the smoothed W_xy / s for coherence; zero where power is zero.
    Eigen::MatrixXd phase;
    /// Squared wavelet coherence in [0, 1]; empty for plain xwt.
    Eigen::MatrixXd coherence;
    /// Cross-power test against the product of both red-noise backgrounds.
    BoolMatrix significant;
    double lag1_x = 0.0;
    double lag1_y = 0.0;

    std::size_t n_scales() const { return scales.size(); }
    std::size_t n_times() const { return coi.size(); }
    bool in_coi(std::size_t scale, std::size_t time) const { return periods[scale] <= coi[time]; }
};

/// Cross-wavelet transform. Throws InputError when lengths or start dates differ.
CrossSpectrum xwt(const TimeSeries& x, const TimeSeries& y, const WaveletParams& params = {});

/// Wavelet coherence with Gaussian smoothing in time and a boxcar of
/// width 0.6 octaves in scale. Also fills the xwt fields.
CrossSpectrum coherence(const TimeSeries& x, const TimeSeries& y, const WaveletParams& params = {});

/// Quantile of the product of two independent unit exponentials, i.e. the
/// cross-power significance factor for two chi-square(2)/2 variables.
double cross_power_quantile(double level);

/// Per-scale coherence thresholds at `level` from AR(1) surrogate pairs
/// sharing the lag-1 coefficients of x and y (in-cone points only).
std::vector<double> coherence_thresholds(const CrossSpectrum& spectrum, double level, std::size_t surrogates,
                                         std::uint64_t seed);

}  // namespace cesnet
