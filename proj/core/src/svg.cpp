#include "cesnet/svg.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace cesnet {

namespace {

constexpr double kMargin = 60.0;

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// t in [-1, 1] -> blue .. white .. red
std::string diverging(double t) {
    t = std::clamp(t, -1.0, 1.0);
    auto mix = [](double a, double b, double u) { return static_cast<int>(std::lround(a + (b - a) * u)); };
    if (t >= 0) return fmt::format("#{:02x}{:02x}{:02x}", mix(255, 178, t), mix(255, 24, t), mix(255, 43, t));
    return fmt::format("#{:02x}{:02x}{:02x}", mix(255, 33, -t), mix(255, 102, -t), mix(255, 172, -t));
}

// u in [0, 1] -> dark blue .. yellow
std::string sequential(double u) {
    u = std::clamp(u, 0.0, 1.0);
    auto mix = [](double a, double b, double v) { return static_cast<int>(std::lround(a + (b - a) * v)); };
    if (u < 0.5) {
        double v = u * 2;
        return fmt::format("#{:02x}{:02x}{:02x}", mix(13, 33, v), mix(8, 145, v), mix(135, 140, v));
    }
    double v = (u - 0.5) * 2;
    return fmt::format("#{:02x}{:02x}{:02x}", mix(33, 253, v), mix(145, 231, v), mix(140, 37, v));
}

std::string header(double w, double h) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
        "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"10\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w, h);
}

}  // namespace

std::string heatmap_svg(const LabeledMatrix& m, const std::string& title) {
    const double cell = 18.0;
    const double left = 140.0, top = 40.0 + 120.0;
    const auto rows = static_cast<double>(m.values.rows()), cols = static_cast<double>(m.values.cols());
    const double w = left + cols * cell + kMargin, h = top + rows * cell + kMargin;
    const double scale = m.values.size() ? m.values.cwiseAbs().maxCoeff() : 0.0;

    std::string s = header(w, h);
    s += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n", left, xml_escape(title));
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        double y = top + static_cast<double>(r) * cell;
        s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 4, y + cell * 0.7,
                         xml_escape(m.row_labels[static_cast<std::size_t>(r)]));
        for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
            double v = m.values(r, c);
            s += fmt::format(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"><title>{}</title></rect>\n",
                left + static_cast<double>(c) * cell, y, cell, cell, diverging(scale > 0 ? v / scale : 0.0),
                format_number(v));
        }
    }
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
        double x = left + (static_cast<double>(c) + 0.7) * cell;
        s += fmt::format("<text transform=\"translate({},{}) rotate(-60)\">{}</text>\n", x, top - 4,
                         xml_escape(m.col_labels[static_cast<std::size_t>(c)]));
    }
    s += "</svg>\n";
    return s;
}

std::string spectrogram_svg(const Eigen::MatrixXd& field, const std::vector<double>& periods,
                            const std::vector<double>& coi, const BoolMatrix& significant,
                            const Eigen::MatrixXd& phase, const std::string& title) {
    const auto ns = field.rows(), nt = field.cols();
    const double plot_w = 800.0, plot_h = 400.0;
    const double cw = nt ? plot_w / static_cast<double>(nt) : 0, ch = ns ? plot_h / static_cast<double>(ns) : 0;
    const double left = kMargin, top = 40.0;
    std::string s = header(left + plot_w + kMargin, top + plot_h + kMargin);
    s += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n", left, xml_escape(title));

    // log scale colouring
    double hi = 0;
    for (Eigen::Index i = 0; i < field.size(); ++i) hi = std::max(hi, field.data()[i]);
    const double lo = hi > 0 ? hi * 1e-4 : 0;
    auto shade = [&](double v) {
        if (hi <= 0) return sequential(0);
        return sequential(std::log(std::max(v, lo) / lo) / std::log(hi / lo));
    };
    for (Eigen::Index j = 0; j < ns; ++j)
        for (Eigen::Index t = 0; t < nt; ++t)
            s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                             left + static_cast<double>(t) * cw, top + static_cast<double>(j) * ch, cw + 0.05,
                             ch + 0.05, shade(field(j, t)));

    // cells outside the cone of influence
    s += "<g fill=\"white\" fill-opacity=\"0.45\">\n";
    for (Eigen::Index t = 0; t < nt; ++t) {
        Eigen::Index j0 = 0;
        while (j0 < ns && periods[static_cast<std::size_t>(j0)] <= coi[static_cast<std::size_t>(t)]) ++j0;
        if (j0 < ns)
            s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\"/>\n",
                             left + static_cast<double>(t) * cw, top + static_cast<double>(j0) * ch, cw + 0.05,
                             static_cast<double>(ns - j0) * ch);
    }
    s += "</g>\n";

    // boundary edges between significant and non-significant cells
    auto sig = [&](Eigen::Index j, Eigen::Index t) {
        return j >= 0 && j < ns && t >= 0 && t < nt && significant(j, t);
    };
    s += "<path fill=\"none\" stroke=\"white\" stroke-width=\"1.2\" d=\"";
    for (Eigen::Index j = 0; j <= ns; ++j)
        for (Eigen::Index t = 0; t < nt; ++t)
            if (sig(j - 1, t) != sig(j, t))
                s += fmt::format("M{:.2f} {:.2f}h{:.2f}", left + static_cast<double>(t) * cw,
                                 top + static_cast<double>(j) * ch, cw);
    for (Eigen::Index j = 0; j < ns; ++j)
        for (Eigen::Index t = 0; t <= nt; ++t)
            if (sig(j, t - 1) != sig(j, t))
                s += fmt::format("M{:.2f} {:.2f}v{:.2f}", left + static_cast<double>(t) * cw,
                                 top + static_cast<double>(j) * ch, ch);
    s += "\"/>\n";

    if (phase.size() == field.size() && ns > 0 && nt > 0) {
        const Eigen::Index step_t = std::max<Eigen::Index>(1, nt / 40), step_j = std::max<Eigen::Index>(1, ns / 15);
        const double len = std::min(12.0, 0.8 * std::min(cw * static_cast<double>(step_t), ch * static_cast<double>(step_j)));
        s += "<g stroke=\"black\" stroke-width=\"1\">\n";
        for (Eigen::Index j = step_j / 2; j < ns; j += step_j)
            for (Eigen::Index t = step_t / 2; t < nt; t += step_t) {
                if (!significant(j, t)) continue;
                double cx = left + (static_cast<double>(t) + 0.5) * cw, cy = top + (static_cast<double>(j) + 0.5) * ch;
                double dx = 0.5 * len * std::cos(phase(j, t)), dy = -0.5 * len * std::sin(phase(j, t));
                double hx = cx + dx, hy = cy + dy;
                double a = std::atan2(dy, dx);
                s += fmt::format("<path d=\"M{:.2f} {:.2f}L{:.2f} {:.2f}M{:.2f} {:.2f}L{:.2f} {:.2f}L{:.2f} {:.2f}\"/>\n",
                                 cx - dx, cy - dy, hx, hy, hx - 4 * std::cos(a - 0.5), hy - 4 * std::sin(a - 0.5), hx,
                                 hy, hx - 4 * std::cos(a + 0.5), hy - 4 * std::sin(a + 0.5));
            }
        s += "</g>\n";
    }

    // period axis
    for (Eigen::Index j = 0; j < ns; j += std::max<Eigen::Index>(1, ns / 8))
        s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.1f}</text>\n", left - 4,
                         top + (static_cast<double>(j) + 0.5) * ch + 3, periods[static_cast<std::size_t>(j)]);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">time (days)</text>\n", left + plot_w / 2,
                     top + plot_h + 30);
    s += "</svg>\n";
    return s;
}

}  // namespace cesnet
