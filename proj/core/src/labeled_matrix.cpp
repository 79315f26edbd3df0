#include "cesnet/labeled_matrix.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cesnet/csv.hpp"
#include "cesnet/error.hpp"

namespace cesnet {

std::string format_number(double v) {
    if (v == 0.0) return "0";  // folds -0
    return fmt::format("{}", v);
}

void write_matrix_csv(std::ostream& out, const LabeledMatrix& m) {
    out << csv::escape(m.corner);
    for (const auto& c : m.col_labels) out << ',' << csv::escape(c);
    out << '\n';
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        out << csv::escape(m.row_labels[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) out << ',' << format_number(m.values(i, j));
        out << '\n';
    }
}

LabeledMatrix read_matrix_csv(std::istream& in) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 2) throw InputError("matrix CSV needs a header with at least one column");
    LabeledMatrix m;
    m.corner = (*header)[0];
    m.col_labels.assign(header->begin() + 1, header->end());
    std::vector<std::vector<double>> rows;
    while (auto row = reader.next()) {
        if (row->size() != header->size())
            throw InputError(fmt::format("matrix line {}: expected {} fields, got {}", reader.line(),
                                         header->size(), row->size()));
        m.row_labels.push_back((*row)[0]);
        std::vector<double> vals;
        for (std::size_t j = 1; j < row->size(); ++j) {
            auto text = csv::trim((*row)[j]);
            double v = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
                throw InputError(fmt::format("matrix line {}: bad number '{}'", reader.line(), text));
            vals.push_back(v);
        }
        rows.push_back(std::move(vals));
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.col_labels.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

}  // namespace cesnet
