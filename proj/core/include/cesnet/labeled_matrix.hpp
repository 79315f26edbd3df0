#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cesnet {

/// Dense real matrix with row and column labels.
struct LabeledMatrix {
    std::string corner;  // header of the label column
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Eigen::MatrixXd values;
};

/// Writes `corner,<col labels...>` then one labeled row per line.
/// Numbers use shortest round-trip formatting.
void write_matrix_csv(std::ostream& out, const LabeledMatrix& m);
LabeledMatrix read_matrix_csv(std::istream& in);

/// Shortest decimal representation that round-trips a double.
std::string format_number(double v);

}  // namespace cesnet
