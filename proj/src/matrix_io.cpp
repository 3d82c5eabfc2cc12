#include "spca/matrix_io.hpp"

#include "spca/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace spca {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    // trim surrounding whitespace
    std::size_t b = token.find_first_not_of(" \t\r");
    std::size_t e = token.find_last_not_of(" \t\r");
    if (b == std::string::npos)
        throw InputError("empty numeric field");
    double value = 0.0;
    auto res = std::from_chars(token.data() + b, token.data() + e + 1, value);
    if (res.ec != std::errc{} || res.ptr != token.data() + e + 1)
        throw InputError("cannot parse number: '" + token + "'");
    return value;
}

namespace {

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
        row.push_back(parse_double(field));
    return row;
}

} // namespace

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        rows.push_back(parse_row(line));
        if (rows.back().size() != rows.front().size())
            throw InputError("ragged CSV: rows have different lengths");
    }
    if (rows.empty())
        throw InputError("empty matrix file");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open file: " + path);
    return read_matrix_csv(in);
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

void write_matrix_csv_file(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open file for writing: " + path);
    write_matrix_csv(out, m);
}

Eigen::VectorXd read_vector_csv(std::istream& in) {
    Eigen::MatrixXd m = read_matrix_csv(in);
    if (m.rows() == 1)
        return m.row(0).transpose();
    if (m.cols() == 1)
        return m.col(0);
    throw InputError("expected a vector (single CSV line)");
}

void write_vector_csv(std::ostream& out, const Eigen::VectorXd& v) {
    write_matrix_csv(out, v.transpose());
}

} // namespace spca
