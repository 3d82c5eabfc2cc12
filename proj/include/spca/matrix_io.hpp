#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

namespace spca {

// Plain-text CSV: row-major, no header, one matrix row per line; a vector is a
// single line.  Values are written in shortest round-trip form so
// write -> read reproduces every double bit-exactly.

std::string format_double(double v);
double parse_double(const std::string& token);

Eigen::MatrixXd read_matrix_csv(std::istream& in);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_csv_file(const std::string& path, const Eigen::MatrixXd& m);

Eigen::VectorXd read_vector_csv(std::istream& in);
void write_vector_csv(std::ostream& out, const Eigen::VectorXd& v);

} // namespace spca
