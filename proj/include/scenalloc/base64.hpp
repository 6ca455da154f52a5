#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scenalloc {

std::string base64_encode(const uint8_t* data, size_t len);
std::vector<uint8_t> base64_decode(const std::string& text);

// Doubles are serialized as raw little-endian bytes so save/load round-trips
// are bit-exact.
std::string encode_doubles(const double* data, size_t count);
std::vector<double> decode_doubles(const std::string& text);

std::string encode_matrix(const Eigen::MatrixXd& m);  // row-major order
Eigen::MatrixXd decode_matrix(const std::string& text, Eigen::Index rows, Eigen::Index cols);

}  // namespace scenalloc
