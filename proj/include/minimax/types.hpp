#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace minimax {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Index = Eigen::Index;

}  // namespace minimax
