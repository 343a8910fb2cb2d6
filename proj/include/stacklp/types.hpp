#pragma once

#include <Eigen/Dense>

namespace stacklp {

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using RowVectorX = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Class labels in {-1, +1}.
using Labels = Eigen::VectorXi;
using RowMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

inline int sign_label(double score) { return score >= 0.0 ? 1 : -1; }

}  // namespace stacklp
