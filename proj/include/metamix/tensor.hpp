#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "metamix/common.hpp"

namespace metamix {

/// Dense row-major matrix of doubles. All numeric state in the library is
/// held in these; vectors are 1xN or Nx1 tensors.
class Tensor {
public:
    Tensor() = default;
    Tensor(int rows, int cols);
    Tensor(int rows, int cols, std::vector<double> data);

    static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
    static Tensor full(int rows, int cols, double v);
    static Tensor scalar(double v) { return full(1, 1, v); }
    static Tensor row(std::span<const double> v);
    static Tensor column(std::span<const double> v);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int64_t size() const { return static_cast<int64_t>(rows_) * cols_; }

    double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    /// Throws numeric_error naming `what` if any entry is NaN or Inf.
    void require_finite(const char* what) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Value-level kernels shared by the graph ops and by plain (non-differentiated)
// evaluation paths. All of them validate shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add_bias(const Tensor& h, const Tensor& bias_row);
Tensor sum_rows(const Tensor& a);   // 1 x cols
Tensor sum_cols(const Tensor& a);   // rows x 1
double sum_all(const Tensor& a);
Tensor repeat_rows(const Tensor& row, int rows);
Tensor repeat_cols(const Tensor& col, int cols);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor softmax_rows(const Tensor& a);
Tensor gather_rows(const Tensor& a, std::span<const int32_t> idx);
Tensor scatter_rows_add(const Tensor& a, std::span<const int32_t> idx, int out_rows);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor slice_rows(const Tensor& a, int begin, int count);

double mse_value(const Tensor& pred, const Tensor& target);
double softmax_ce_value(const Tensor& logits, const Tensor& target);

}  // namespace metamix
