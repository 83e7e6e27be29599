#include "metamix/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace metamix {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw shape_error(msg);
}

}  // namespace

Tensor::Tensor(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
    check(rows >= 0 && cols >= 0, "tensor: negative dimension");
}

Tensor::Tensor(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    check(rows >= 0 && cols >= 0, "tensor: negative dimension");
    check(static_cast<size_t>(rows) * cols == data_.size(), "tensor: data length does not match shape");
}

Tensor Tensor::full(int rows, int cols, double v) {
    Tensor t(rows, cols);
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
}

Tensor Tensor::row(std::span<const double> v) {
    return Tensor(1, static_cast<int>(v.size()), std::vector<double>(v.begin(), v.end()));
}

Tensor Tensor::column(std::span<const double> v) {
    return Tensor(static_cast<int>(v.size()), 1, std::vector<double>(v.begin(), v.end()));
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void Tensor::require_finite(const char* what) const {
    if (!all_finite()) throw numeric_error(std::string("non-finite value in ") + what);
}

Tensor add(const Tensor& a, const Tensor& b) {
    check(a.same_shape(b), "add: shape mismatch");
    Tensor out(a.rows(), a.cols());
    for (int64_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check(a.same_shape(b), "sub: shape mismatch");
    Tensor out(a.rows(), a.cols());
    for (int64_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check(a.same_shape(b), "mul: shape mismatch");
    Tensor out(a.rows(), a.cols());
    for (int64_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out(a.rows(), a.cols());
    for (int64_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check(a.cols() == b.rows(), "matmul: inner dimensions differ");
    Tensor out(a.rows(), b.cols());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double av = a.at(i, p);
            if (av == 0.0) continue;
            for (int j = 0; j < n; ++j) out.at(i, j) += av * b.at(p, j);
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor add_bias(const Tensor& h, const Tensor& bias_row) {
    check(bias_row.rows() == 1 && bias_row.cols() == h.cols(), "add_bias: bias must be 1 x cols(h)");
    Tensor out(h.rows(), h.cols());
    for (int i = 0; i < h.rows(); ++i)
        for (int j = 0; j < h.cols(); ++j) out.at(i, j) = h.at(i, j) + bias_row.at(0, j);
    return out;
}

Tensor sum_rows(const Tensor& a) {
    Tensor out(1, a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.at(0, j) += a.at(i, j);
    return out;
}

Tensor sum_cols(const Tensor& a) {
    Tensor out(a.rows(), 1);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.at(i, 0) += a.at(i, j);
    return out;
}

double sum_all(const Tensor& a) {
    return std::accumulate(a.data().begin(), a.data().end(), 0.0);
}

Tensor repeat_rows(const Tensor& row, int rows) {
    check(row.rows() == 1, "repeat_rows: input must be a row vector");
    Tensor out(rows, row.cols());
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < row.cols(); ++j) out.at(i, j) = row.at(0, j);
    return out;
}

Tensor repeat_cols(const Tensor& col, int cols) {
    check(col.cols() == 1, "repeat_cols: input must be a column vector");
    Tensor out(col.rows(), cols);
    for (int i = 0; i < col.rows(); ++i)
        for (int j = 0; j < cols; ++j) out.at(i, j) = col.at(i, 0);
    return out;
}

Tensor leaky_relu(const Tensor& a, double slope) {
    Tensor out(a.rows(), a.cols());
    for (int64_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : slope * a[i];
    return out;
}

Tensor softmax_rows(const Tensor& a) {
    Tensor out(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        double mx = a.at(i, 0);
        for (int j = 1; j < a.cols(); ++j) mx = std::max(mx, a.at(i, j));
        double denom = 0.0;
        for (int j = 0; j < a.cols(); ++j) {
            out.at(i, j) = std::exp(a.at(i, j) - mx);
            denom += out.at(i, j);
        }
        for (int j = 0; j < a.cols(); ++j) out.at(i, j) /= denom;
    }
    return out;
}

Tensor gather_rows(const Tensor& a, std::span<const int32_t> idx) {
    Tensor out(static_cast<int>(idx.size()), a.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        check(idx[i] >= 0 && idx[i] < a.rows(), "gather_rows: index out of range");
        for (int j = 0; j < a.cols(); ++j) out.at(static_cast<int>(i), j) = a.at(idx[i], j);
    }
    return out;
}

Tensor scatter_rows_add(const Tensor& a, std::span<const int32_t> idx, int out_rows) {
    check(static_cast<int>(idx.size()) == a.rows(), "scatter_rows_add: index count must equal rows");
    Tensor out(out_rows, a.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        check(idx[i] >= 0 && idx[i] < out_rows, "scatter_rows_add: index out of range");
        for (int j = 0; j < a.cols(); ++j) out.at(idx[i], j) += a.at(static_cast<int>(i), j);
    }
    return out;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    check(a.cols() == b.cols(), "concat_rows: column counts differ");
    Tensor out(a.rows() + b.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) out.at(a.rows() + i, j) = b.at(i, j);
    return out;
}

Tensor slice_rows(const Tensor& a, int begin, int count) {
    check(begin >= 0 && count >= 0 && begin + count <= a.rows(), "slice_rows: range out of bounds");
    Tensor out(count, a.cols());
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.at(begin + i, j);
    return out;
}

double mse_value(const Tensor& pred, const Tensor& target) {
    check(pred.same_shape(target), "mse: shape mismatch");
    double s = 0.0;
    for (int64_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

double softmax_ce_value(const Tensor& logits, const Tensor& target) {
    check(logits.same_shape(target), "softmax_ce: shape mismatch");
    double total = 0.0;
    for (int i = 0; i < logits.rows(); ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits.at(i, j));
        double lse = 0.0;
        for (int j = 0; j < logits.cols(); ++j) lse += std::exp(logits.at(i, j) - mx);
        lse = std::log(lse) + mx;
        double dot = 0.0, tsum = 0.0;
        for (int j = 0; j < logits.cols(); ++j) {
            dot += target.at(i, j) * logits.at(i, j);
            tsum += target.at(i, j);
        }
        total += tsum * lse - dot;
    }
    return total / logits.rows();
}

}  // namespace metamix
