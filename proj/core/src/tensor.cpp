#include "dlcf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dlcf/errors.hpp"

namespace dlcf {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

// ---- Tensor --------------------------------------------------------------

Tensor::Tensor(Shape shape, double fill, bool requires_grad) : impl_(std::make_shared<Impl>()) {
  check_shape(shape);
  impl_->data.assign(element_count(shape), fill);
  impl_->shape = std::move(shape);
  impl_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<Impl>()) {
  check_shape(shape);
  if (data.size() != element_count(shape)) {
    throw DimensionError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape_string(shape));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, std::vector<double>{value}, requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data), requires_grad);
}

Tensor::Impl& Tensor::impl() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }
std::size_t Tensor::size() const { return impl().data.size(); }

std::size_t Tensor::rows() const {
  const auto& s = shape();
  if (s.size() == 1) return 1;
  if (s.size() == 2) return s[0];
  throw DimensionError("expected a matrix, got " + shape_string(s));
}

std::size_t Tensor::cols() const {
  const auto& s = shape();
  if (s.size() == 1) return s[0];
  if (s.size() == 2) return s[1];
  throw DimensionError("expected a matrix, got " + shape_string(s));
}

std::span<const double> Tensor::data() const { return impl().data; }
std::span<double> Tensor::mutable_data() { return impl().data; }

double Tensor::at(std::size_t i, std::size_t j) const { return impl().data[i * cols() + j]; }
double& Tensor::at(std::size_t i, std::size_t j) { return impl().data[i * cols() + j]; }

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return impl().data[0];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  impl().requires_grad = on;
  return *this;
}

void Tensor::mark_requires_grad() const { impl().requires_grad = true; }

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw ContractError("tensor has no gradient buffer");
  return impl().grad;
}

std::span<double> Tensor::mutable_grad() const {
  auto& im = impl();
  if (im.grad.empty()) im.grad.assign(im.data.size(), 0.0);
  return im.grad;
}

void Tensor::zero_grad() const {
  auto& im = impl();
  std::fill(im.grad.begin(), im.grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  return Tensor(shape(), std::vector<double>(data().begin(), data().end()), requires_grad());
}

// ---- Tape ----------------------------------------------------------------

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape::Recording::Recording(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
Tape::Recording::~Recording() { g_active_tape = previous_; }

Tape* Tape::active() noexcept { return g_active_tape; }

bool Tape::should_record(std::initializer_list<const Tensor*> inputs) {
  if (!g_active_tape) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t && t->defined() && t->requires_grad(); });
}

void Tape::record(Tensor output, BackwardFn fn) {
  output.mark_requires_grad();
  entries_.push_back(Entry{std::move(output), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward requires a scalar loss, got " +
                        (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward: loss does not depend on any tensor that requires a gradient");
  }
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output.has_grad()) it->fn();
  }
  clear();
}

void backward(const Tensor& loss, Tape& tape) { tape.backward(loss); }

// ---- operations ----------------------------------------------------------

namespace {

enum class Broadcast { kSame, kColumn, kRow };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b) {
  const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  if (ar == br && ac == bc) return Broadcast::kSame;
  if (br == ar && bc == 1) return Broadcast::kColumn;
  if (br == 1 && bc == ac) return Broadcast::kRow;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                       " and " + shape_string(b.shape()));
}

std::size_t broadcast_index(Broadcast kind, std::size_t i, std::size_t j, std::size_t cols) {
  switch (kind) {
    case Broadcast::kSame: return i * cols + j;
    case Broadcast::kColumn: return i;
    case Broadcast::kRow: return j;
  }
  return 0;
}

Tensor result_like(const Tensor& a) { return Tensor(a.shape(), 0.0); }

template <typename Fn>
Tensor unary(const Tensor& x, Fn value_and_slope) {
  Tensor out = result_like(x);
  auto xs = x.data();
  auto os = out.mutable_data();
  std::vector<double> slope(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto [v, s] = value_and_slope(xs[i]);
    os[i] = v;
    slope[i] = s;
  }
  if (Tape::should_record({&x})) {
    Tape::active()->record(out, [x, out, slope = std::move(slope)]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * slope[i];
    });
  }
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  Tensor c({m, n}, 0.0);
  auto A = a.data(), B = b.data();
  auto C = c.mutable_data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* brow = &B[p * n];
      double* crow = &C[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  if (Tape::should_record({&a, &b})) {
    Tape::active()->record(c, [a, b, c, m, k, n]() mutable {
      auto G = c.grad();
      auto A = a.data(), B = b.data();
      if (a.requires_grad()) {
        auto GA = a.mutable_grad();  // dA = dC * B^T
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += G[i * n + j] * B[p * n + j];
            GA[i * k + p] += acc;
          }
      }
      if (b.requires_grad()) {
        auto GB = b.mutable_grad();  // dB = A^T * dC
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = A[i * k + p];
            for (std::size_t j = 0; j < n; ++j) GB[p * n + j] += aip * G[i * n + j];
          }
      }
    });
  }
  return c;
}

namespace {

// sign = +1 for add, -1 for sub.
Tensor add_signed(const char* op, const Tensor& a, const Tensor& b, double sign) {
  const auto kind = broadcast_kind(op, a, b);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = result_like(a);
  auto A = a.data(), B = b.data();
  auto O = out.mutable_data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      O[i * c + j] = A[i * c + j] + sign * B[broadcast_index(kind, i, j, c)];
  if (Tape::should_record({&a, &b})) {
    Tape::active()->record(out, [a, b, out, kind, r, c, sign]() mutable {
      auto G = out.grad();
      if (a.requires_grad()) {
        auto GA = a.mutable_grad();
        for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i];
      }
      if (b.requires_grad()) {
        auto GB = b.mutable_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            GB[broadcast_index(kind, i, j, c)] += sign * G[i * c + j];
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_signed("add", a, b, 1.0); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_signed("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const auto kind = broadcast_kind("mul", a, b);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = result_like(a);
  auto A = a.data(), B = b.data();
  auto O = out.mutable_data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      O[i * c + j] = A[i * c + j] * B[broadcast_index(kind, i, j, c)];
  if (Tape::should_record({&a, &b})) {
    Tape::active()->record(out, [a, b, out, kind, r, c]() mutable {
      auto G = out.grad();
      auto A = a.data(), B = b.data();
      if (a.requires_grad()) {
        auto GA = a.mutable_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            GA[i * c + j] += G[i * c + j] * B[broadcast_index(kind, i, j, c)];
      }
      if (b.requires_grad()) {
        auto GB = b.mutable_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            GB[broadcast_index(kind, i, j, c)] += G[i * c + j] * A[i * c + j];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, double factor) {
  return unary(x, [factor](double v) { return std::pair{v * factor, factor}; });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) {
    const double t = std::tanh(v);
    return std::pair{t, 1.0 - t * t};
  });
}

Tensor gelu(const Tensor& x) {
  return unary(x, [](double v) {
    const double cdf = 0.5 * std::erfc(-v * std::numbers::sqrt2 / 2.0);
    const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
    return std::pair{v * cdf, cdf + v * pdf};
  });
}

Tensor dropout(const Tensor& x, double p, std::mt19937_64* rng) {
  if (p < 0.0 || p >= 1.0) throw ContractError("dropout probability must be in [0, 1)");
  if (rng == nullptr || p == 0.0) return x;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  return unary(x, [&](double v) {
    const double s = uniform(*rng) < p ? 0.0 : keep_scale;
    return std::pair{v * s, s};
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  if (axis > 1) throw DimensionError("concat: axis must be 0 or 1");
  const std::size_t r0 = parts[0].rows(), c0 = parts[0].cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (axis == 0 && p.cols() != c0)
      throw DimensionError("concat(axis=0): " + shape_string(parts[0].shape()) + " vs " +
                           shape_string(p.shape()));
    if (axis == 1 && p.rows() != r0)
      throw DimensionError("concat(axis=1): " + shape_string(parts[0].shape()) + " vs " +
                           shape_string(p.shape()));
    total += axis == 0 ? p.rows() : p.cols();
  }
  const std::size_t R = axis == 0 ? total : r0;
  const std::size_t C = axis == 0 ? c0 : total;
  Tensor out({R, C}, 0.0);
  auto O = out.mutable_data();
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    auto P = p.data();
    const std::size_t pr = p.rows(), pc = p.cols();
    for (std::size_t i = 0; i < pr; ++i)
      for (std::size_t j = 0; j < pc; ++j) {
        const std::size_t oi = axis == 0 ? off + i : i;
        const std::size_t oj = axis == 0 ? j : off + j;
        O[oi * C + oj] = P[i * pc + j];
      }
    off += axis == 0 ? pr : pc;
  }
  bool any = false;
  for (const auto& p : parts) any = any || p.requires_grad();
  if (Tape::active() && any) {
    Tape::active()->record(out, [parts, offsets, out, axis, C]() mutable {
      auto G = out.grad();
      for (std::size_t k = 0; k < parts.size(); ++k) {
        auto& p = parts[k];
        if (!p.requires_grad()) continue;
        auto GP = p.mutable_grad();
        const std::size_t pr = p.rows(), pc = p.cols();
        for (std::size_t i = 0; i < pr; ++i)
          for (std::size_t j = 0; j < pc; ++j) {
            const std::size_t oi = axis == 0 ? offsets[k] + i : i;
            const std::size_t oj = axis == 0 ? j : offsets[k] + j;
            GP[i * pc + j] += G[oi * C + oj];
          }
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& x) {
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out({c, r}, 0.0);
  auto X = x.data();
  auto O = out.mutable_data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) O[j * r + i] = X[i * c + j];
  if (Tape::should_record({&x})) {
    Tape::active()->record(out, [x, out, r, c]() mutable {
      auto G = out.grad();
      auto GX = x.mutable_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) GX[i * c + j] += G[j * r + i];
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  const std::size_t r = x.rows(), c = x.cols();
  if (count == 0 || begin + count > r) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " + shape_string(x.shape()));
  }
  auto X = x.data();
  std::vector<double> data(X.begin() + begin * c, X.begin() + (begin + count) * c);
  Tensor out({count, c}, std::move(data));
  if (Tape::should_record({&x})) {
    Tape::active()->record(out, [x, out, begin, c]() mutable {
      auto G = out.grad();
      auto GX = x.mutable_grad();
      for (std::size_t i = 0; i < G.size(); ++i) GX[begin * c + i] += G[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  auto X = x.data();
  double acc = 0.0;
  for (double v : X) acc += v;
  Tensor out = Tensor::scalar(acc);
  if (Tape::should_record({&x})) {
    Tape::active()->record(out, [x, out]() mutable {
      const double g = out.grad()[0];
      for (auto& gx : x.mutable_grad()) gx += g;
    });
  }
  return out;
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

namespace {

Tensor softmax_impl(const Tensor& x, const Tensor* mask) {
  const std::size_t r = x.rows(), c = x.cols();
  if (mask && (mask->rows() != r || mask->cols() != c)) {
    throw DimensionError("softmax_rows: mask " + shape_string(mask->shape()) +
                         " does not match " + shape_string(x.shape()));
  }
  Tensor out = result_like(x);
  auto X = x.data();
  auto Y = out.mutable_data();
  std::vector<double> z(c);
  for (std::size_t i = 0; i < r; ++i) {
    bool any_open = !mask;
    for (std::size_t j = 0; j < c; ++j) {
      const bool open = !mask || mask->data()[i * c + j] != 0.0;
      any_open = any_open || open;
      z[j] = X[i * c + j] + (open ? 0.0 : kMaskedLogit);
    }
    if (!any_open) {
      throw DegenerateRowError("softmax_rows: row " + std::to_string(i) + " is fully masked");
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      z[j] = std::exp(z[j] - mx);
      total += z[j];
    }
    for (std::size_t j = 0; j < c; ++j) {
      const bool open = !mask || mask->data()[i * c + j] != 0.0;
      Y[i * c + j] = open ? z[j] / total : 0.0;
    }
  }
  if (Tape::should_record({&x})) {
    Tape::active()->record(out, [x, out, r, c]() mutable {
      auto G = out.grad();
      auto Y = out.data();
      auto GX = x.mutable_grad();
      for (std::size_t i = 0; i < r; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += Y[i * c + j] * G[i * c + j];
        for (std::size_t j = 0; j < c; ++j)
          GX[i * c + j] += Y[i * c + j] * (G[i * c + j] - dot);
      }
    });
  }
  return out;
}

}  // namespace

Tensor softmax_rows(const Tensor& x) { return softmax_impl(x, nullptr); }
Tensor softmax_rows(const Tensor& x, const Tensor& mask) { return softmax_impl(x, &mask); }

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t r = x.rows(), d = x.cols();
  if (gamma.size() != d || beta.size() != d) {
    throw DimensionError("layer_norm: gamma " + shape_string(gamma.shape()) + " / beta " +
                         shape_string(beta.shape()) + " vs input " + shape_string(x.shape()));
  }
  Tensor out = result_like(x);
  auto X = x.data(), Gm = gamma.data(), Bt = beta.data();
  auto O = out.mutable_data();
  std::vector<double> xhat(r * d), inv_std(r);
  for (std::size_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += X[i * d + j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (X[i * d + j] - mu) * (X[i * d + j] - mu);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (X[i * d + j] - mu) * inv_std[i];
      O[i * d + j] = Gm[j] * xhat[i * d + j] + Bt[j];
    }
  }
  if (Tape::should_record({&x, &gamma, &beta})) {
    Tape::active()->record(out, [x, gamma, beta, out, xhat = std::move(xhat),
                                 inv_std = std::move(inv_std), r, d]() mutable {
      auto G = out.grad();
      auto Gm = gamma.data();
      if (gamma.requires_grad()) {
        auto GG = gamma.mutable_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < d; ++j) GG[j] += G[i * d + j] * xhat[i * d + j];
      }
      if (beta.requires_grad()) {
        auto GB = beta.mutable_grad();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < d; ++j) GB[j] += G[i * d + j];
      }
      if (x.requires_grad()) {
        auto GX = x.mutable_grad();
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t i = 0; i < r; ++i) {
          double mean_g = 0.0, mean_gx = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double gh = G[i * d + j] * Gm[j];
            mean_g += gh;
            mean_gx += gh * xhat[i * d + j];
          }
          mean_g *= inv_d;
          mean_gx *= inv_d;
          for (std::size_t j = 0; j < d; ++j) {
            const double gh = G[i * d + j] * Gm[j];
            GX[i * d + j] += inv_std[i] * (gh - mean_g - xhat[i * d + j] * mean_gx);
          }
        }
      }
    });
  }
  return out;
}

Tensor embedding_gather(const Tensor& table, std::span<const int> ids) {
  const std::size_t vocab = table.rows(), d = table.cols();
  if (ids.empty()) throw DimensionError("embedding_gather: empty id list");
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw IndexError("embedding_gather: id " + std::to_string(id) + " outside table of " +
                       std::to_string(vocab) + " rows");
    }
  }
  Tensor out({ids.size(), d}, 0.0);
  auto T = table.data();
  auto O = out.mutable_data();
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(&T[static_cast<std::size_t>(ids[i]) * d], d, &O[i * d]);
  if (Tape::should_record({&table})) {
    Tape::active()->record(out, [table, out, ids = std::vector<int>(ids.begin(), ids.end()),
                                 d]() mutable {
      auto G = out.grad();
      auto GT = table.mutable_grad();
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
          GT[static_cast<std::size_t>(ids[i]) * d + j] += G[i * d + j];
    });
  }
  return out;
}

Tensor gather2d(const Tensor& src, std::span<const std::size_t> row_index,
                std::span<const std::size_t> col_index, std::size_t rows, std::size_t cols) {
  const std::size_t sr = src.rows(), sc = src.cols();
  if (row_index.size() != rows * cols || col_index.size() != rows * cols) {
    throw DimensionError("gather2d: index arrays do not cover a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " output");
  }
  Tensor out({rows, cols}, 0.0);
  auto S = src.data();
  auto O = out.mutable_data();
  for (std::size_t e = 0; e < rows * cols; ++e) {
    if (row_index[e] >= sr || col_index[e] >= sc) {
      throw IndexError("gather2d: index (" + std::to_string(row_index[e]) + ", " +
                       std::to_string(col_index[e]) + ") outside " + shape_string(src.shape()));
    }
    O[e] = S[row_index[e] * sc + col_index[e]];
  }
  if (Tape::should_record({&src})) {
    Tape::active()->record(
        out, [src, out, ri = std::vector<std::size_t>(row_index.begin(), row_index.end()),
              ci = std::vector<std::size_t>(col_index.begin(), col_index.end()), sc]() mutable {
          auto G = out.grad();
          auto GS = src.mutable_grad();
          for (std::size_t e = 0; e < G.size(); ++e) GS[ri[e] * sc + ci[e]] += G[e];
        });
  }
  return out;
}

}  // namespace dlcf
