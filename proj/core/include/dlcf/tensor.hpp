#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dlcf {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

// Dense row-major float64 array with an optional gradient buffer.
//
// Tensor is a handle: copies share storage, so a parameter held by a model
// and the same parameter captured by a tape entry are one object. Use
// clone() for an independent copy.
class Tensor {
 public:
  // Undefined handle; defined() is false. Only useful as a placeholder.
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);

  bool defined() const noexcept { return static_cast<bool>(impl_); }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  // Matrix view of the shape: rank-1 tensors are treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j);
  // Value of a single-element tensor.
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  void mark_requires_grad() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  // Allocates a zero gradient buffer on first use. Gradients are auxiliary
  // state, writable through const handles so backward rules can accumulate.
  std::span<double> mutable_grad() const;
  void zero_grad() const;

  Tensor clone() const;
  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;

  Impl& impl() const;
};

// Ordered record of differentiable operations, in execution order.
//
// A tape records only while a Tape::Recording guard for it is alive on the
// current thread, and only operations with at least one input that requires
// a gradient. Outputs of recorded operations require gradients themselves.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  class Recording {
   public:
    explicit Recording(Tape& tape);
    ~Recording();
    Recording(const Recording&) = delete;
    Recording& operator=(const Recording&) = delete;

   private:
    Tape* previous_;
  };

  // The tape recording on this thread, or nullptr.
  static Tape* active() noexcept;

  // True when an op over `inputs` should be recorded on the active tape.
  static bool should_record(std::initializer_list<const Tensor*> inputs);

  // Registers `output` as produced by an op whose backward rule is `fn`.
  // `fn` reads output.grad() and accumulates into its inputs' gradients.
  void record(Tensor output, BackwardFn fn);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  void clear() noexcept { entries_.clear(); }

  // Seeds d(loss)/d(loss) = 1, replays backward rules in reverse order, then
  // clears the tape.
  void backward(const Tensor& loss);

 private:
  struct Entry {
    Tensor output;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
};

// Free-function form of Tape::backward.
void backward(const Tensor& loss, Tape& tape);

// ---- operations ----------------------------------------------------------
// All operations treat rank-1 tensors as 1 x n row matrices.

Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise with row broadcast: `b` may match `a`, be a column (n x 1) or a
// single row (1 x d or [d]).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

Tensor tanh(const Tensor& x);
// Exact gelu: x * Phi(x).
Tensor gelu(const Tensor& x);

// Inverted dropout. Identity when rng is null (evaluation) or p == 0.
Tensor dropout(const Tensor& x, double p, std::mt19937_64* rng);

// Dropout rate plus the generator that drives it; a null rng means
// evaluation mode.
struct DropoutContext {
  double p = 0.0;
  std::mt19937_64* rng = nullptr;

  Tensor operator()(const Tensor& x) const { return dropout(x, p, rng); }
};

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor transpose(const Tensor& x);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Row softmax. Entries where mask == 0 get weight exactly 0.
Tensor softmax_rows(const Tensor& x);
Tensor softmax_rows(const Tensor& x, const Tensor& mask);

// Additive bias applied to masked logits before normalization.
inline constexpr double kMaskedLogit = -1e9;

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

// Row i of the result is table[ids[i]]; backward scatters additively.
Tensor embedding_gather(const Tensor& table, std::span<const int> ids);

// out[r][c] = src[row_index[r*cols+c]][col_index[r*cols+c]].
Tensor gather2d(const Tensor& src, std::span<const std::size_t> row_index,
                std::span<const std::size_t> col_index, std::size_t rows, std::size_t cols);

}  // namespace dlcf
