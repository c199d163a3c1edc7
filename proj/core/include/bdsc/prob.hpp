#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdsc {

using Symbol = std::uint8_t;
using Sequence = std::vector<Symbol>;

// Default absolute tolerance for invariant checks.
inline constexpr double kTol = 1e-9;

class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A subset of sensor indices {0..m-1}, stored as a bitmask (m <= 32).
class SubsetView {
 public:
  SubsetView() = default;

  static SubsetView from_mask(std::uint32_t mask) { return SubsetView(mask); }
  // Indices must be strictly increasing and below 32.
  static SubsetView from_indices(std::span<const int> idx);
  static SubsetView from_indices(std::initializer_list<int> idx);
  static SubsetView full(int m);

  std::uint32_t mask() const { return mask_; }
  int size() const;
  bool empty() const { return mask_ == 0; }
  bool contains(int i) const { return (mask_ >> i) & 1u; }
  bool subset_of(SubsetView o) const { return (mask_ & ~o.mask_) == 0; }
  bool within(int m) const;
  std::vector<int> indices() const;
  // Position of sensor i among the sorted indices.
  int rank_of(int i) const;

  SubsetView unite(SubsetView o) const { return SubsetView(mask_ | o.mask_); }
  SubsetView intersect(SubsetView o) const { return SubsetView(mask_ & o.mask_); }
  SubsetView minus(SubsetView o) const { return SubsetView(mask_ & ~o.mask_); }
  SubsetView complement(int m) const;

  std::string to_string() const;

  friend bool operator==(SubsetView a, SubsetView b) { return a.mask_ == b.mask_; }

 private:
  explicit SubsetView(std::uint32_t mask) : mask_(mask) {}
  std::uint32_t mask_ = 0;
};

// Ordering by sorted index lists, e.g. {0,1} < {0,1,2} < {0,2} < {1}.
bool lex_less(SubsetView a, SubsetView b);

// Row-major multi-index helper; the last coordinate varies fastest.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int rank() const { return static_cast<int>(sizes_.size()); }
  std::size_t total() const { return total_; }
  std::size_t stride(int k) const { return strides_[k]; }
  int digit(std::size_t flat, int k) const {
    return static_cast<int>((flat / strides_[k]) % sizes_[k]);
  }
  void decode(std::size_t flat, std::span<int> digits) const;
  std::size_t encode(std::span<const int> digits) const;

  // Shape over the coordinates in s (ascending).
  Shape sub(SubsetView s) const;
  // For each flat index of this shape, the flat index of its restriction to s.
  std::vector<std::uint32_t> projection(SubsetView s) const;

  friend bool operator==(const Shape& a, const Shape& b) { return a.sizes_ == b.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

class JointPMF {
 public:
  JointPMF() = default;
  // Throws precondition_error unless entries are >= 0 and sum to 1 within 1e-12.
  JointPMF(std::vector<int> alphabet_sizes, std::vector<double> mass);

  static JointPMF uniform(std::vector<int> alphabet_sizes);
  static JointPMF point_mass(std::vector<int> alphabet_sizes, std::size_t cell);
  // Divides by the total before validating; for tables produced numerically.
  static JointPMF normalized(std::vector<int> alphabet_sizes, std::vector<double> mass);

  const Shape& shape() const { return shape_; }
  const std::vector<int>& alphabet_sizes() const { return shape_.sizes(); }
  int m() const { return shape_.rank(); }
  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t cell) const { return mass_[cell]; }
  std::span<const double> mass() const { return mass_; }

 private:
  Shape shape_;
  std::vector<double> mass_;
};

// r(w | x): one row over the output alphabet per joint input symbol.
class ConditionalPMF {
 public:
  ConditionalPMF() = default;
  ConditionalPMF(std::vector<int> input_sizes, int output_size, std::vector<double> rows);

  // W = X, output alphabet is the flattened input alphabet.
  static ConditionalPMF identity(std::vector<int> input_sizes);
  // Every row equal to `row`.
  static ConditionalPMF constant(std::vector<int> input_sizes, std::vector<double> row);

  const Shape& input_shape() const { return input_; }
  int output_size() const { return output_size_; }
  std::size_t input_total() const { return input_.total(); }
  double operator()(std::size_t x, int w) const { return rows_[x * output_size_ + w]; }
  std::span<const double> row(std::size_t x) const {
    return {rows_.data() + x * output_size_, static_cast<std::size_t>(output_size_)};
  }
  std::span<const double> table() const { return rows_; }
  bool is_identity() const;

  // Rows that were filled uniformly because their conditioning event had probability zero.
  const std::vector<std::size_t>& degenerate_rows() const { return degenerate_; }
  void set_degenerate_rows(std::vector<std::size_t> rows) { degenerate_ = std::move(rows); }

 private:
  Shape input_;
  int output_size_ = 0;
  std::vector<double> rows_;
  std::vector<std::size_t> degenerate_;
};

class EmpiricalType {
 public:
  EmpiricalType() = default;
  EmpiricalType(std::vector<int> alphabet_sizes, std::vector<std::int64_t> counts, std::int64_t n);

  const Shape& shape() const { return shape_; }
  const std::vector<int>& alphabet_sizes() const { return shape_.sizes(); }
  std::int64_t n() const { return n_; }
  std::span<const std::int64_t> counts() const { return counts_; }
  double freq(std::size_t cell) const { return static_cast<double>(counts_[cell]) / static_cast<double>(n_); }
  JointPMF normalized() const;

 private:
  Shape shape_;
  std::vector<std::int64_t> counts_;
  std::int64_t n_ = 0;
};

// Plain Shannon entropy in bits of a nonnegative vector that sums to one.
double entropy_bits(std::span<const double> probs);

JointPMF marginal(const JointPMF& p, SubsetView s);
// Marginal table as a raw vector; an empty s yields {1.0}.
std::vector<double> marginal_table(const JointPMF& p, SubsetView s);

double entropy(const JointPMF& p, SubsetView s);
double entropy(const JointPMF& p);
double conditional_entropy(const JointPMF& p, SubsetView target, SubsetView given);
// I(A;B|C) for pairwise disjoint A, B, C.
double conditional_mutual_information(const JointPMF& p, SubsetView a, SubsetView b, SubsetView c);
// I(X;Y;Z|W) = H(X|W) + H(Y|W) + H(Z|W) - H(XYZ|W), pairwise disjoint arguments.
double three_way_information(const JointPMF& p, SubsetView x, SubsetView y, SubsetView z, SubsetView w);

// Joint type of the given sequences; sequences[k] ranges over alphabet_sizes[k].
EmpiricalType type_of(std::span<const Sequence* const> sequences, std::span<const int> alphabet_sizes);
EmpiricalType type_of(std::span<const Sequence> sequences, std::span<const int> alphabet_sizes);

// |q(x) - t(x)/n| <= eta / |alphabet| in every cell.
bool eta_ball_contains(const JointPMF& q, const EmpiricalType& t, double eta);
bool strongly_typical(std::span<const Sequence> sequences, const JointPMF& p, double eps);
bool strongly_typical(std::span<const Sequence* const> sequences, const JointPMF& p, double eps);

// r~(w | x_h) = sum over x outside h of p(x_{h^c} | x_h) r(w | x).
ConditionalPMF marginalize_info_channel(const ConditionalPMF& r, const JointPMF& p, SubsetView h);

}  // namespace bdsc
