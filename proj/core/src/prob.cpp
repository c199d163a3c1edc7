#include "bdsc/prob.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bdsc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw precondition_error(what);
}

void check_sizes(const std::vector<int>& sizes) {
  require(!sizes.empty() && sizes.size() <= 32, "alphabet list must have 1..32 entries");
  for (int s : sizes) require(s >= 1 && s <= 256, "alphabet sizes must lie in 1..256");
}

}  // namespace

// ---------------------------------------------------------------- SubsetView

SubsetView SubsetView::from_indices(std::span<const int> idx) {
  std::uint32_t mask = 0;
  int prev = -1;
  for (int i : idx) {
    require(i > prev, "subset indices must be strictly increasing");
    require(i < 32, "subset index out of range");
    mask |= 1u << i;
    prev = i;
  }
  return SubsetView(mask);
}

SubsetView SubsetView::from_indices(std::initializer_list<int> idx) {
  return from_indices(std::span<const int>(idx.begin(), idx.size()));
}

SubsetView SubsetView::full(int m) {
  require(m >= 0 && m <= 32, "m out of range");
  return SubsetView(m == 32 ? ~0u : ((1u << m) - 1u));
}

int SubsetView::size() const { return std::popcount(mask_); }

bool SubsetView::within(int m) const { return m >= 32 || (mask_ >> m) == 0; }

std::vector<int> SubsetView::indices() const {
  std::vector<int> out;
  for (std::uint32_t m = mask_; m; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

int SubsetView::rank_of(int i) const {
  require(contains(i), "sensor not in subset");
  return std::popcount(mask_ & ((1u << i) - 1u));
}

SubsetView SubsetView::complement(int m) const { return full(m).minus(*this); }

std::string SubsetView::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i : indices()) {
    if (!first) os << ',';
    os << i;
    first = false;
  }
  os << '}';
  return os.str();
}

bool lex_less(SubsetView a, SubsetView b) {
  auto x = a.indices();
  auto y = b.indices();
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

// --------------------------------------------------------------------- Shape

Shape::Shape(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  strides_.assign(sizes_.size(), 1);
  total_ = 1;
  for (int k = rank() - 1; k >= 0; --k) {
    require(sizes_[k] >= 1, "alphabet sizes must be positive");
    strides_[k] = total_;
    total_ *= static_cast<std::size_t>(sizes_[k]);
  }
}

void Shape::decode(std::size_t flat, std::span<int> digits) const {
  for (int k = rank() - 1; k >= 0; --k) {
    digits[k] = static_cast<int>(flat % sizes_[k]);
    flat /= sizes_[k];
  }
}

std::size_t Shape::encode(std::span<const int> digits) const {
  std::size_t flat = 0;
  for (int k = 0; k < rank(); ++k) flat = flat * sizes_[k] + digits[k];
  return flat;
}

Shape Shape::sub(SubsetView s) const {
  require(s.within(rank()), "subset exceeds shape rank");
  std::vector<int> out;
  for (int i : s.indices()) out.push_back(sizes_[i]);
  return Shape(std::move(out));
}

std::vector<std::uint32_t> Shape::projection(SubsetView s) const {
  require(s.within(rank()), "subset exceeds shape rank");
  const auto idx = s.indices();
  std::vector<std::uint32_t> out(total_);
  std::vector<int> digits(rank(), 0);
  for (std::size_t flat = 0; flat < total_; ++flat) {
    std::size_t t = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) t = t * sizes_[idx[k]] + digits[idx[k]];
    out[flat] = static_cast<std::uint32_t>(t);
    for (int k = rank() - 1; k >= 0; --k) {
      if (++digits[k] < sizes_[k]) break;
      digits[k] = 0;
    }
  }
  return out;
}

// ------------------------------------------------------------------ JointPMF

JointPMF::JointPMF(std::vector<int> alphabet_sizes, std::vector<double> mass) {
  check_sizes(alphabet_sizes);
  shape_ = Shape(std::move(alphabet_sizes));
  require(mass.size() == shape_.total(), "mass table size does not match alphabet");
  double sum = 0.0;
  for (double v : mass) {
    require(std::isfinite(v) && v >= 0.0, "probabilities must be finite and nonnegative");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "probabilities must sum to 1");
  mass_ = std::move(mass);
}

JointPMF JointPMF::uniform(std::vector<int> alphabet_sizes) {
  check_sizes(alphabet_sizes);
  const std::size_t total = Shape(alphabet_sizes).total();
  return normalized(std::move(alphabet_sizes), std::vector<double>(total, 1.0));
}

JointPMF JointPMF::point_mass(std::vector<int> alphabet_sizes, std::size_t cell) {
  check_sizes(alphabet_sizes);
  std::vector<double> mass(Shape(alphabet_sizes).total(), 0.0);
  require(cell < mass.size(), "cell out of range");
  mass[cell] = 1.0;
  return JointPMF(std::move(alphabet_sizes), std::move(mass));
}

JointPMF JointPMF::normalized(std::vector<int> alphabet_sizes, std::vector<double> mass) {
  double sum = 0.0;
  for (double& v : mass) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
    sum += v;
  }
  require(sum > 0.0, "cannot normalize an all-zero table");
  for (double& v : mass) v /= sum;
  return JointPMF(std::move(alphabet_sizes), std::move(mass));
}

// ------------------------------------------------------------ ConditionalPMF

ConditionalPMF::ConditionalPMF(std::vector<int> input_sizes, int output_size, std::vector<double> rows)
    : input_(std::move(input_sizes)), output_size_(output_size), rows_(std::move(rows)) {
  require(output_size_ >= 1, "output alphabet must be nonempty");
  require(rows_.size() == input_.total() * static_cast<std::size_t>(output_size_), "row table size mismatch");
  for (std::size_t x = 0; x < input_.total(); ++x) {
    double sum = 0.0;
    for (double v : row(x)) {
      require(std::isfinite(v) && v >= 0.0, "channel entries must be finite and nonnegative");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-12, "channel rows must sum to 1");
  }
}

ConditionalPMF ConditionalPMF::identity(std::vector<int> input_sizes) {
  const std::size_t total = Shape(input_sizes).total();
  std::vector<double> rows(total * total, 0.0);
  for (std::size_t x = 0; x < total; ++x) rows[x * total + x] = 1.0;
  return ConditionalPMF(std::move(input_sizes), static_cast<int>(total), std::move(rows));
}

ConditionalPMF ConditionalPMF::constant(std::vector<int> input_sizes, std::vector<double> row) {
  const std::size_t total = Shape(input_sizes).total();
  std::vector<double> rows;
  rows.reserve(total * row.size());
  for (std::size_t x = 0; x < total; ++x) rows.insert(rows.end(), row.begin(), row.end());
  const int out = static_cast<int>(row.size());
  return ConditionalPMF(std::move(input_sizes), out, std::move(rows));
}

bool ConditionalPMF::is_identity() const {
  if (static_cast<std::size_t>(output_size_) != input_.total()) return false;
  for (std::size_t x = 0; x < input_.total(); ++x) {
    for (int w = 0; w < output_size_; ++w) {
      if ((*this)(x, w) != (static_cast<std::size_t>(w) == x ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

// ------------------------------------------------------------- EmpiricalType

EmpiricalType::EmpiricalType(std::vector<int> alphabet_sizes, std::vector<std::int64_t> counts, std::int64_t n)
    : shape_(std::move(alphabet_sizes)), counts_(std::move(counts)), n_(n) {
  require(n_ >= 1, "type denominator must be positive");
  require(counts_.size() == shape_.total(), "count table size mismatch");
  std::int64_t sum = 0;
  for (auto c : counts_) {
    require(c >= 0, "counts must be nonnegative");
    sum += c;
  }
  require(sum == n_, "counts must sum to n");
}

JointPMF EmpiricalType::normalized() const {
  std::vector<double> mass(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) mass[i] = freq(i);
  return JointPMF::normalized(shape_.sizes(), std::move(mass));
}

// ------------------------------------------------------------------ entropy

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double v : probs) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

std::vector<double> marginal_table(const JointPMF& p, SubsetView s) {
  require(s.within(p.m()), "subset exceeds number of sensors");
  if (s.empty()) return {1.0};
  if (s == SubsetView::full(p.m())) return {p.mass().begin(), p.mass().end()};
  const auto proj = p.shape().projection(s);
  std::vector<double> out(p.shape().sub(s).total(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) out[proj[x]] += p[x];
  return out;
}

JointPMF marginal(const JointPMF& p, SubsetView s) {
  require(!s.empty(), "marginal over an empty subset");
  return JointPMF::normalized(p.shape().sub(s).sizes(), marginal_table(p, s));
}

double entropy(const JointPMF& p, SubsetView s) {
  if (s.empty()) return 0.0;
  return entropy_bits(marginal_table(p, s));
}

double entropy(const JointPMF& p) { return entropy_bits(p.mass()); }

double conditional_entropy(const JointPMF& p, SubsetView target, SubsetView given) {
  require(target.intersect(given).empty(), "target and given must be disjoint");
  const double h = entropy(p, target.unite(given)) - entropy(p, given);
  return std::max(h, 0.0);
}

double conditional_mutual_information(const JointPMF& p, SubsetView a, SubsetView b, SubsetView c) {
  require(a.intersect(b).empty() && a.intersect(c).empty() && b.intersect(c).empty(),
          "arguments must be pairwise disjoint");
  return entropy(p, a.unite(c)) + entropy(p, b.unite(c)) - entropy(p, a.unite(b).unite(c)) - entropy(p, c);
}

double three_way_information(const JointPMF& p, SubsetView x, SubsetView y, SubsetView z, SubsetView w) {
  require(x.intersect(y).empty() && x.intersect(z).empty() && y.intersect(z).empty() &&
              w.intersect(x.unite(y).unite(z)).empty(),
          "arguments must be pairwise disjoint");
  const double hw = entropy(p, w);
  return entropy(p, x.unite(w)) + entropy(p, y.unite(w)) + entropy(p, z.unite(w)) -
         entropy(p, x.unite(y).unite(z).unite(w)) - 2.0 * hw;
}

// -------------------------------------------------------------------- types

EmpiricalType type_of(std::span<const Sequence* const> sequences, std::span<const int> alphabet_sizes) {
  require(!sequences.empty(), "type of an empty sequence list");
  require(sequences.size() == alphabet_sizes.size(), "one alphabet size per sequence");
  const std::size_t n = sequences.front()->size();
  require(n >= 1, "sequences must be nonempty");
  for (const auto* s : sequences) require(s->size() == n, "sequence length mismatch");
  std::vector<int> sizes(alphabet_sizes.begin(), alphabet_sizes.end());
  const Shape shape(sizes);
  std::vector<std::int64_t> counts(shape.total(), 0);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t cell = 0;
    for (std::size_t k = 0; k < sequences.size(); ++k) {
      const int v = (*sequences[k])[t];
      require(v < sizes[k], "symbol outside its alphabet");
      cell = cell * sizes[k] + v;
    }
    ++counts[cell];
  }
  return EmpiricalType(std::move(sizes), std::move(counts), static_cast<std::int64_t>(n));
}

EmpiricalType type_of(std::span<const Sequence> sequences, std::span<const int> alphabet_sizes) {
  std::vector<const Sequence*> ptrs;
  for (const auto& s : sequences) ptrs.push_back(&s);
  return type_of(std::span<const Sequence* const>(ptrs), alphabet_sizes);
}

bool eta_ball_contains(const JointPMF& q, const EmpiricalType& t, double eta) {
  require(q.shape() == t.shape(), "alphabet mismatch between distribution and type");
  const double tol = eta / static_cast<double>(q.size()) + 1e-12;
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (std::abs(q[x] - t.freq(x)) > tol) return false;
  }
  return true;
}

bool strongly_typical(std::span<const Sequence* const> sequences, const JointPMF& p, double eps) {
  return eta_ball_contains(p, type_of(sequences, p.alphabet_sizes()), eps);
}

bool strongly_typical(std::span<const Sequence> sequences, const JointPMF& p, double eps) {
  return eta_ball_contains(p, type_of(sequences, p.alphabet_sizes()), eps);
}

// ------------------------------------------------------------ info channels

ConditionalPMF marginalize_info_channel(const ConditionalPMF& r, const JointPMF& p, SubsetView h) {
  require(!h.empty(), "honest set must be nonempty");
  require(h.within(p.m()), "honest set exceeds number of sensors");
  require(r.input_shape() == p.shape(), "channel input alphabet must match the source alphabet");
  const auto proj = p.shape().projection(h);
  const std::size_t hx = p.shape().sub(h).total();
  const int nw = r.output_size();
  std::vector<double> rows(hx * nw, 0.0);
  std::vector<double> weight(hx, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    weight[proj[x]] += p[x];
    auto rr = r.row(x);
    for (int w = 0; w < nw; ++w) rows[proj[x] * nw + w] += p[x] * rr[w];
  }
  std::vector<std::size_t> degenerate;
  for (std::size_t xh = 0; xh < hx; ++xh) {
    double* row = rows.data() + xh * nw;
    if (weight[xh] <= 0.0) {
      std::fill(row, row + nw, 1.0 / nw);
      degenerate.push_back(xh);
      continue;
    }
    double sum = 0.0;
    for (int w = 0; w < nw; ++w) sum += row[w];
    for (int w = 0; w < nw; ++w) row[w] /= sum;
  }
  ConditionalPMF out(p.shape().sub(h).sizes(), nw, std::move(rows));
  out.set_degenerate_rows(std::move(degenerate));
  return out;
}

}  // namespace bdsc
