#include "bdsc/region.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "bdsc/source.hpp"

namespace bdsc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw precondition_error(what);
}

bool family_less(const std::vector<SubsetView>& a, const std::vector<SubsetView>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), lex_less);
}

std::vector<SubsetView> members_of(const HonestCollection& h, std::uint32_t mask) {
  std::vector<SubsetView> out;
  for (std::size_t k = 0; k < h.size(); ++k)
    if ((mask >> k) & 1u) out.push_back(h.candidates[k]);
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

// True if some member other than `keep` lies inside the union of the remaining members.
bool has_redundant_member(std::span<const SubsetView> v, std::optional<SubsetView> keep) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (keep && v[k] == *keep) continue;
    std::uint32_t rest = 0;
    for (std::size_t l = 0; l < v.size(); ++l)
      if (l != k) rest |= v[l].mask();
    if (v[k].subset_of(SubsetView::from_mask(rest))) return true;
  }
  return false;
}

struct Family {
  std::uint32_t mask;
  std::vector<SubsetView> members;
  int union_size;
};

// Enumeration order: decreasing |U(V)|, then lexicographic member lists.
void sort_families(std::vector<Family>& fams) {
  std::sort(fams.begin(), fams.end(), [](const Family& a, const Family& b) {
    if (a.union_size != b.union_size) return a.union_size > b.union_size;
    return family_less(a.members, b.members);
  });
}

}  // namespace

// ---------------------------------------------------------- HonestCollection

HonestCollection HonestCollection::threshold_family(int m, int t) {
  require(m >= 1 && m <= 20, "threshold families support 1..20 sensors");
  require(t >= 0 && t < m, "threshold t must satisfy 0 <= t < m");
  HonestCollection h;
  h.m = m;
  h.threshold = t;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    auto s = SubsetView::from_mask(mask);
    if (s.size() >= m - t) h.candidates.push_back(s);
  }
  std::sort(h.candidates.begin(), h.candidates.end(), lex_less);
  return h;
}

HonestCollection HonestCollection::explicit_list(int m, std::vector<SubsetView> sets) {
  HonestCollection h;
  h.m = m;
  h.candidates = std::move(sets);
  h.validate();
  return h;
}

int HonestCollection::index_of(SubsetView s) const {
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (candidates[k] == s) return static_cast<int>(k);
  return -1;
}

void HonestCollection::validate() const {
  require(m >= 1 && m <= 32, "number of sensors out of range");
  require(!candidates.empty(), "honest collection must be nonempty");
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    require(!candidates[k].empty(), "candidate honest sets must be nonempty");
    require(candidates[k].within(m), "candidate honest set exceeds number of sensors");
    for (std::size_t l = 0; l < k; ++l) require(!(candidates[l] == candidates[k]), "duplicate candidate honest set");
  }
}

InfoModel InfoModel::perfect(const HonestCollection& h, const std::vector<int>& alphabet_sizes) {
  InfoModel info;
  info.perfect_information = true;
  info.channels.assign(h.size(), {ConditionalPMF::identity(alphabet_sizes)});
  return info;
}

void InfoModel::validate(const HonestCollection& h, const std::vector<int>& alphabet_sizes) const {
  require(channels.size() == h.size(), "one channel list per candidate honest set");
  for (const auto& list : channels) {
    require(!list.empty(), "every candidate needs at least one channel");
    for (const auto& r : list) {
      require(r.input_shape().sizes() == alphabet_sizes, "channel input alphabet must match the source");
      if (perfect_information) require(r.is_identity(), "perfect information requires identity channels");
    }
  }
}

SubsetView union_of(std::span<const SubsetView> v) {
  std::uint32_t mask = 0;
  for (auto s : v) mask |= s.mask();
  return SubsetView::from_mask(mask);
}

// ------------------------------------------------------------------- IPF

MaxEntResult max_entropy_with_marginals(const JointPMF& p, std::span<const SubsetView> v,
                                        const MaxEntOptions& options) {
  require(!v.empty(), "constraint family must be nonempty");
  for (auto s : v) require(!s.empty() && s.within(p.m()), "constraint sets must be nonempty subsets of the sensors");
  const SubsetView u = union_of(v);
  const SubsetView full = SubsetView::full(p.m());
  MaxEntResult out;

  if (std::any_of(v.begin(), v.end(), [&](SubsetView s) { return s == full; })) {
    out.q = p;
    out.value = entropy(p, u);
    out.converged = true;
    out.sweeps = 1;
    return out;
  }

  struct Constraint {
    std::vector<std::uint32_t> proj;
    std::vector<double> target;
    std::vector<double> current;
  };
  std::vector<Constraint> cons;
  for (auto s : v) {
    Constraint c;
    c.proj = p.shape().projection(s);
    c.target = marginal_table(p, s);
    c.current.assign(c.target.size(), 0.0);
    cons.push_back(std::move(c));
  }

  const std::size_t k = p.size();
  std::vector<double> q(k, 1.0 / static_cast<double>(k));
  auto refresh = [&](Constraint& c) {
    std::fill(c.current.begin(), c.current.end(), 0.0);
    for (std::size_t x = 0; x < k; ++x) c.current[c.proj[x]] += q[x];
  };

  double residual = std::numeric_limits<double>::infinity();
  int sweep = 0;
  while (sweep < options.max_sweeps) {
    ++sweep;
    for (auto& c : cons) {
      refresh(c);
      for (std::size_t x = 0; x < k; ++x) {
        const double cur = c.current[c.proj[x]];
        q[x] = cur > 0.0 ? q[x] * (c.target[c.proj[x]] / cur) : 0.0;
      }
    }
    residual = 0.0;
    for (auto& c : cons) {
      refresh(c);
      for (std::size_t y = 0; y < c.target.size(); ++y)
        residual = std::max(residual, std::abs(c.current[y] - c.target[y]));
    }
    if (residual <= options.tolerance) break;
  }
  out.q = JointPMF::normalized(p.alphabet_sizes(), std::move(q));
  out.value = entropy(out.q, u);
  out.converged = residual <= options.tolerance;
  out.residual = residual;
  out.sweeps = sweep;
  return out;
}

// --------------------------------------------------------- perfect region

RegionReport r_star_perfect(const JointPMF& p, const HonestCollection& h, const MaxEntOptions& options) {
  h.validate();
  require(h.m == p.m(), "honest collection and source disagree on the number of sensors");
  require(h.size() <= 20, "honest collection too large to enumerate (more than 20 candidates)");

  const std::uint32_t all = (1u << h.size()) - 1u;
  std::vector<Family> families;
  families.reserve(all);
  for (std::uint32_t mask = 1; mask <= all; ++mask) {
    Family f{mask, members_of(h, mask), 0};
    f.union_size = union_of(f.members).size();
    families.push_back(std::move(f));
  }
  sort_families(families);

  RegionReport report;
  std::map<std::uint32_t, MaxEntResult> cache;
  auto solve = [&](const Family& f) -> const MaxEntResult& {
    auto it = cache.find(f.mask);
    if (it != cache.end()) return it->second;
    auto res = max_entropy_with_marginals(p, f.members, options);
    ++report.evaluated;
    if (!res.converged) ++report.nonconverged;
    return cache.emplace(f.mask, std::move(res)).first->second;
  };

  double best = -1.0;
  for (const auto& f : families) {
    if (has_redundant_member(f.members, std::nullopt)) continue;
    const auto& res = solve(f);
    if (res.value > best + 1e-12) {
      best = res.value;
      report.maximizer_v = f.members;
      report.maximizer_q = res.q;
    }
  }
  report.r_star = best;

  for (std::size_t hk = 0; hk < h.size(); ++hk) {
    const SubsetView honest = h.candidates[hk];
    PairValue pv;
    pv.honest_index = static_cast<int>(hk);
    pv.value = -1.0;
    for (const auto& f : families) {
      if (!((f.mask >> hk) & 1u)) continue;
      if (has_redundant_member(f.members, honest)) continue;
      const auto& res = solve(f);
      if (res.value > pv.value + 1e-12) {
        pv.value = res.value;
        pv.v = f.members;
        pv.q = res.q;
        pv.converged = res.converged;
        pv.residual = res.residual;
      }
    }
    report.per_pair.push_back(std::move(pv));
  }
  return report;
}

double closed_form_t(const JointPMF& p, int t) {
  const int m = p.m();
  require(t >= 1 && t < m, "closed forms need 1 <= t < m");
  const SubsetView full = SubsetView::full(m);
  const double hm = entropy(p, full);
  if (t == m - 1) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += entropy(p, SubsetView::from_indices({i}));
    return sum;
  }
  if (t == 1) {
    double best = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        auto a = SubsetView::from_indices({i});
        auto b = SubsetView::from_indices({j});
        best = std::max(best, conditional_mutual_information(p, a, b, full.minus(a).minus(b)));
      }
    return hm + best;
  }
  if (t == 2) {
    double best = 0.0;
    std::vector<SubsetView> pairs;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) pairs.push_back(SubsetView::from_indices({i, j}));
    for (std::size_t a = 0; a < pairs.size(); ++a)
      for (std::size_t b = a + 1; b < pairs.size(); ++b) {
        if (!pairs[a].intersect(pairs[b]).empty()) continue;
        auto rest = full.minus(pairs[a]).minus(pairs[b]);
        best = std::max(best, conditional_mutual_information(p, pairs[a], pairs[b], rest));
      }
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        for (int k = j + 1; k < m; ++k) {
          auto x = SubsetView::from_indices({i});
          auto y = SubsetView::from_indices({j});
          auto z = SubsetView::from_indices({k});
          auto rest = full.minus(x).minus(y).minus(z);
          best = std::max(best, three_way_information(p, x, y, z, rest));
        }
    return hm + best;
  }
  throw precondition_error("closed form available only for t = 1, t = 2 and t = m - 1");
}

// ------------------------------------------------------ Q-set parameterization

namespace {

// The linear map qbar -> q(x) = p(x_S) sum_w r~(w|x_S) qbar(x_{S^c}|w), stored by rows.
// Variables are laid out as z[w * nc + x_{S^c}].
struct QMap {
  SubsetView s;
  int nw = 0;
  int nc = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> col;  // per x: x_{S^c} index
  std::vector<double> coef;        // per x, per w: p(x_S) r~(w|x_S)
  ConditionalPMF posterior_start;  // p(x_{S^c} | w) under p(x) r(w|x), as a starting point

  std::size_t vars() const { return static_cast<std::size_t>(nw) * nc; }

  void apply(const double* z, double* q) const {
    for (std::size_t x = 0; x < k; ++x) {
      double acc = 0.0;
      const double* cf = coef.data() + x * nw;
      for (int w = 0; w < nw; ++w) acc += cf[w] * z[static_cast<std::size_t>(w) * nc + col[x]];
      q[x] = acc;
    }
  }
  void apply_transpose(const double* g, double* gz) const {
    std::fill(gz, gz + vars(), 0.0);
    for (std::size_t x = 0; x < k; ++x) {
      const double* cf = coef.data() + x * nw;
      for (int w = 0; w < nw; ++w) gz[static_cast<std::size_t>(w) * nc + col[x]] += cf[w] * g[x];
    }
  }
};

QMap build_qmap(const JointPMF& p, SubsetView s, const ConditionalPMF& r) {
  QMap qm;
  qm.s = s;
  qm.k = p.size();
  const SubsetView sc = s.complement(p.m());
  const auto rt = marginalize_info_channel(r, p, s);
  const auto ps = marginal_table(p, s);
  const auto proj_s = p.shape().projection(s);
  qm.nw = r.output_size();
  qm.nc = sc.empty() ? 1 : static_cast<int>(p.shape().sub(sc).total());
  qm.col = sc.empty() ? std::vector<std::uint32_t>(qm.k, 0) : p.shape().projection(sc);
  qm.coef.assign(qm.k * qm.nw, 0.0);
  for (std::size_t x = 0; x < qm.k; ++x)
    for (int w = 0; w < qm.nw; ++w) qm.coef[x * qm.nw + w] = ps[proj_s[x]] * rt(proj_s[x], w);

  std::vector<double> joint(static_cast<std::size_t>(qm.nw) * qm.nc, 0.0);
  for (std::size_t x = 0; x < qm.k; ++x) {
    if (p[x] == 0.0) continue;
    for (int w = 0; w < qm.nw; ++w) joint[static_cast<std::size_t>(w) * qm.nc + qm.col[x]] += p[x] * r(x, w);
  }
  for (int w = 0; w < qm.nw; ++w) {
    double* row = joint.data() + static_cast<std::size_t>(w) * qm.nc;
    double sum = std::accumulate(row, row + qm.nc, 0.0);
    if (sum <= 0.0) {
      std::fill(row, row + qm.nc, 1.0 / qm.nc);
    } else {
      for (int c = 0; c < qm.nc; ++c) row[c] /= sum;
    }
    project_to_simplex(std::span<double>(row, qm.nc));
    double s2 = std::accumulate(row, row + qm.nc, 0.0);
    for (int c = 0; c < qm.nc; ++c) row[c] /= s2;
  }
  qm.posterior_start = ConditionalPMF({qm.nw}, qm.nc, std::move(joint));
  return qm;
}

}  // namespace

FeasibilityResult q_set_feasible(const JointPMF& q, SubsetView s, const ConditionalPMF& r_prime, const JointPMF& p,
                                 const FeasibilityOptions& options) {
  require(q.shape() == p.shape(), "q and p must share an alphabet");
  require(!s.empty() && s.within(p.m()), "candidate set must be a nonempty subset of the sensors");
  const QMap qm = build_qmap(p, s, r_prime);

  LinearFeasibilityProblem prob;
  prob.rows = qm.k;
  prob.cols = qm.vars();
  prob.a.assign(prob.rows * prob.cols, 0.0);
  for (std::size_t x = 0; x < qm.k; ++x)
    for (int w = 0; w < qm.nw; ++w)
      prob.a[x * prob.cols + static_cast<std::size_t>(w) * qm.nc + qm.col[x]] += qm.coef[x * qm.nw + w];
  prob.b.assign(q.mass().begin(), q.mass().end());
  for (int w = 0; w < qm.nw; ++w) {
    ConvexBlock blk;
    blk.begin = static_cast<std::size_t>(w) * qm.nc;
    blk.end = blk.begin + qm.nc;
    prob.blocks.push_back(blk);
  }

  // Start from qbar(x_{S^c}|w) = sum_{x_S} q(x_{S^c}|x_S) post(x_S|w), exact for perfect information.
  const auto proj_s = p.shape().projection(s);
  const auto qs = marginal_table(q, s);
  const auto ps = marginal_table(p, s);
  const auto rt = marginalize_info_channel(r_prime, p, s);
  prob.start.assign(prob.cols, 0.0);
  for (std::size_t x = 0; x < qm.k; ++x) {
    const std::size_t xs = proj_s[x];
    if (qs[xs] <= 0.0) continue;
    for (int w = 0; w < qm.nw; ++w) {
      const double weight = ps[xs] * rt(xs, w);
      prob.start[static_cast<std::size_t>(w) * qm.nc + qm.col[x]] += weight * q[x] / qs[xs];
    }
  }
  return solve_linear_feasibility(prob, options);
}

FeasibilityResult q_ball_feasible(const EmpiricalType& t, SubsetView u, double eta, SubsetView s,
                                  const ConditionalPMF& r_prime, const JointPMF& p, const FeasibilityOptions& options) {
  require(!u.empty() && u.within(p.m()), "type coordinates must be a nonempty subset of the sensors");
  require(!s.empty() && s.subset_of(u), "candidate set must lie inside the type coordinates");
  require(t.shape() == p.shape().sub(u), "type alphabet must match the source on its coordinates");
  const QMap qm = build_qmap(p, s, r_prime);
  const auto proj_u = p.shape().projection(u);
  const std::size_t ku = t.shape().total();
  const std::size_t nz = qm.vars();

  LinearFeasibilityProblem prob;
  prob.rows = ku;
  prob.cols = nz + ku;
  prob.a.assign(prob.rows * prob.cols, 0.0);
  for (std::size_t x = 0; x < qm.k; ++x)
    for (int w = 0; w < qm.nw; ++w)
      prob.a[proj_u[x] * prob.cols + static_cast<std::size_t>(w) * qm.nc + qm.col[x]] += qm.coef[x * qm.nw + w];
  for (std::size_t y = 0; y < ku; ++y) prob.a[y * prob.cols + nz + y] = -1.0;
  prob.b.assign(ku, 0.0);
  for (int w = 0; w < qm.nw; ++w) {
    ConvexBlock blk;
    blk.begin = static_cast<std::size_t>(w) * qm.nc;
    blk.end = blk.begin + qm.nc;
    prob.blocks.push_back(blk);
  }
  const double delta = eta / static_cast<double>(ku);
  ConvexBlock box;
  box.kind = ConvexBlock::Kind::box;
  box.begin = nz;
  box.end = nz + ku;
  for (std::size_t y = 0; y < ku; ++y) {
    box.lo.push_back(std::max(0.0, t.freq(y) - delta));
    box.hi.push_back(std::min(1.0, t.freq(y) + delta));
  }
  prob.blocks.push_back(box);

  prob.start.assign(prob.cols, 0.0);
  auto table = qm.posterior_start.table();
  std::copy(table.begin(), table.end(), prob.start.begin());
  for (std::size_t y = 0; y < ku; ++y) prob.start[nz + y] = t.freq(y);
  return solve_linear_feasibility(prob, options);
}

// ------------------------------------------------------- general optimizer

double entropy_given_side_info(const JointPMF& p, const ConditionalPMF& r, SubsetView a) {
  require(r.input_shape() == p.shape(), "channel input alphabet must match the source");
  const int nw = r.output_size();
  const std::size_t na = a.empty() ? 1 : p.shape().sub(a).total();
  const auto proj = a.empty() ? std::vector<std::uint32_t>(p.size(), 0) : p.shape().projection(a);
  std::vector<double> joint(static_cast<std::size_t>(nw) * na, 0.0);
  std::vector<double> pw(nw, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    for (int w = 0; w < nw; ++w) {
      const double v = p[x] * r(x, w);
      joint[static_cast<std::size_t>(w) * na + proj[x]] += v;
      pw[w] += v;
    }
  }
  return std::max(0.0, entropy_bits(joint) - entropy_bits(pw));
}

namespace {

struct Problem {
  std::vector<QMap> maps;  // maps[0] is the actual honest set with the actual channel
  std::vector<std::size_t> offset;
  std::size_t total_vars = 0;
  std::vector<std::uint32_t> proj_u;
  std::size_t nu = 0;
};

struct Evaluation {
  double objective = 0.0;
  double entropy = 0.0;
  double residual = 0.0;
};

class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const Problem& prob) : prob_(prob) {
    const std::size_t k = prob_.maps[0].k;
    q_.assign(prob_.maps.size(), std::vector<double>(k, 0.0));
    lambda_.assign(prob_.maps.size(), std::vector<double>(k, 0.0));
    grad_q_.assign(prob_.maps.size(), std::vector<double>(k, 0.0));
  }

  void project(std::vector<double>& z) const {
    for (std::size_t b = 0; b < prob_.maps.size(); ++b) {
      const auto& qm = prob_.maps[b];
      for (int w = 0; w < qm.nw; ++w)
        project_to_simplex(std::span<double>(z.data() + prob_.offset[b] + static_cast<std::size_t>(w) * qm.nc, qm.nc));
    }
  }

  Evaluation evaluate(const std::vector<double>& z, std::vector<double>* grad) {
    const std::size_t k = prob_.maps[0].k;
    for (std::size_t b = 0; b < prob_.maps.size(); ++b) prob_.maps[b].apply(z.data() + prob_.offset[b], q_[b].data());
    std::vector<double> qu(prob_.nu, 0.0);
    for (std::size_t x = 0; x < k; ++x) qu[prob_.proj_u[x]] += q_[0][x];
    Evaluation ev;
    ev.entropy = entropy_bits(qu);
    ev.objective = -ev.entropy;
    std::fill(grad_q_[0].begin(), grad_q_[0].end(), 0.0);
    for (std::size_t x = 0; x < k; ++x) {
      const double v = std::max(qu[prob_.proj_u[x]], 1e-300);
      grad_q_[0][x] = std::max(std::log2(v), -80.0) + 1.0 / std::log(2.0);
    }
    for (std::size_t b = 1; b < prob_.maps.size(); ++b) {
      for (std::size_t x = 0; x < k; ++x) {
        const double c = q_[b][x] - q_[0][x];
        ev.residual = std::max(ev.residual, std::abs(c));
        ev.objective += lambda_[b][x] * c + 0.5 * mu_ * c * c;
        const double g = lambda_[b][x] + mu_ * c;
        grad_q_[b][x] = g;
        grad_q_[0][x] -= g;
      }
    }
    if (grad) {
      grad->assign(prob_.total_vars, 0.0);
      for (std::size_t b = 0; b < prob_.maps.size(); ++b)
        prob_.maps[b].apply_transpose(grad_q_[b].data(), grad->data() + prob_.offset[b]);
    }
    return ev;
  }

  // Projected gradient with backtracking on the current augmented Lagrangian.
  Evaluation minimize(std::vector<double>& z, int max_inner) {
    std::vector<double> grad, trial;
    Evaluation cur = evaluate(z, &grad);
    double step = step_;
    for (int it = 0; it < max_inner; ++it) {
      bool accepted = false;
      Evaluation next;
      double moved = 0.0;
      for (int bt = 0; bt < 60; ++bt) {
        trial = z;
        for (std::size_t v = 0; v < trial.size(); ++v) trial[v] -= step * grad[v];
        project(trial);
        double lin = 0.0, sq = 0.0;
        moved = 0.0;
        for (std::size_t v = 0; v < trial.size(); ++v) {
          const double d = trial[v] - z[v];
          lin += grad[v] * d;
          sq += d * d;
          moved = std::max(moved, std::abs(d));
        }
        next = evaluate(trial, nullptr);
        if (next.objective <= cur.objective + lin + sq / (2.0 * step) + 1e-15) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      z.swap(trial);
      cur = evaluate(z, &grad);
      step = std::min(step * 2.0, 1e3);
      if (moved < 1e-13) break;
    }
    step_ = step;
    return cur;
  }

  void update_multipliers() {
    for (std::size_t b = 1; b < prob_.maps.size(); ++b)
      for (std::size_t x = 0; x < q_[b].size(); ++x) lambda_[b][x] += mu_ * (q_[b][x] - q_[0][x]);
  }
  void grow_penalty() { mu_ = std::min(mu_ * 4.0, 1e9); }
  const std::vector<double>& q0() const { return q_[0]; }

 private:
  const Problem& prob_;
  std::vector<std::vector<double>> q_, lambda_, grad_q_;
  double mu_ = 10.0;
  double step_ = 1.0;
};

struct Solved {
  double value = 0.0;
  double residual = 0.0;
  std::vector<double> z;
  std::vector<double> q;
};

Solved solve_family(const Problem& prob, const GeneralOptions& opt, std::uint64_t seed) {
  Solved best;
  best.value = -1.0;
  best.residual = std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(1, opt.starts); ++start) {
    std::vector<double> z(prob.total_vars, 0.0);
    if (start == 0) {
      for (std::size_t b = 0; b < prob.maps.size(); ++b) {
        auto tbl = prob.maps[b].posterior_start.table();
        std::copy(tbl.begin(), tbl.end(), z.begin() + prob.offset[b]);
      }
    } else {
      Rng rng(derive_seed(seed, "general-start", static_cast<std::uint64_t>(start)));
      for (auto& v : z) v = -std::log(1.0 - rng.uniform01());
    }
    AugmentedLagrangian al(prob);
    al.project(z);
    Evaluation ev;
    double prev_res = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < opt.max_outer; ++outer) {
      ev = al.minimize(z, opt.max_inner);
      if (ev.residual < opt.residual_target) break;
      al.update_multipliers();
      if (ev.residual > 0.25 * prev_res) al.grow_penalty();
      prev_res = ev.residual;
    }
    ev = al.evaluate(z, nullptr);
    const bool ok = ev.residual <= 1e-6;
    const bool best_ok = best.residual <= 1e-6;
    if ((ok && (!best_ok || ev.entropy > best.value)) || (!ok && !best_ok && ev.residual < best.residual)) {
      best.value = ev.entropy;
      best.residual = ev.residual;
      best.z = z;
      best.q = al.q0();
    }
  }
  return best;
}

ConditionalPMF q_bar_from_block(const QMap& qm, const double* z) {
  std::vector<double> rows(z, z + qm.vars());
  for (int w = 0; w < qm.nw; ++w) {
    double* row = rows.data() + static_cast<std::size_t>(w) * qm.nc;
    for (int c = 0; c < qm.nc; ++c) row[c] = std::max(row[c], 0.0);
    const double sum = std::accumulate(row, row + qm.nc, 0.0);
    for (int c = 0; c < qm.nc; ++c) row[c] = sum > 0.0 ? row[c] / sum : 1.0 / qm.nc;
  }
  return ConditionalPMF({qm.nw}, qm.nc, std::move(rows));
}

// qbar(x_T | w) = q*(x_T | x_H) read off the identity channel's output w = x.
ConditionalPMF perfect_q_bar(const JointPMF& q, SubsetView honest) {
  const int m = q.m();
  const SubsetView traitors = honest.complement(m);
  const std::size_t k = q.size();
  const int nt = static_cast<int>(q.shape().sub(traitors).total());
  const auto proj_h = q.shape().projection(honest);
  const auto proj_t = q.shape().projection(traitors);
  const auto qh = marginal_table(q, honest);
  std::vector<double> joint_ht(qh.size() * nt, 0.0);
  for (std::size_t x = 0; x < k; ++x) joint_ht[proj_h[x] * nt + proj_t[x]] += q[x];
  std::vector<double> rows(k * nt, 0.0);
  for (std::size_t w = 0; w < k; ++w) {
    const std::size_t xh = proj_h[w];
    double* row = rows.data() + w * nt;
    if (qh[xh] <= 0.0) {
      std::fill(row, row + nt, 1.0 / nt);
      continue;
    }
    double sum = 0.0;
    for (int t = 0; t < nt; ++t) sum += joint_ht[xh * nt + t];
    for (int t = 0; t < nt; ++t) row[t] = joint_ht[xh * nt + t] / sum;
  }
  return ConditionalPMF({static_cast<int>(k)}, nt, std::move(rows));
}

}  // namespace

GeneralResult r_star_general(const JointPMF& p, const HonestCollection& h, const InfoModel& info, SubsetView h_true,
                             const ConditionalPMF& r, const GeneralOptions& options) {
  h.validate();
  info.validate(h, p.alphabet_sizes());
  require(p.size() <= 256, "joint alphabet exceeds the 256-cell guard");
  const int hk = h.index_of(h_true);
  require(hk >= 0, "actual honest set must belong to the collection");
  require(r.input_shape() == p.shape(), "channel input alphabet must match the source");
  const SubsetView traitors = h_true.complement(p.m());

  GeneralResult out;
  if (info.perfect_information && !options.force_numeric) {
    auto report = r_star_perfect(p, h);
    const auto& pv = report.per_pair[hk];
    out.value = pv.value;
    out.residual = pv.residual;
    out.converged = pv.converged;
    out.v = pv.v;
    out.q = pv.q;
    if (!traitors.empty()) out.q_bar = perfect_q_bar(pv.q, h_true);
    return out;
  }

  std::vector<Family> families;
  const std::uint32_t all = (1u << h.size()) - 1u;
  for (std::uint32_t mask = 1; mask <= all; ++mask) {
    if (!((mask >> hk) & 1u)) continue;
    Family f{mask, members_of(h, mask), 0};
    if (has_redundant_member(f.members, h_true)) continue;
    f.union_size = union_of(f.members).size();
    families.push_back(std::move(f));
  }
  sort_families(families);

  const QMap base = build_qmap(p, h_true, r);
  out.value = -1.0;
  out.residual = std::numeric_limits<double>::infinity();
  bool have_ok = false;
  for (const auto& f : families) {
    std::vector<int> others;
    for (std::size_t k = 0; k < h.size(); ++k)
      if (((f.mask >> k) & 1u) && static_cast<int>(k) != hk) others.push_back(static_cast<int>(k));

    // Cartesian product over channel choices r' in R(S) for each other member S.
    std::vector<std::size_t> choice(others.size(), 0);
    while (true) {
      Problem prob;
      prob.maps.push_back(base);
      for (std::size_t o = 0; o < others.size(); ++o)
        prob.maps.push_back(build_qmap(p, h.candidates[others[o]], info.channels[others[o]][choice[o]]));
      for (const auto& qm : prob.maps) {
        prob.offset.push_back(prob.total_vars);
        prob.total_vars += qm.vars();
      }
      const SubsetView u = union_of(f.members);
      prob.proj_u = p.shape().projection(u);
      prob.nu = p.shape().sub(u).total();

      Solved sol;
      if (others.empty()) {
        // Only the actual honest set: H_q(X_H) = H_p(X_H) for every feasible q.
        sol.value = entropy(p, h_true);
        sol.residual = 0.0;
        auto tbl = base.posterior_start.table();
        sol.z.assign(tbl.begin(), tbl.end());
        sol.q.assign(base.k, 0.0);
        base.apply(sol.z.data(), sol.q.data());
      } else {
        sol = solve_family(prob, options, derive_seed(options.seed, "general-family", f.mask));
      }
      const bool ok = sol.residual <= 1e-6;
      if ((ok && (!have_ok || sol.value > out.value + 1e-12)) ||
          (!ok && !have_ok && sol.residual < out.residual)) {
        have_ok = have_ok || ok;
        out.value = sol.value;
        out.residual = sol.residual;
        out.v = f.members;
        out.q = JointPMF::normalized(p.alphabet_sizes(), sol.q);
        if (!traitors.empty()) out.q_bar = q_bar_from_block(base, sol.z.data());
      }

      std::size_t pos = 0;
      while (pos < others.size() && ++choice[pos] == info.channels[others[pos]].size()) choice[pos++] = 0;
      if (pos == others.size()) break;
    }
  }
  out.converged = have_ok;
  return out;
}

// ------------------------------------------------------------ fixed rate

bool sw_region_contains(std::span<const double> rates, const JointPMF& p, SubsetView s) {
  require(static_cast<int>(rates.size()) == p.m(), "one rate per sensor");
  for (double r : rates) require(r >= 0.0, "rates must be nonnegative");
  const std::uint32_t full = s.mask();
  for (std::uint32_t sub = full; sub; sub = (sub - 1) & full) {
    const auto sp = SubsetView::from_mask(sub);
    double sum = 0.0;
    for (int i : sp.indices()) sum += rates[i];
    if (sum < conditional_entropy(p, sp, s.minus(sp)) - kTol) return false;
  }
  return true;
}

namespace {

bool deterministic_pair_applies(const JointPMF& p, const InfoModel& info, std::size_t s2, SubsetView inter) {
  for (const auto& r : info.channels[s2])
    if (entropy_given_side_info(p, r, inter) < kTol) return true;
  return false;
}

}  // namespace

bool fixed_rate_region_contains(std::span<const double> rates, const JointPMF& p, const HonestCollection& h,
                                const InfoModel& info, FixedRateKind kind) {
  for (auto s : h.candidates)
    if (!sw_region_contains(rates, p, s)) return false;
  if (kind == FixedRateKind::randomized) return true;
  for (std::size_t a = 0; a < h.size(); ++a)
    for (std::size_t b = 0; b < h.size(); ++b) {
      const SubsetView inter = h.candidates[a].intersect(h.candidates[b]);
      if (inter.empty()) continue;
      if (deterministic_pair_applies(p, info, b, inter) && !sw_region_contains(rates, p, inter)) return false;
    }
  return true;
}

std::vector<Facet> fixed_rate_facets(const JointPMF& p, const HonestCollection& h, const InfoModel& info,
                                     FixedRateKind kind) {
  std::map<std::uint32_t, double> bound;
  auto add_sw = [&](SubsetView s) {
    const std::uint32_t full = s.mask();
    for (std::uint32_t sub = full; sub; sub = (sub - 1) & full) {
      const auto sp = SubsetView::from_mask(sub);
      const double v = conditional_entropy(p, sp, s.minus(sp));
      auto [it, inserted] = bound.emplace(sub, v);
      if (!inserted) it->second = std::max(it->second, v);
    }
  };
  for (auto s : h.candidates) add_sw(s);
  if (kind == FixedRateKind::deterministic) {
    for (std::size_t a = 0; a < h.size(); ++a)
      for (std::size_t b = 0; b < h.size(); ++b) {
        const SubsetView inter = h.candidates[a].intersect(h.candidates[b]);
        if (!inter.empty() && deterministic_pair_applies(p, info, b, inter)) add_sw(inter);
      }
  }
  std::vector<Facet> out;
  for (auto [mask, v] : bound) out.push_back({SubsetView::from_mask(mask), v});
  std::sort(out.begin(), out.end(), [](const Facet& x, const Facet& y) { return lex_less(x.sum_over, y.sum_over); });
  return out;
}

std::vector<double> min_sum_rate_point(std::span<const Facet> facets, int m) {
  require(m >= 1 && m <= 12, "vertex enumeration supports 1..12 sensors");
  // Rows: every facet, then R_i >= 0.
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const auto& f : facets) {
    std::vector<double> row(m, 0.0);
    for (int i : f.sum_over.indices()) row[i] = 1.0;
    rows.push_back(row);
    rhs.push_back(f.bound);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<double> row(m, 0.0);
    row[i] = 1.0;
    rows.push_back(row);
    rhs.push_back(0.0);
  }
  const int nr = static_cast<int>(rows.size());
  std::vector<double> best;
  double best_sum = std::numeric_limits<double>::infinity();
  std::vector<int> pick(m);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a(r, c) = rows[pick[r]][c];
      b(r) = rhs[pick[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) {
      Eigen::VectorXd x = lu.solve(b);
      bool feasible = true;
      for (int r = 0; r < nr && feasible; ++r) {
        double lhs = 0.0;
        for (int c = 0; c < m; ++c) lhs += rows[r][c] * x(c);
        feasible = lhs >= rhs[r] - 1e-9;
      }
      const double sum = x.sum();
      if (feasible && sum < best_sum - 1e-12) {
        best_sum = sum;
        best.assign(x.data(), x.data() + m);
        for (double& v : best) v = std::max(v, 0.0);
      }
    }
    int pos = m - 1;
    while (pos >= 0 && pick[pos] == nr - m + pos) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int k = pos + 1; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }
  if (best.empty()) throw precondition_error("rate region has no vertex");
  return best;
}

}  // namespace bdsc
