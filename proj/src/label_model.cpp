#include "mixsbm/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixsbm {
namespace {

// log(Gamma(x + z) / Gamma(x)), zero when x + z <= 0.
inline double psi(double x, Count z) {
  if (z == 0) return 0.0;
  const double y = x + static_cast<double>(z);
  if (y <= 0.0) return 0.0;
  return log_gamma(y) - log_gamma(x);
}

}  // namespace

LabelModel::LabelModel(std::vector<const Network*> networks, std::vector<Labels> labels,
                       int K, Hyperparams hyper)
    : networks_(std::move(networks)), labels_(std::move(labels)), hyper_(hyper) {
  if (networks_.size() != labels_.size())
    throw SbmError("one label vector per network required");
  if (K < 1) throw SbmError("K must be positive");
  stats_ = CountStats::zeros(K);
  block_sizes_.reserve(networks_.size());
  for (std::size_t m = 0; m < networks_.size(); ++m) {
    CountStats c = count_stats(*networks_[m], labels_[m], K);
    block_sizes_.push_back(c.s);
    stats_ += c;
  }
}

void LabelModel::neighbor_blocks(std::size_t m, Vertex i, std::vector<Count>& in,
                                 std::vector<Count>& out) const {
  const int K = this->K();
  in.assign(K, 0);
  out.assign(K, 0);
  const Labels& z = labels_[m];
  for (Vertex j : networks_[m]->in_neighbors(i)) ++in[z[j]];
  for (Vertex j : networks_[m]->out_neighbors(i)) ++out[z[j]];
}

double LabelModel::delta_with(std::size_t m, Vertex i, int h, const std::vector<Count>& in,
                              const std::vector<Count>& out) const {
  const int g = labels_[m][i];
  if (h == g) return 0.0;
  const int K = this->K();
  const CountVector& sm = block_sizes_[m];
  const double eta = hyper_.eta;
  const double zeta = hyper_.zeta;

  auto cell = [&](int k, int l) {
    Count da = 0;
    Count dr = 0;
    if (k == g) { da -= out[l]; dr -= sm(l); }
    if (k == h) { da += out[l]; dr += sm(l); }
    if (l == g) { da -= in[k]; dr -= sm(k); }
    if (l == h) { da += in[k]; dr += sm(k); }
    if (k == g && l == g) dr += 2;
    if ((k == g && l == h) || (k == h && l == g)) dr -= 1;
    const Count db = dr - da;
    const double a = static_cast<double>(stats_.a(k, l));
    const double b = static_cast<double>(stats_.b(k, l));
    return psi(eta + a, da) + psi(zeta + b, db) - psi(eta + zeta + a + b, dr);
  };

  double delta = 0.0;
  for (int l = 0; l < K; ++l) {
    delta += cell(g, l);
    delta += cell(h, l);
  }
  for (int k = 0; k < K; ++k) {
    if (k == g || k == h) continue;
    delta += cell(k, g);
    delta += cell(k, h);
  }
  const double sg = static_cast<double>(stats_.s(g));
  const double sh = static_cast<double>(stats_.s(h));
  delta += std::log((hyper_.alpha + sh) / (hyper_.alpha + sg - 1.0));
  if (stats_.s(g) == 1) delta -= empty_block_penalty(K, hyper_.alpha, stats_.n_total);
  return delta;
}

double LabelModel::swap_delta(std::size_t m, Vertex i, int h) const {
  if (h == labels_[m][i]) return 0.0;
  std::vector<Count> in;
  std::vector<Count> out;
  neighbor_blocks(m, i, in, out);
  return delta_with(m, i, h, in, out);
}

void LabelModel::move(std::size_t m, Vertex i, int h) {
  const int g = labels_[m][i];
  if (h == g) return;
  const int K = this->K();
  if (h < 0 || h >= K) throw SbmError("target block out of range");
  std::vector<Count> in;
  std::vector<Count> out;
  neighbor_blocks(m, i, in, out);
  CountVector& sm = block_sizes_[m];
  for (int l = 0; l < K; ++l) {
    stats_.a(g, l) -= out[l];
    stats_.a(h, l) += out[l];
    stats_.r(g, l) -= sm(l);
    stats_.r(h, l) += sm(l);
  }
  for (int k = 0; k < K; ++k) {
    stats_.a(k, g) -= in[k];
    stats_.a(k, h) += in[k];
    stats_.r(k, g) -= sm(k);
    stats_.r(k, h) += sm(k);
  }
  stats_.r(g, g) += 2;
  stats_.r(g, h) -= 1;
  stats_.r(h, g) -= 1;
  --sm(g);
  ++sm(h);
  --stats_.s(g);
  ++stats_.s(h);
  // b changes only in rows/columns g and h.
  for (int l = 0; l < K; ++l) {
    for (int k : {g, h}) {
      stats_.b(k, l) = stats_.r(k, l) - stats_.a(k, l);
      stats_.b(l, k) = stats_.r(l, k) - stats_.a(l, k);
    }
  }
  labels_[m][i] = h;
  if (stats_.s(g) == 0) drop_empty_blocks();
}

int LabelModel::drop_empty_blocks() {
  const int K = this->K();
  std::vector<int> keep;
  std::vector<int> remap(K, -1);
  for (int k = 0; k < K; ++k) {
    if (stats_.s(k) > 0) {
      remap[k] = static_cast<int>(keep.size());
      keep.push_back(k);
    }
  }
  const int K2 = static_cast<int>(keep.size());
  if (K2 == K || K2 == 0) return 0;
  CountStats next = CountStats::zeros(K2);
  next.n_total = stats_.n_total;
  next.m_count = stats_.m_count;
  for (int k = 0; k < K2; ++k) {
    next.s(k) = stats_.s(keep[k]);
    for (int l = 0; l < K2; ++l) {
      next.a(k, l) = stats_.a(keep[k], keep[l]);
      next.b(k, l) = stats_.b(keep[k], keep[l]);
      next.r(k, l) = stats_.r(keep[k], keep[l]);
    }
  }
  stats_ = std::move(next);
  for (auto& sm : block_sizes_) {
    CountVector s2(K2);
    for (int k = 0; k < K2; ++k) s2(k) = sm(keep[k]);
    sm = std::move(s2);
  }
  for (auto& z : labels_)
    for (auto& zi : z) zi = remap[zi];
  return K - K2;
}

SweepReport LabelModel::maximize(Rng& rng, const SweepOptions& options) {
  SweepReport report;
  drop_empty_blocks();
  double icl = this->icl();
  if (options.record_trace) report.trace.push_back(icl);

  std::vector<std::pair<std::uint32_t, Vertex>> order;
  for (std::size_t m = 0; m < networks_.size(); ++m)
    for (Vertex i = 0; i < networks_[m]->size(); ++i)
      order.emplace_back(static_cast<std::uint32_t>(m), i);

  std::vector<Count> in;
  std::vector<Count> out;
  while (report.sweeps < options.max_sweeps) {
    ++report.sweeps;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t accepted_this_sweep = 0;
    for (const auto& [m, i] : order) {
      if (K() == 1) break;
      neighbor_blocks(m, i, in, out);
      int best_h = labels_[m][i];
      double best = kMinMoveGain;
      for (int h = 0; h < K(); ++h) {
        const double d = delta_with(m, i, h, in, out);
        if (d > best) {
          best = d;
          best_h = h;
        }
      }
      if (best_h != labels_[m][i]) {
        move(m, i, best_h);
        icl += best;
        ++accepted_this_sweep;
        if (options.record_trace) report.trace.push_back(icl);
      }
    }
    report.accepted += accepted_this_sweep;
    if (accepted_this_sweep == 0) {
      report.converged = true;
      break;
    }
  }
  report.icl = this->icl();
  return report;
}

Labels random_full_labels(Vertex n, int K, Rng& rng) {
  if (K < 1 || K > n) throw SbmError("need 1 <= K <= n for a full labeling");
  std::uniform_int_distribution<int> block(0, K - 1);
  Labels z(n);
  std::vector<int> used(K);
  for (;;) {
    std::fill(used.begin(), used.end(), 0);
    for (auto& zi : z) {
      zi = block(rng);
      used[zi] = 1;
    }
    if (std::all_of(used.begin(), used.end(), [](int u) { return u != 0; })) return z;
  }
}

}  // namespace mixsbm
