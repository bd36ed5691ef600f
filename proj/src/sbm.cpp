#include "mixsbm/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mixsbm {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);  // reentrant: no write to the global signgam
}

double log_beta(double x, double y) {
  return log_gamma(x) + log_gamma(y) - log_gamma(x + y);
}

void SbmParams::validate() const {
  const int K = this->K();
  if (K <= 0) throw SbmError("SBM needs at least one block");
  if (gamma.rows() != K || gamma.cols() != K)
    throw SbmError("gamma must be " + std::to_string(K) + "x" + std::to_string(K));
  for (int k = 0; k < K; ++k)
    if (!(pi(k) >= 0.0 && pi(k) <= 1.0))
      throw SbmError("pi[" + std::to_string(k) + "] outside [0,1]");
  if (std::abs(pi.sum() - 1.0) > 1e-12) throw SbmError("pi does not sum to 1");
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      if (!(gamma(k, l) >= 0.0 && gamma(k, l) <= 1.0))
        throw SbmError("gamma[" + std::to_string(k) + "][" + std::to_string(l) +
                       "] outside [0,1]");
}

SbmParams SbmParams::permuted(const BlockPermutation& perm) const {
  const int K = this->K();
  SbmParams out{Eigen::VectorXd(K), Eigen::MatrixXd(K, K)};
  for (int k = 0; k < K; ++k) {
    out.pi(k) = pi(perm[k]);
    for (int l = 0; l < K; ++l) out.gamma(k, l) = gamma(perm[k], perm[l]);
  }
  return out;
}

nlohmann::json to_json(const SbmParams& params) {
  nlohmann::json j;
  j["pi"] = std::vector<double>(params.pi.data(), params.pi.data() + params.K());
  auto rows = nlohmann::json::array();
  for (int k = 0; k < params.K(); ++k) {
    std::vector<double> row(params.K());
    for (int l = 0; l < params.K(); ++l) row[l] = params.gamma(k, l);
    rows.push_back(row);
  }
  j["gamma"] = std::move(rows);
  return j;
}

SbmParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("pi") || !j.contains("gamma"))
    throw SbmError("SBM parameters need 'pi' and 'gamma'");
  try {
    const auto pi = j.at("pi").get<std::vector<double>>();
    const auto gamma = j.at("gamma").get<std::vector<std::vector<double>>>();
    const int K = static_cast<int>(pi.size());
    SbmParams p{Eigen::VectorXd(K), Eigen::MatrixXd(K, K)};
    if (static_cast<int>(gamma.size()) != K)
      throw SbmError("gamma must have " + std::to_string(K) + " rows");
    for (int k = 0; k < K; ++k) {
      p.pi(k) = pi[k];
      if (static_cast<int>(gamma[k].size()) != K)
        throw SbmError("gamma row " + std::to_string(k) + " has wrong length");
      for (int l = 0; l < K; ++l) p.gamma(k, l) = gamma[k][l];
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw SbmError(std::string("malformed SBM parameters: ") + e.what());
  }
}

void Hyperparams::validate() const {
  if (!(alpha > 0 && eta > 0 && zeta > 0 && lambda > 0))
    throw SbmError("hyperparameters must be strictly positive");
}

CountStats CountStats::zeros(int K) {
  CountStats c;
  c.s = CountVector::Zero(K);
  c.a = CountMatrix::Zero(K, K);
  c.b = CountMatrix::Zero(K, K);
  c.r = CountMatrix::Zero(K, K);
  return c;
}

CountStats& CountStats::operator+=(const CountStats& other) {
  if (K() != other.K()) throw SbmError("adding count statistics with different K");
  s += other.s;
  a += other.a;
  b += other.b;
  r += other.r;
  n_total += other.n_total;
  m_count += other.m_count;
  return *this;
}

CountStats CountStats::permuted(const BlockPermutation& perm) const {
  const int K = this->K();
  CountStats out = zeros(K);
  out.n_total = n_total;
  out.m_count = m_count;
  for (int k = 0; k < K; ++k) {
    out.s(k) = s(perm[k]);
    for (int l = 0; l < K; ++l) {
      out.a(k, l) = a(perm[k], perm[l]);
      out.b(k, l) = b(perm[k], perm[l]);
      out.r(k, l) = r(perm[k], perm[l]);
    }
  }
  return out;
}

CountStats CountStats::padded(int K) const {
  if (K < this->K()) throw SbmError("cannot pad to fewer blocks");
  CountStats out = zeros(K);
  out.n_total = n_total;
  out.m_count = m_count;
  const int k0 = this->K();
  out.s.head(k0) = s;
  out.a.topLeftCorner(k0, k0) = a;
  out.b.topLeftCorner(k0, k0) = b;
  out.r.topLeftCorner(k0, k0) = r;
  return out;
}

CountStats count_stats(const Network& network, const Labels& labels, int K) {
  const Vertex n = network.size();
  if (static_cast<Vertex>(labels.size()) != n)
    throw SbmError("label vector length does not match network size");
  CountStats c = CountStats::zeros(K);
  for (Vertex i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= K)
      throw SbmError("label " + std::to_string(labels[i]) + " out of range for K=" +
                     std::to_string(K));
    ++c.s(labels[i]);
  }
  for (Vertex i = 0; i < n; ++i)
    for (Vertex j : network.out_neighbors(i)) ++c.a(labels[i], labels[j]);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      c.r(k, l) = k == l ? c.s(k) * (c.s(k) - 1) : c.s(k) * c.s(l);
  c.b = c.r - c.a;
  c.n_total = n;
  c.m_count = 1;
  return c;
}

CountStats count_stats(const std::vector<const Network*>& networks,
                       const std::vector<Labels>& labels, int K) {
  if (networks.size() != labels.size())
    throw SbmError("one label vector per network required");
  CountStats total = CountStats::zeros(K);
  for (std::size_t m = 0; m < networks.size(); ++m)
    total += count_stats(*networks[m], labels[m], K);
  return total;
}

SampledNetwork sample_network(const SbmParams& params, Vertex n, Rng& rng) {
  if (n < 1) throw SbmError("network needs at least one vertex");
  params.validate();
  std::discrete_distribution<int> block(params.pi.data(), params.pi.data() + params.K());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Labels z(n);
  for (auto& zi : z) zi = block(rng);
  std::vector<Edge> edges;
  for (Vertex i = 0; i < n; ++i)
    for (Vertex j = 0; j < n; ++j)
      if (i != j && unif(rng) < params.gamma(z[i], z[j])) edges.emplace_back(i, j);
  return {Network(n, edges), std::move(z)};
}

double icl_sbm(const CountStats& stats, const Hyperparams& hyper) {
  const int K = stats.K();
  const double eta = hyper.eta;
  const double zeta = hyper.zeta;
  const double alpha = hyper.alpha;
  double icl = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      const double a = static_cast<double>(stats.a(k, l));
      const double b = static_cast<double>(stats.b(k, l));
      icl += log_gamma(eta + a) + log_gamma(zeta + b) - log_gamma(eta + zeta + a + b);
    }
    icl += log_gamma(alpha + static_cast<double>(stats.s(k)));
  }
  icl -= static_cast<double>(K) * K * log_beta(eta, zeta);
  icl += log_gamma(K * alpha) - log_gamma(K * alpha + static_cast<double>(stats.n_total));
  icl -= K * log_gamma(alpha);
  return icl;
}

double empty_block_penalty(int K, double alpha, Count n_total) {
  const double n = static_cast<double>(n_total);
  return log_gamma(K * alpha) - log_gamma((K - 1) * alpha) +
         log_gamma((K - 1) * alpha + n) - log_gamma(K * alpha + n);
}

SbmParams map_estimate_unclamped(const CountStats& stats, const Hyperparams& hyper,
                                 DegeneratePolicy policy) {
  const int K = stats.K();
  SbmParams p{Eigen::VectorXd(K), Eigen::MatrixXd(K, K)};
  const double pi_den = static_cast<double>(stats.n_total) + K * (hyper.alpha - 1.0);
  if (pi_den <= 0.0) {
    if (policy == DegeneratePolicy::Throw)
      throw SbmError("degenerate MAP denominator for block proportions");
    for (int k = 0; k < K; ++k)
      p.pi(k) = (static_cast<double>(stats.s(k)) + hyper.alpha) /
                (static_cast<double>(stats.n_total) + K * hyper.alpha);
  } else {
    for (int k = 0; k < K; ++k)
      p.pi(k) = (static_cast<double>(stats.s(k)) + hyper.alpha - 1.0) / pi_den;
  }
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < K; ++l) {
      const double a = static_cast<double>(stats.a(k, l));
      const double b = static_cast<double>(stats.b(k, l));
      const double den = a + b + hyper.eta + hyper.zeta - 2.0;
      if (den <= 0.0) {
        if (policy == DegeneratePolicy::Throw) {
          std::ostringstream msg;
          msg << "degenerate MAP denominator for block pair (" << k << "," << l << ")";
          throw SbmError(msg.str());
        }
        p.gamma(k, l) = (a + hyper.eta) / (a + b + hyper.eta + hyper.zeta);
      } else {
        p.gamma(k, l) = (a + hyper.eta - 1.0) / den;
      }
    }
  }
  return p;
}

SbmParams map_estimate(const CountStats& stats, const Hyperparams& hyper,
                       DegeneratePolicy policy) {
  SbmParams p = map_estimate_unclamped(stats, hyper, policy);
  constexpr double lo = kMapClamp;
  constexpr double hi = 1.0 - kMapClamp;
  for (int k = 0; k < p.K(); ++k) {
    p.pi(k) = std::clamp(p.pi(k), lo, hi);
    for (int l = 0; l < p.K(); ++l) p.gamma(k, l) = std::clamp(p.gamma(k, l), lo, hi);
  }
  p.pi /= p.pi.sum();
  return p;
}

}  // namespace mixsbm
