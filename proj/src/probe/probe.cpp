// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/probe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chemlab/diagnostics/stats.hpp"
#include "chemlab/fingerprints/fingerprint.hpp"
#include "chemlab/molgraph/canonical.hpp"
#include "chemlab/util/rng.hpp"

namespace chemlab::probe {

Eigen::MatrixXd featurize_model(const PropertyDataset& ds, nn::Model<float>& model,
                                const tok::Vocabulary& src_vocab, nn::Pooling pooling,
                                std::uint64_t seed, int batch_rows) {
  const auto& cfg = model.config();
  const auto n = ds.records.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), cfg.d_model * nn::pooling_factor(pooling));
  for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(batch_rows)) {
    const auto end = std::min(n, i + static_cast<std::size_t>(batch_rows));
    std::vector<std::vector<int>> seqs;
    for (std::size_t k = i; k < end; ++k) {
      const auto smiles = mol::randomized_smiles(ds.records[k].molecule, derive_seed(seed, k));
      auto ids = tok::tokenize(smiles, src_vocab, tok::SequenceKind::Source).ids;
      if (static_cast<int>(ids.size()) > cfg.max_len) {
        ids.resize(static_cast<std::size_t>(cfg.max_len));
        ids.back() = src_vocab.eos();
      }
      seqs.push_back(std::move(ids));
    }
    const auto src = nn::TokenBatch::pack(seqs, cfg.pad_id);
    const auto pooled = nn::pool_memory<float>(model.memory(src), src, cfg.pad_id, pooling);
    out.middleRows(static_cast<Eigen::Index>(i), pooled.rows()) = pooled.cast<double>();
  }
  return out;
}

Eigen::MatrixXd featurize_ecfp(const PropertyDataset& ds) {
  const fp::FingerprintConfig cfg{fp::FingerprintKind::Ecfp, 2, 7, kBaselineWidth};
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.records.size()), kBaselineWidth);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    for (const int bit : fp::fingerprint(ds.records[i].molecule, cfg).on_bits()) {
      out(static_cast<Eigen::Index>(i), bit) = 1.0;
    }
  }
  return out;
}

Eigen::MatrixXd featurize_random(const PropertyDataset& ds, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ds.records.size()), kBaselineWidth);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = rng.uniform();
    }
  }
  return out;
}

double rmse(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size() || truth.empty()) {
    throw std::invalid_argument("rmse needs equal, non-empty inputs");
  }
  double s = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    s += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  }
  return std::sqrt(s / static_cast<double>(truth.size()));
}

double auroc(std::span<const double> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw std::invalid_argument("auroc needs equal-length inputs");
  }
  const auto n = labels.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) {
      ++j;
    }
    const double r = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      rank[idx[k]] = r;
    }
    i = j + 1;
  }
  double pos = 0;
  double rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1.0) {
      ++pos;
      rank_sum += rank[i];
    }
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) {
    throw DegenerateLabels("auroc needs both classes");
  }
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

std::vector<double> default_penalties() {
  std::vector<double> out;
  for (int k = -3; k <= 4; ++k) {
    out.push_back(std::pow(10.0, k));
  }
  return out;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd rows_of(const MatrixXd& x, const std::vector<int>& idx) {
  MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  }
  return out;
}

std::vector<double> targets_of(const PropertyDataset& ds, const std::vector<int>& idx) {
  std::vector<double> out;
  for (const int i : idx) {
    out.push_back(ds.records[static_cast<std::size_t>(i)].target);
  }
  return out;
}

// Training rows projected onto their own span. With X = U S V^T the
// penalized fit over w = V z is the same problem over the n-column Z = U S,
// and ||w|| = ||z||.
struct Basis {
  VectorXd mean;
  VectorXd scale;
  MatrixXd z;     // n x r
  MatrixXd proj;  // p x r, maps standardized rows to z coordinates
};

Basis make_basis(const MatrixXd& train) {
  Basis b;
  b.mean = train.colwise().mean();
  const MatrixXd centered = train.rowwise() - b.mean.transpose();
  b.scale = (centered.array().square().colwise().sum() / static_cast<double>(train.rows())).sqrt();
  for (Eigen::Index j = 0; j < b.scale.size(); ++j) {
    b.scale(j) = b.scale(j) > 1e-12 ? 1.0 / b.scale(j) : 0.0;
  }
  const MatrixXd xs = centered * b.scale.asDiagonal();
  const MatrixXd gram = xs * xs.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    if (eig.eigenvalues()(k) > 1e-10 * top && eig.eigenvalues()(k) > 0) {
      keep.push_back(k);
    }
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  b.z.resize(train.rows(), r);
  MatrixXd u_over_s(train.rows(), r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const double s = std::sqrt(eig.eigenvalues()(keep[static_cast<std::size_t>(c)]));
    const auto u = eig.eigenvectors().col(keep[static_cast<std::size_t>(c)]);
    b.z.col(c) = u * s;
    u_over_s.col(c) = u / s;
  }
  b.proj = xs.transpose() * u_over_s;
  return b;
}

MatrixXd to_basis(const Basis& b, const MatrixXd& x) {
  return ((x.rowwise() - b.mean.transpose()) * b.scale.asDiagonal()) * b.proj;
}

struct LinearFit {
  VectorXd w;
  double bias = 0;
  VectorXd predict(const MatrixXd& z) const { return (z * w).array() + bias; }
};

LinearFit ridge(const MatrixXd& z, const VectorXd& y, double lambda) {
  LinearFit f;
  const double ybar = y.mean();
  const VectorXd zbar = z.colwise().mean();
  const MatrixXd zc = z.rowwise() - zbar.transpose();
  MatrixXd a = zc.transpose() * zc;
  a.diagonal().array() += lambda;
  f.w = a.ldlt().solve(zc.transpose() * (y.array() - ybar).matrix());
  f.bias = ybar - zbar.dot(f.w);
  return f;
}

LinearFit logistic(const MatrixXd& z, const VectorXd& y, double lambda) {
  const auto n = z.rows();
  const auto r = z.cols();
  MatrixXd a(n, r + 1);
  a.leftCols(r) = z;
  a.col(r).setOnes();
  VectorXd theta = VectorXd::Zero(r + 1);
  for (int iter = 0; iter < 50; ++iter) {
    const VectorXd eta = a * theta;
    const VectorXd p = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    VectorXd grad = a.transpose() * (p - y);
    grad.head(r) += lambda * theta.head(r);
    const VectorXd wts = (p.array() * (1.0 - p.array())).max(1e-12).matrix();
    MatrixXd h = a.transpose() * wts.asDiagonal() * a;
    h.diagonal().head(r).array() += lambda;
    h(r, r) += 1e-9;
    const VectorXd delta = h.ldlt().solve(grad);
    theta -= delta;
    if (delta.lpNorm<Eigen::Infinity>() < 1e-10) {
      break;
    }
  }
  LinearFit f;
  f.w = theta.head(r);
  f.bias = theta(r);
  return f;
}

std::vector<double> to_vector(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ProbeResult fit_score(const Eigen::MatrixXd& features, const PropertyDataset& ds,
                      const std::vector<Fold>& folds, const std::vector<double>& penalties) {
  if (features.rows() != static_cast<Eigen::Index>(ds.records.size())) {
    throw std::invalid_argument("feature rows must match dataset records");
  }
  if (penalties.empty()) {
    throw std::invalid_argument("penalty grid is empty");
  }
  const bool regression = ds.task == TaskType::Regression;
  ProbeResult res;
  res.dataset = ds.name;
  res.task = std::string(to_string(ds.task));
  res.predictor = regression ? "ridge" : "logistic_l2";
  res.metric = regression ? "rmse" : "auroc";
  for (const auto& fold : folds) {
    const auto y_train = targets_of(ds, fold.train);
    const auto y_valid = targets_of(ds, fold.valid);
    const auto y_test = targets_of(ds, fold.test);
    if (!regression) {
      for (const auto* part : {&y_train, &y_valid, &y_test}) {
        const auto pos = std::count(part->begin(), part->end(), 1.0);
        if (pos == 0 || pos == static_cast<long>(part->size())) {
          throw DegenerateLabels("a fold part holds a single class");
        }
      }
    }
    const auto basis = make_basis(rows_of(features, fold.train));
    const MatrixXd z_valid = to_basis(basis, rows_of(features, fold.valid));
    const MatrixXd z_test = to_basis(basis, rows_of(features, fold.test));
    const VectorXd y = Eigen::Map<const VectorXd>(y_train.data(), static_cast<Eigen::Index>(y_train.size()));
    const auto fit = [&](double lambda) { return regression ? ridge(basis.z, y, lambda) : logistic(basis.z, y, lambda); };
    const auto score = [&](const LinearFit& f, const MatrixXd& z, const std::vector<double>& truth) {
      const auto pred = to_vector(f.predict(z));
      return regression ? rmse(truth, pred) : auroc(truth, pred);
    };
    double best_lambda = penalties.front();
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const double lambda : penalties) {
      const double s = score(fit(lambda), z_valid, y_valid);
      const bool better = std::isnan(best) || (regression ? s < best : s > best);
      if (better) {
        best = s;
        best_lambda = lambda;
      }
    }
    res.fold_penalties.push_back(best_lambda);
    res.fold_scores.push_back(score(fit(best_lambda), z_test, y_test));
  }
  res.mean = diag::mean(res.fold_scores);
  res.sd = res.fold_scores.size() > 1 ? diag::sample_sd(res.fold_scores) : 0.0;
  return res;
}

void to_json(nlohmann::json& j, const ProbeResult& r) {
  j = {{"dataset", r.dataset},       {"task", r.task},
       {"descriptor", r.descriptor}, {"predictor", r.predictor},
       {"metric", r.metric},         {"fold_scores", r.fold_scores},
       {"fold_penalties", r.fold_penalties},
       {"mean", r.mean},             {"sd", r.sd},
       {"checkpoint_step", r.checkpoint_step}};
}

void write_summary_csv(std::ostream& out, const std::vector<ProbeResult>& results) {
  out << "descriptor,checkpoint_step,dataset,metric,mean,sd\n";
  for (const auto& r : results) {
    out << r.descriptor << ',' << r.checkpoint_step << ',' << r.dataset << ',' << r.metric << ','
        << r.mean << ',' << r.sd << '\n';
  }
}

}  // namespace chemlab::probe
