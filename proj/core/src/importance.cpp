#include "semann/importance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "semann/errors.hpp"
#include "semann/parallel.hpp"
#include "semann/rng.hpp"

namespace semann {

namespace {

constexpr std::uint64_t kFoldStream = 0x666f6c64;   // "fold"
constexpr std::uint64_t kTrainStream = 0x7472616e;  // "tran"
constexpr std::uint64_t kShuffleStream = 0x73686600;

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd =
      v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

}  // namespace

CvResult cross_validate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const AnnConfig& config) {
  const int n = static_cast<int>(x.rows());
  if (config.folds < 2) throw ConfigError("cross_validate: folds must be >= 2");
  if (n < config.folds)
    throw DataError("cross_validate: fewer rows than folds");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng fold_rng = Rng::derive(config.seed, kFoldStream);
  fold_rng.shuffle(order);

  // near-equal fold sizes: the first (n mod folds) folds get one extra row
  std::vector<std::vector<int>> fold_rows(static_cast<std::size_t>(config.folds));
  const int base = n / config.folds;
  const int extra = n % config.folds;
  int cursor = 0;
  for (int f = 0; f < config.folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    if (size < 1) throw DataError("cross_validate: a fold has no rows");
    auto& rows = fold_rows[static_cast<std::size_t>(f)];
    rows.assign(order.begin() + cursor, order.begin() + cursor + size);
    cursor += size;
  }

  CvResult result;
  result.folds.resize(static_cast<std::size_t>(config.folds));
  parallel_for_index(config.folds, config.workers, [&](int f) {
    FoldResult fr;
    fr.fold = f;
    fr.test_indices = fold_rows[static_cast<std::size_t>(f)];
    for (int g = 0; g < config.folds; ++g) {
      if (g == f) continue;
      const auto& rows = fold_rows[static_cast<std::size_t>(g)];
      fr.train_indices.insert(fr.train_indices.end(), rows.begin(), rows.end());
    }
    AnnConfig fold_config = config;
    fold_config.seed = Rng::derive(config.seed, kTrainStream, f).next_u64();
    const Eigen::MatrixXd x_train = take_rows(x, fr.train_indices);
    const Eigen::VectorXd y_train = take(y, fr.train_indices);
    fr.model = train_scg(x_train, y_train, fold_config);
    fr.train_rmse = fr.model.rmse_scaled(x_train, y_train);
    fr.test_rmse = fr.model.rmse_scaled(take_rows(x, fr.test_indices),
                                        take(y, fr.test_indices));
    result.folds[static_cast<std::size_t>(f)] = std::move(fr);
  });

  std::vector<double> train, test;
  for (const auto& fr : result.folds) {
    train.push_back(fr.train_rmse);
    test.push_back(fr.test_rmse);
    for (const auto& w : fr.model.warnings)
      result.warnings.push_back("fold " + std::to_string(fr.fold) + ": " + w);
  }
  std::tie(result.train_mean, result.train_sd) = mean_sd(train);
  std::tie(result.test_mean, result.test_sd) = mean_sd(test);
  return result;
}

ImportanceReport permutation_importance(const CvResult& cv,
                                        const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y,
                                        const std::vector<std::string>& names,
                                        const AnnConfig& config) {
  const auto d = x.cols();
  if (d < 2)
    throw ConfigError("permutation_importance: needs at least 2 features");
  if (static_cast<Eigen::Index>(names.size()) != d)
    throw ConfigError("permutation_importance: name count mismatch");
  const int folds = static_cast<int>(cv.folds.size());

  ImportanceReport report;
  report.feature_names = names;
  report.fold_importance.resize(folds, d);
  std::vector<std::string> fold_warnings(static_cast<std::size_t>(folds));

  parallel_for_index(folds, config.workers, [&](int f) {
    const auto& fr = cv.folds[static_cast<std::size_t>(f)];
    const Eigen::MatrixXd x_test = take_rows(x, fr.test_indices);
    const Eigen::VectorXd y_test = take(y, fr.test_indices);
    const double baseline = fr.model.rmse_scaled(x_test, y_test);
    const auto rows = x_test.rows();

    Eigen::VectorXd importance(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      double delta_sum = 0.0;
      for (int rep = 0; rep < config.shuffle_repeats; ++rep) {
        Rng rng = Rng::derive(config.seed, kShuffleStream, f,
                              static_cast<std::uint64_t>(j), rep);
        std::vector<int> perm(static_cast<std::size_t>(rows));
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        Eigen::MatrixXd x_perm = x_test;
        for (Eigen::Index i = 0; i < rows; ++i)
          x_perm(i, j) = x_test(perm[static_cast<std::size_t>(i)], j);
        delta_sum += fr.model.rmse_scaled(x_perm, y_test) - baseline;
      }
      importance(j) =
          std::max(delta_sum / static_cast<double>(config.shuffle_repeats), 0.0);
    }
    const double total = importance.sum();
    if (total <= 0.0) {
      fold_warnings[static_cast<std::size_t>(f)] =
          "fold " + std::to_string(f) +
          ": all permutation deltas zero, importances set uniform";
      importance.setConstant(1.0 / static_cast<double>(d));
    } else {
      importance /= total;
    }
    report.fold_importance.row(f) = importance.transpose();
  });

  for (auto& w : fold_warnings)
    if (!w.empty()) report.warnings.push_back(std::move(w));

  report.mean_importance = report.fold_importance.colwise().mean();
  const double top = report.mean_importance.maxCoeff();
  report.nri_percent = report.mean_importance / top * 100.0;
  return report;
}

std::vector<ComparisonRow> compare_sem_ann(
    const std::vector<std::pair<std::string, double>>& sem_paths,
    const std::vector<std::pair<std::string, double>>& nri) {
  if (sem_paths.size() != nri.size())
    throw ConfigError("compare_sem_ann: label sets differ in size");
  std::map<std::string, double> nri_by_label(nri.begin(), nri.end());

  std::vector<ComparisonRow> rows;
  for (const auto& [label, estimate] : sem_paths) {
    const auto it = nri_by_label.find(label);
    if (it == nri_by_label.end())
      throw ConfigError("compare_sem_ann: no importance for label '" + label +
                        "'");
    ComparisonRow row;
    row.label = label;
    row.sem_estimate = estimate;
    row.nri_percent = it->second;
    rows.push_back(std::move(row));
  }

  // rank descending; equal keys fall back to label order and set the tie flag
  auto assign_ranks = [&rows](auto key, auto rank_member) {
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ka = key(rows[a]), kb = key(rows[b]);
      if (ka != kb) return ka > kb;
      return rows[a].label < rows[b].label;
    });
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      rows[order[pos]].*rank_member = static_cast<int>(pos) + 1;
      if (pos > 0 && key(rows[order[pos]]) == key(rows[order[pos - 1]])) {
        rows[order[pos]].tie = true;
        rows[order[pos - 1]].tie = true;
      }
    }
  };
  assign_ranks([](const ComparisonRow& r) { return std::fabs(r.sem_estimate); },
               &ComparisonRow::sem_rank);
  assign_ranks([](const ComparisonRow& r) { return r.nri_percent; },
               &ComparisonRow::ann_rank);

  for (auto& r : rows) r.match = r.sem_rank == r.ann_rank;
  return rows;
}

}  // namespace semann
