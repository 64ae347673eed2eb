#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "semann/ann.hpp"

namespace semann {

struct FoldResult {
  int fold = 0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  AnnModel model;
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

struct CvResult {
  std::vector<FoldResult> folds;
  double train_mean = 0.0, train_sd = 0.0;  // sample SD over folds
  double test_mean = 0.0, test_sd = 0.0;
  std::vector<std::string> warnings;
};

/// Seeded k-fold cross-validation: rows are shuffled once, split into folds
/// of near-equal size (the first n % k folds take the extra row), and one
/// network is trained per fold on the complement. RMSE is reported on
/// scaled values for both partitions.
CvResult cross_validate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const AnnConfig& config);

struct ImportanceReport {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd fold_importance;   // folds x features; rows sum to 1
  Eigen::VectorXd mean_importance;   // over folds
  Eigen::VectorXd nri_percent;       // mean / max(mean) * 100
  std::vector<std::string> warnings;
};

/// Permutation importance over the fold models: for every (fold, feature),
/// the feature column of the fold's held-out rows is shuffled
/// `shuffle_repeats` times, the mean RMSE degradation is floored at zero,
/// and fold importances are normalized to sum to one. NRI rescales mean
/// importances against the strongest feature.
ImportanceReport permutation_importance(const CvResult& cv,
                                        const Eigen::MatrixXd& x,
                                        const Eigen::VectorXd& y,
                                        const std::vector<std::string>& names,
                                        const AnnConfig& config);

struct ComparisonRow {
  std::string label;
  double sem_estimate = 0.0;  // standardized path coefficient
  double nri_percent = 0.0;
  int sem_rank = 0;  // 1 = largest |estimate|
  int ann_rank = 0;  // 1 = largest NRI
  bool match = false;
  bool tie = false;  // rank decided lexicographically
};

/// Rank SEM paths by |standardized estimate| and ANN features by NRI and
/// mark where the orderings agree. Label sets must coincide; ties are
/// broken by label order and flagged.
std::vector<ComparisonRow> compare_sem_ann(
    const std::vector<std::pair<std::string, double>>& sem_paths,
    const std::vector<std::pair<std::string, double>>& nri);

}  // namespace semann
