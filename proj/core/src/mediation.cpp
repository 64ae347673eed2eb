#include "semann/mediation.hpp"

#include <algorithm>
#include <cmath>

#include "semann/errors.hpp"
#include "semann/parallel.hpp"
#include "semann/rng.hpp"
#include "semann/sem_fit.hpp"

namespace semann {

namespace {

constexpr std::uint64_t kBootStream = 0x626f6f74;  // "boot"

// type-7 quantile (linear interpolation) over an ascending-sorted vector
double quantile_sorted(const std::vector<double>& v, double prob) {
  if (v.empty()) return 0.0;
  const double h = prob * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - std::floor(h)) * (v[lo + 1] - v[lo]);
}

bool excludes_zero(const std::vector<double>& sorted, double level) {
  const double alpha = (1.0 - level) / 2.0;
  const double lo = quantile_sorted(sorted, alpha);
  const double hi = quantile_sorted(sorted, 1.0 - alpha);
  return lo > 0.0 || hi < 0.0;
}

std::string bootstrap_stars(const std::vector<double>& sorted) {
  if (excludes_zero(sorted, 0.999)) return "***";
  if (excludes_zero(sorted, 0.99)) return "**";
  if (excludes_zero(sorted, 0.95)) return "*";
  return "";
}

struct ChainPaths {
  int a = -1;       // source -> mediator (index into fit estimates)
  int b = -1;       // mediator -> target
  int direct = -1;  // source -> target
};

int estimate_index(const SemFit& fit, const std::string& target,
                   const std::string& source) {
  const std::string label = target + "~" + source;
  for (std::size_t i = 0; i < fit.estimates.size(); ++i) {
    const auto& e = fit.estimates[i];
    if (e.label == label &&
        (e.matrix == ParamMatrix::A || e.matrix == ParamMatrix::B))
      return static_cast<int>(i);
  }
  throw ConfigError("mediation chain needs fitted path " + label);
}

}  // namespace

MediationRun bootstrap_mediation(const ModelSpec& spec, const Dataset& data,
                                 const std::vector<MediationChain>& chains,
                                 const MediationOptions& options) {
  if (options.replicates < 200)
    throw ConfigError("bootstrap_mediation: needs at least 200 replicates");
  if (options.level <= 0.0 || options.level >= 1.0)
    throw ConfigError("bootstrap_mediation: level outside (0, 1)");
  if (chains.empty()) throw ConfigError("bootstrap_mediation: no chains");

  FitOptions base_options;
  base_options.mode = SemMode::Structural;
  base_options.compute_se = false;
  const SemFit base = fit_ml(spec, data, base_options);

  std::vector<ChainPaths> paths;
  for (const auto& chain : chains) {
    ChainPaths cp;
    cp.a = estimate_index(base, chain.mediator, chain.source);
    cp.b = estimate_index(base, chain.target, chain.mediator);
    cp.direct = estimate_index(base, chain.target, chain.source);
    paths.push_back(cp);
  }

  const int n = static_cast<int>(data.n_rows());
  const int b_total = options.replicates;
  const auto n_chains = chains.size();

  // per replicate: (indirect, direct) per chain; slot-indexed for determinism
  struct Replicate {
    bool ok = false;
    std::vector<double> indirect;
    std::vector<double> direct;
  };
  std::vector<Replicate> reps(static_cast<std::size_t>(b_total));

  FitOptions rep_options = base_options;
  rep_options.start = base.theta;

  parallel_for_index(b_total, options.workers, [&](int r) {
    Rng rng = Rng::derive(options.seed, kBootStream, r);
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (auto& idx : rows)
      idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    try {
      const Dataset resampled = data.select_rows(rows);
      const SemFit fit = fit_ml(spec, resampled, rep_options);
      auto& slot = reps[static_cast<std::size_t>(r)];
      slot.indirect.reserve(n_chains);
      slot.direct.reserve(n_chains);
      for (const auto& cp : paths) {
        const double a = fit.estimates[static_cast<std::size_t>(cp.a)].standardized;
        const double bb = fit.estimates[static_cast<std::size_t>(cp.b)].standardized;
        const double d =
            fit.estimates[static_cast<std::size_t>(cp.direct)].standardized;
        slot.indirect.push_back(a * bb);
        slot.direct.push_back(d);
      }
      slot.ok = true;
    } catch (const Error&) {
      // dropped and counted below
    }
  });

  MediationRun run;
  run.replicates_requested = b_total;
  for (const auto& rep : reps)
    if (rep.ok) ++run.replicates_used;
  const int failed = b_total - run.replicates_used;
  const double failure_rate =
      static_cast<double>(failed) / static_cast<double>(b_total);
  if (failure_rate > 0.5)
    throw DataError("bootstrap_mediation: " + std::to_string(failed) + " of " +
                    std::to_string(b_total) + " replicates failed to converge");
  if (failure_rate > 0.1)
    run.warnings.push_back(std::to_string(failed) + " of " +
                           std::to_string(b_total) +
                           " bootstrap replicates failed to converge");

  const double alpha = (1.0 - options.level) / 2.0;
  for (std::size_t ci = 0; ci < n_chains; ++ci) {
    MediationRecord rec;
    rec.source = chains[ci].source;
    rec.mediator = chains[ci].mediator;
    rec.target = chains[ci].target;

    const auto& cp = paths[ci];
    const double a = base.estimates[static_cast<std::size_t>(cp.a)].standardized;
    const double b = base.estimates[static_cast<std::size_t>(cp.b)].standardized;
    rec.indirect = a * b;
    rec.direct = base.estimates[static_cast<std::size_t>(cp.direct)].standardized;

    std::vector<double> ind, dir;
    ind.reserve(static_cast<std::size_t>(run.replicates_used));
    dir.reserve(static_cast<std::size_t>(run.replicates_used));
    for (const auto& rep : reps) {
      if (!rep.ok) continue;
      ind.push_back(rep.indirect[ci]);
      dir.push_back(rep.direct[ci]);
    }
    std::sort(ind.begin(), ind.end());
    std::sort(dir.begin(), dir.end());

    rec.indirect_lo = quantile_sorted(ind, alpha);
    rec.indirect_hi = quantile_sorted(ind, 1.0 - alpha);
    rec.direct_lo = quantile_sorted(dir, alpha);
    rec.direct_hi = quantile_sorted(dir, 1.0 - alpha);
    rec.indirect_stars = bootstrap_stars(ind);
    rec.direct_stars = bootstrap_stars(dir);
    rec.degenerate_ci = rec.indirect_lo == rec.indirect_hi ||
                        rec.direct_lo == rec.direct_hi;
    if (rec.degenerate_ci)
      run.warnings.push_back("degenerate (zero-width) interval for " +
                             rec.source + " -> " + rec.mediator + " -> " +
                             rec.target);

    const bool ind_excludes = rec.indirect_lo > 0.0 || rec.indirect_hi < 0.0;
    const bool dir_excludes = rec.direct_lo > 0.0 || rec.direct_hi < 0.0;
    if (!ind_excludes)
      rec.classification = "none";
    else
      rec.classification = dir_excludes ? "partial" : "full";

    run.records.push_back(std::move(rec));
  }
  return run;
}

}  // namespace semann
