#include <algorithm>
#include <cmath>

#include "eegdecode/error.hpp"
#include "eegdecode/preprocess.hpp"
#include "eegdecode/rng.hpp"

namespace eegdecode {

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Longest run of consecutive samples whose successive differences are below tol.
Eigen::Index longest_flat_run(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) {
  Eigen::Index best = x.size() > 0 ? 1 : 0;
  Eigen::Index run = 1;
  for (Eigen::Index t = 1; t < x.size(); ++t) {
    run = std::abs(x[t] - x[t - 1]) < tol ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

double correlation(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b) {
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return den > 0.0 ? da.dot(db) / den : 0.0;
}

}  // namespace

std::vector<BadChannel> find_bad_channels(const Recording& rec, const BadChannelOptions& opts,
                                          const Montage* montage) {
  validate(rec);
  const auto scalp = rec.scalp_indices();
  if (scalp.size() < 3) throw DataError("bad-channel detection needs at least 3 scalp channels");
  const auto n = rec.n_samples();
  const auto flat_samples = static_cast<Eigen::Index>(std::llround(opts.flat_s * rec.fs));

  std::vector<BadChannel> bad;
  std::vector<char> flagged(scalp.size(), 0);
  auto name_of = [&](std::size_t i) { return rec.channel_names[static_cast<std::size_t>(scalp[i])]; };

  // (a) flat line
  for (std::size_t i = 0; i < scalp.size(); ++i) {
    if (longest_flat_run(rec.samples.col(scalp[i]), opts.flat_tolerance_v) >= flat_samples) {
      flagged[i] = 1;
      bad.push_back({name_of(i), BadChannelRule::Flat});
    }
  }

  // (b) robust z of high-frequency residual variance
  if (opts.noise_lowpass_hz < rec.fs / 2.0) {
    const auto lp = design_lowpass_fir(opts.noise_lowpass_hz, rec.fs, 5.0);
    if (static_cast<std::size_t>(n) > lp.taps.size()) {
      std::vector<double> var(scalp.size(), 0.0);
      std::vector<double> pool;
      std::vector<double> col(static_cast<std::size_t>(n));
      for (std::size_t i = 0; i < scalp.size(); ++i) {
        if (flagged[i]) continue;
        Eigen::VectorXd::Map(col.data(), n) = rec.samples.col(scalp[i]);
        const auto smooth = filter_zero_phase(col, lp);
        double acc = 0.0;
        for (std::size_t t = 0; t < col.size(); ++t) acc += (col[t] - smooth[t]) * (col[t] - smooth[t]);
        var[i] = acc / static_cast<double>(n);
        pool.push_back(var[i]);
      }
      if (pool.size() >= 3) {
        const double med = median_of(pool);
        std::vector<double> dev;
        for (double v : pool) dev.push_back(std::abs(v - med));
        const double scale = 1.4826 * median_of(dev);
        for (std::size_t i = 0; i < scalp.size(); ++i) {
          if (flagged[i]) continue;
          const double d = var[i] - med;
          const double z = scale > 0.0 ? d / scale : (d > 0.0 ? INFINITY : 0.0);
          if (z > opts.noise_z) {
            flagged[i] = 1;
            bad.push_back({name_of(i), BadChannelRule::Noisy});
          }
        }
      }
    }
  }

  // (c) correlation with an estimate from the other channels, per window
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < scalp.size(); ++i) {
    if (!flagged[i]) good.push_back(i);
  }
  const auto win = static_cast<Eigen::Index>(std::llround(opts.corr_window_s * rec.fs));
  const Eigen::Index n_windows = win > 1 ? n / win : 0;
  if (good.size() >= 3 && n_windows > 0) {
    const auto g = static_cast<Eigen::Index>(good.size());
    Eigen::MatrixXd x(n, g);
    for (Eigen::Index j = 0; j < g; ++j) x.col(j) = rec.samples.col(scalp[good[static_cast<std::size_t>(j)]]);

    std::vector<int> low_windows(good.size(), 0);
    if (montage != nullptr) {
      std::vector<Eigen::Vector3d> pos;
      for (auto i : good) pos.push_back(montage->position(name_of(i)));
      const auto subset_size = std::max<Eigen::Index>(
          4, static_cast<Eigen::Index>(std::ceil(opts.ransac_fraction * static_cast<double>(g))));
      if (subset_size >= g) throw DataError("too few channels for RANSAC channel screening");

      Rng rng(opts.ransac_seed);
      std::vector<std::vector<int>> subsets;
      std::vector<Eigen::MatrixXd> weights;
      std::vector<int> order(static_cast<std::size_t>(g));
      for (int s = 0; s < opts.ransac_subsets; ++s) {
        for (int j = 0; j < g; ++j) order[static_cast<std::size_t>(j)] = j;
        shuffle_in_place(order, rng);
        std::vector<int> sub(order.begin(), order.begin() + subset_size);
        std::sort(sub.begin(), sub.end());
        std::vector<Eigen::Vector3d> src;
        for (int j : sub) src.push_back(pos[static_cast<std::size_t>(j)]);
        weights.push_back(spherical_spline_matrix(src, pos));
        subsets.push_back(std::move(sub));
      }
      // For each channel, the subsets that leave it out.
      std::vector<std::vector<int>> excluding(static_cast<std::size_t>(g));
      for (int s = 0; s < opts.ransac_subsets; ++s) {
        std::vector<char> in(static_cast<std::size_t>(g), 0);
        for (int j : subsets[static_cast<std::size_t>(s)]) in[static_cast<std::size_t>(j)] = 1;
        for (int j = 0; j < g; ++j) {
          if (!in[static_cast<std::size_t>(j)]) excluding[static_cast<std::size_t>(j)].push_back(s);
        }
      }

      std::vector<Eigen::MatrixXd> pred(subsets.size());
      std::vector<double> vals;
      Eigen::VectorXd est(win);
      for (Eigen::Index w = 0; w < n_windows; ++w) {
        const auto block = x.middleRows(w * win, win);
        for (std::size_t s = 0; s < subsets.size(); ++s) {
          Eigen::MatrixXd src(win, static_cast<Eigen::Index>(subsets[s].size()));
          for (std::size_t j = 0; j < subsets[s].size(); ++j) {
            src.col(static_cast<Eigen::Index>(j)) = block.col(subsets[s][j]);
          }
          pred[s] = src * weights[s].transpose();
        }
        for (Eigen::Index j = 0; j < g; ++j) {
          const auto& ex = excluding[static_cast<std::size_t>(j)];
          if (ex.empty()) continue;
          for (Eigen::Index t = 0; t < win; ++t) {
            vals.clear();
            for (int s : ex) vals.push_back(pred[static_cast<std::size_t>(s)](t, j));
            est[t] = median_of(vals);
          }
          if (correlation(block.col(j), est) < opts.corr_threshold) {
            ++low_windows[static_cast<std::size_t>(j)];
          }
        }
      }
    } else {
      for (Eigen::Index w = 0; w < n_windows; ++w) {
        Eigen::MatrixXd block = x.middleRows(w * win, win);
        block.rowwise() -= block.colwise().mean();
        const Eigen::VectorXd norms = block.colwise().norm();
        const Eigen::MatrixXd gram = block.transpose() * block;
        for (Eigen::Index j = 0; j < g; ++j) {
          double best = 0.0;
          for (Eigen::Index k = 0; k < g; ++k) {
            if (k == j) continue;
            const double den = norms[j] * norms[k];
            if (den > 0.0) best = std::max(best, std::abs(gram(j, k)) / den);
          }
          if (best < opts.corr_threshold) ++low_windows[static_cast<std::size_t>(j)];
        }
      }
    }
    for (std::size_t j = 0; j < good.size(); ++j) {
      if (2 * low_windows[j] > n_windows) {
        flagged[good[j]] = 1;
        bad.push_back({name_of(good[j]), BadChannelRule::LowCorrelation});
      }
    }
  }

  std::sort(bad.begin(), bad.end(), [&](const BadChannel& a, const BadChannel& b) {
    return *rec.channel_index(a.name) < *rec.channel_index(b.name);
  });
  return bad;
}

std::vector<std::string> detect_bad_channels(const Recording& rec, const BadChannelOptions& opts,
                                             const Montage* montage) {
  std::vector<std::string> names;
  for (auto& b : find_bad_channels(rec, opts, montage)) names.push_back(std::move(b.name));
  return names;
}

}  // namespace eegdecode
