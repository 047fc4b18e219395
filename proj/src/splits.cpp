#include "vfm/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vfm/rng.hpp"

namespace vfm {

std::vector<std::size_t> split_test(const std::vector<double>& times,
                                    const TestSplitConfig& cfg) {
  const std::size_t n = times.size();
  if (n == 0) return {};
  const std::size_t cap = std::min(
      static_cast<std::size_t>(std::floor(cfg.frac_cap * static_cast<double>(n))),
      cfg.count_cap);
  // Largest suffix of size k <= cap whose points all lie within max_gap_days
  // of the last remaining development point.
  for (std::size_t k = std::min(cap, n - 1); k >= 1; --k) {
    const double dev_end = times[n - k - 1];
    if (times[n - 1] <= dev_end + cfg.max_gap_days) {
      std::vector<std::size_t> out(k);
      std::iota(out.begin(), out.end(), n - k);
      return out;
    }
  }
  return {};
}

TrainValSplit split_train_val(const std::vector<double>& times,
                              std::uint64_t seed,
                              const TrainValSplitConfig& cfg) {
  const std::size_t n = times.size();
  TrainValSplit out;
  if (n == 0) return out;

  // Block boundaries: new block when the gap to the previous point or the
  // span since the block start exceeds block_days.
  std::vector<std::vector<std::size_t>> blocks;
  blocks.emplace_back();
  blocks.back().push_back(0);
  double block_start = times[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (times[i] - times[i - 1] > cfg.block_days ||
        times[i] - block_start > cfg.block_days) {
      blocks.emplace_back();
      block_start = times[i];
    }
    blocks.back().push_back(i);
  }

  std::vector<std::size_t> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> in_val(blocks.size(), false);
  std::size_t val_count = 0;
  std::size_t last_added = blocks.size();
  for (std::size_t b : order) {
    if (static_cast<double>(val_count) / n >= cfg.target_lo) break;
    in_val[b] = true;
    val_count += blocks[b].size();
    last_added = b;
  }
  // Overshoot past the upper target: drop the last block only if the
  // fraction stays at or above the lower target.
  if (static_cast<double>(val_count) / n > cfg.target_hi &&
      last_added < blocks.size()) {
    const std::size_t without = val_count - blocks[last_added].size();
    if (static_cast<double>(without) / n >= cfg.target_lo) {
      in_val[last_added] = false;
      val_count = without;
    }
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& dst = in_val[b] ? out.validation : out.train;
    dst.insert(dst.end(), blocks[b].begin(), blocks[b].end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  out.validation_fraction = static_cast<double>(val_count) / n;
  out.fraction_in_target = out.validation_fraction >= cfg.target_lo &&
                           out.validation_fraction <= cfg.target_hi;
  return out;
}

void assign_splits(AssetDataset& data, std::uint64_t seed,
                   const TestSplitConfig& test_cfg,
                   const TrainValSplitConfig& tv_cfg) {
  std::vector<SplitLabel> labels(data.size(), SplitLabel::Unassigned);
  std::uint64_t well_index = 0;
  for (const auto& [well_id, idx] : data.wells()) {
    std::vector<double> times;
    times.reserve(idx.size());
    for (std::size_t i : idx) times.push_back(data.obs(i).t);

    const auto test_pos = split_test(times, test_cfg);
    std::vector<bool> is_test(idx.size(), false);
    for (std::size_t p : test_pos) is_test[p] = true;

    std::vector<double> dev_times;
    std::vector<std::size_t> dev_pos;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (!is_test[p]) {
        dev_times.push_back(times[p]);
        dev_pos.push_back(p);
      }
    }
    const auto tv = split_train_val(dev_times, derive_seed(seed, well_index), tv_cfg);

    for (std::size_t p : test_pos) labels[idx[p]] = SplitLabel::Test;
    for (std::size_t d : tv.train) labels[idx[dev_pos[d]]] = SplitLabel::Train;
    for (std::size_t d : tv.validation) {
      labels[idx[dev_pos[d]]] = SplitLabel::Validation;
    }
    ++well_index;
  }
  data.set_splits(std::move(labels));
}

}  // namespace vfm
