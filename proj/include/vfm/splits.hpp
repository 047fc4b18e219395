#pragma once

#include <cstdint>
#include <vector>

#include "vfm/dataset.hpp"

namespace vfm {

struct TestSplitConfig {
  double max_gap_days = 120.0;  // max distance between test and development
  double frac_cap = 0.2;        // test at most this fraction of the well
  std::size_t count_cap = 500;  // absolute test size cap
};

struct TrainValSplitConfig {
  double block_days = 100.0;  // blocks of up to this many consecutive days
  double target_lo = 0.10;    // validation fraction target interval
  double target_hi = 0.20;
};

// Positions (0-based, into the time-sorted well) selected for testing.
// The test set is a suffix in time, maximized subject to the size caps and
// the max-gap constraint; ties broken toward later points. Deterministic.
std::vector<std::size_t> split_test(const std::vector<double>& times,
                                    const TestSplitConfig& cfg = {});

struct TrainValSplit {
  std::vector<std::size_t> train;       // positions into the development set
  std::vector<std::size_t> validation;
  double validation_fraction = 0;
  bool fraction_in_target = true;  // false when block granularity forbids it
};

// Groups development points into blocks (consecutive gap <= block_days and
// block span <= block_days), then assigns whole blocks to validation in
// seeded random order until the fraction first reaches the target interval.
// A split whose achieved fraction cannot enter the interval is returned with
// fraction_in_target = false rather than failing.
TrainValSplit split_train_val(const std::vector<double>& times,
                              std::uint64_t seed,
                              const TrainValSplitConfig& cfg = {});

// Applies both splits to every well of the dataset and stores the labels.
// Wells are processed in id order; per-well seeds derive from (seed, index).
void assign_splits(AssetDataset& data, std::uint64_t seed,
                   const TestSplitConfig& test_cfg = {},
                   const TrainValSplitConfig& tv_cfg = {});

}  // namespace vfm
