#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedunlearn/types.hpp"

namespace fedunlearn {

// Deletion request of one client: distinct in-range positions into its local
// dataset, kept sorted ascending.
struct DeletionSequence {
    int client_id = 0;
    std::vector<int> indices;
};

// Pure removal: returns the dataset without the indexed examples, remaining
// order preserved. The input is untouched.
LocalDataset apply_deletion(const LocalDataset& data, const DeletionSequence& seq);

// Picks clients 0..k_u-1 as unlearned and samples floor(r * total) indices
// without replacement, spread as evenly as possible across them (earlier
// clients take the remainder). Deterministic in seed; each client draws from
// its own derived stream. max_client_fraction caps any single client's
// deletions at that fraction of its local data; an infeasible r reports the
// maximum feasible rate in the error message.
std::vector<DeletionSequence> select_deletions(const std::vector<int>& client_sizes, double r,
                                               int k_u, std::uint64_t seed,
                                               double max_client_fraction = 0.5);

enum class BatchingMode { Mask, Rebatch };

const char* batching_mode_name(BatchingMode mode);
BatchingMode batching_mode_from_name(const std::string& name);

// One mini-batch: the half-open range [begin, end) into RoundBatches::order,
// plus the number of deleted examples that fell inside this batch's original
// window (so the original size was (end - begin) + delta_b).
struct MiniBatch {
    int begin = 0;
    int end = 0;
    int delta_b = 0;
};

struct RoundBatches {
    LocalDataset order;
    std::vector<MiniBatch> batches;
};

// Cuts the round's batches.
//
// Mask mode keeps the pre-deletion layout: the original dataset (size
// original_n, its order untouched round to round) is cut into consecutive
// windows of size B, and each batch is that window minus its deleted
// positions. Because `remaining` preserves the original relative order, those
// batches are contiguous ranges of it. Rebatch mode instead reshuffles
// `remaining` by (seed, round) and cuts plain B-sized batches with delta_b=0.
// Batches left empty by deletion are dropped.
RoundBatches make_batches(const LocalDataset& remaining, const std::vector<int>& deleted_indices,
                          int original_n, int B, BatchingMode mode, std::uint64_t seed,
                          long round);

} // namespace fedunlearn
