#include "fedunlearn/deletion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>

#include "fedunlearn/errors.hpp"
#include "fedunlearn/rng.hpp"

namespace fedunlearn {

LocalDataset apply_deletion(const LocalDataset& data, const DeletionSequence& seq) {
    const int n = static_cast<int>(data.size());
    std::vector<char> drop(data.size(), 0);
    for (int idx : seq.indices) {
        if (idx < 0 || idx >= n)
            throw ValidationError("deletion index " + std::to_string(idx) +
                                  " out of range for dataset of size " + std::to_string(n));
        if (drop[idx]) throw ValidationError("duplicate deletion index " + std::to_string(idx));
        drop[idx] = 1;
    }
    LocalDataset out;
    out.reserve(data.size() - seq.indices.size());
    for (int i = 0; i < n; ++i)
        if (!drop[i]) out.push_back(data[i]);
    return out;
}

namespace {

// Client i of k_u receives base + (i < extra) deletions for a given total.
std::vector<long> split_even(long total, int k_u) {
    std::vector<long> counts(k_u, total / k_u);
    for (int i = 0; i < static_cast<int>(total % k_u); ++i) counts[i] += 1;
    return counts;
}

bool fits(long total, int k_u, const std::vector<long>& caps) {
    const std::vector<long> counts = split_even(total, k_u);
    for (int i = 0; i < k_u; ++i)
        if (counts[i] > caps[i]) return false;
    return true;
}

} // namespace

std::vector<DeletionSequence> select_deletions(const std::vector<int>& client_sizes, double r,
                                               int k_u, std::uint64_t seed,
                                               double max_client_fraction) {
    const int K = static_cast<int>(client_sizes.size());
    if (K < 1) throw ValidationError("select_deletions: no clients");
    if (k_u < 1 || k_u > K)
        throw ValidationError("select_deletions: k_u must lie in [1, " + std::to_string(K) + "]");
    if (!(r >= 0.0 && r < 1.0))
        throw ValidationError("select_deletions: deletion rate must lie in [0, 1)");
    if (!(max_client_fraction > 0.0 && max_client_fraction <= 1.0))
        throw ValidationError("select_deletions: max_client_fraction must lie in (0, 1]");

    long n_total = 0;
    for (int s : client_sizes) {
        if (s < 0) throw ValidationError("select_deletions: negative client size");
        n_total += s;
    }
    const long total = static_cast<long>(std::floor(r * static_cast<double>(n_total)));

    std::vector<long> caps(k_u);
    for (int i = 0; i < k_u; ++i)
        caps[i] = static_cast<long>(std::floor(max_client_fraction * client_sizes[i]));

    if (!fits(total, k_u, caps)) {
        // Largest feasible total by bisection (feasibility is monotone).
        long lo = 0, hi = total;
        while (lo < hi) {
            const long mid = lo + (hi - lo + 1) / 2;
            if (fits(mid, k_u, caps))
                lo = mid;
            else
                hi = mid - 1;
        }
        std::ostringstream msg;
        msg << "deletion rate " << r << " infeasible across " << k_u
            << " unlearned clients; maximum feasible rate is "
            << static_cast<double>(lo) / static_cast<double>(n_total);
        throw ValidationError(msg.str());
    }

    const std::vector<long> counts = split_even(total, k_u);
    std::vector<DeletionSequence> out(k_u);
    for (int i = 0; i < k_u; ++i) {
        out[i].client_id = i;
        auto rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        out[i].indices =
            sample_without_replacement(client_sizes[i], static_cast<int>(counts[i]), rng);
        std::sort(out[i].indices.begin(), out[i].indices.end());
    }
    return out;
}

const char* batching_mode_name(BatchingMode mode) {
    return mode == BatchingMode::Mask ? "mask" : "rebatch";
}

BatchingMode batching_mode_from_name(const std::string& name) {
    if (name == "mask") return BatchingMode::Mask;
    if (name == "rebatch") return BatchingMode::Rebatch;
    throw ValidationError("unknown batching mode '" + name + "' (expected mask or rebatch)");
}

RoundBatches make_batches(const LocalDataset& remaining, const std::vector<int>& deleted_indices,
                          int original_n, int B, BatchingMode mode, std::uint64_t seed,
                          long round) {
    if (B < 1) throw ValidationError("make_batches: batch size must be >= 1");
    if (original_n != static_cast<int>(remaining.size() + deleted_indices.size()))
        throw ValidationError("make_batches: original size does not match remaining + deleted");

    RoundBatches out;
    out.order = remaining;
    if (mode == BatchingMode::Rebatch) {
        auto rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(round)));
        shuffle_vec(out.order, rng);
        const int m = static_cast<int>(out.order.size());
        for (int begin = 0; begin < m; begin += B)
            out.batches.push_back({begin, std::min(begin + B, m), 0});
        return out;
    }

    // Mask mode: original consecutive windows of size B, deleted positions
    // removed. Walk the sorted deleted indices alongside the windows.
    std::size_t del_pos = 0;
    int kept_so_far = 0;
    for (int win_start = 0; win_start < original_n; win_start += B) {
        const int win_end = std::min(win_start + B, original_n);
        int deleted_here = 0;
        while (del_pos < deleted_indices.size() && deleted_indices[del_pos] < win_end) {
            if (deleted_indices[del_pos] < win_start)
                throw ValidationError("make_batches: deleted indices must be sorted ascending");
            ++deleted_here;
            ++del_pos;
        }
        const int kept = (win_end - win_start) - deleted_here;
        if (kept > 0) out.batches.push_back({kept_so_far, kept_so_far + kept, deleted_here});
        kept_so_far += kept;
    }
    return out;
}

} // namespace fedunlearn
