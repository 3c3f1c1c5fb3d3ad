#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "labelsim/campaign.hpp"
#include "labelsim/policy.hpp"

namespace labelsim::mnist {

struct IdxError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// IDX label container (magic 0x00000801): digit labels, one byte each.
struct IdxLabels {
    std::vector<std::uint8_t> labels;

    std::int64_t count() const { return static_cast<std::int64_t>(labels.size()); }
};

// IDX image container (magic 0x00000803): 28x28 grayscale images.
struct IdxImages {
    std::int64_t count = 0;
    int rows = 28;
    int cols = 28;
    std::vector<std::uint8_t> pixels; // count * rows * cols bytes
};

IdxLabels read_idx_labels(const std::filesystem::path& path);
IdxImages read_idx_images(const std::filesystem::path& path);

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

struct RelabelOutput {
    CampaignResult result;
    std::filesystem::path labels_path;
    std::filesystem::path csv_path;
    std::filesystem::path summary_path;
};

// Relabels a ground-truth label set through a UniformNoiseOracle(10, w)
// under the given policy and budget. Writes, under out_dir:
//   labels.idx     assigned labels for labeled examples, input order
//   provenance.csv per-example campaign CSV
//   summary.txt    campaign summary record
RelabelOutput relabel_campaign(const IdxLabels& labels, double noise, const Policy& policy,
                               std::int64_t s_max, std::uint64_t master_seed,
                               const std::filesystem::path& out_dir, int threads = 1);

} // namespace labelsim::mnist
