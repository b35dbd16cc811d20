#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedunlearn/types.hpp"

namespace fedunlearn {

// Column selection for CSV files. With has_header the entries are column
// names matched against the first row; without it they are 0-based column
// indices written in decimal. integer_labels additionally requires the label
// column to hold whole numbers (class ids).
struct CsvSchema {
    std::vector<std::string> features;
    std::string label;
    bool has_header = true;
    bool integer_labels = true;
};

// Plain comma-separated values, no quoting. Row order is preserved; malformed
// rows and missing columns are reported with their line number / name.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Writes features then label in schema order, %.17g, so a load through the
// same schema reproduces the dataset exactly.
void save_csv(const std::string& path, const Dataset& data, const CsvSchema& schema);

// IDX image/label pair (big-endian magic 0x00000803 / 0x00000801). Pixel
// bytes are scaled into [0,1] by division by 255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Inverse of load_idx for byte-valued data: features are rounded back to
// 0..255 pixels (each must be within half a step of one), labels to 0..255.
void save_idx(const std::string& images_path, const std::string& labels_path,
              const Dataset& data, int rows, int cols);

// Well-specified classification data: features i.i.d. standard normal, label
// drawn from the softmax model at true_params (length C*(d+1): weights then
// biases). Per example the stream spends d normal draws then one uniform.
Dataset synth_logistic(int n, int d, const ParamVector& true_params, std::uint64_t seed);

// FNV-1a over sizes and raw value bit patterns; provenance fingerprint for
// reports and checkpoints.
std::uint64_t hash_dataset(const Dataset& data);

} // namespace fedunlearn
