#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qaml {

struct IdxImages {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<std::uint8_t>> images;
};

// Big-endian IDX containers: magic 0x00000803 (image tensor) or 0x00000801
// (label list). Parsers throw with the offending byte offset in the message;
// serialize/parse round-trips are byte-exact.
IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> serialize_idx_images(const IdxImages& set);
std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels);

// Raw bytes of a file; a gzip payload (0x1f 0x8b sniffed) is inflated.
std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path);

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;          // n_components x dim, rows orthonormal
    Eigen::VectorXd explained_variance;  // non-increasing
    // Training-set projection ranges used by project_and_scale.
    Eigen::VectorXd train_min;
    Eigen::VectorXd train_max;
};

// Principal components by power iteration with deflation (tolerance 1e-10,
// at most 10^4 iterations per component, deterministic start vectors). Sign
// convention: the largest-magnitude entry of each component is positive.
// Throws when n_components exceeds the data rank.
PcaModel fit_pca(const std::vector<Eigen::VectorXd>& data, int n_components);

// Projects onto the components and affinely maps each coordinate so the
// training range covers [0, range]; out-of-range projections clamp, and the
// clamp count is added to *clamped when provided.
Eigen::VectorXd project_and_scale(const PcaModel& model, const Eigen::VectorXd& x, double range,
                                  int* clamped = nullptr);

constexpr double kDefaultAngleRange = 1.5707963267948966;  // pi/2

struct LabeledVectors {
    std::vector<Eigen::VectorXd> x;
    std::vector<int> y;  // +1 / -1
};

// Loads an IDX image/label pair (optionally gzipped), keeps only digits 0 and
// 1 (0 -> +1, 1 -> -1), scales pixels to [0, 1], and caps the count at
// `limit` when limit > 0.
LabeledVectors load_binary_digits(const std::string& images_path, const std::string& labels_path,
                                  int limit);

struct EncodedDataset {
    std::vector<Eigen::VectorXd> x;
    std::vector<int> y;
    int n_features = 0;
    double range = 0.0;
    std::uint64_t content_hash = 0;  // fnv1a64 of the canonical row text
};

// Structured-text (JSON) cache of a normalized dataset; parsing verifies the
// embedded content hash and throws on mismatch.
std::string encoded_dataset_to_text(const EncodedDataset& ds);
EncodedDataset encoded_dataset_from_text(const std::string& text);

// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& text);

}  // namespace qaml
