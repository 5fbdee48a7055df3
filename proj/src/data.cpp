#include "qaml/data.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>
#include <zlib.h>

#include "qaml/rng.hpp"

namespace qaml {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803u;
constexpr std::uint32_t kLabelMagic = 0x00000801u;

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
    out.push_back(std::uint8_t(value >> 24));
    out.push_back(std::uint8_t(value >> 16));
    out.push_back(std::uint8_t(value >> 8));
    out.push_back(std::uint8_t(value));
}

[[noreturn]] void fail(const char* fmt, ...) {
    char msg[256];
    va_list args;
    va_start(args, fmt);
    vsnprintf(msg, sizeof msg, fmt, args);
    va_end(args);
    throw std::runtime_error(msg);
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& bytes) {
    z_stream strm;
    std::memset(&strm, 0, sizeof strm);
    if (inflateInit2(&strm, 15 + 32) != Z_OK) throw std::runtime_error("zlib init failed");
    strm.next_in = const_cast<Bytef*>(bytes.data());
    strm.avail_in = uInt(bytes.size());
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> buf(1 << 16);
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        strm.next_out = buf.data();
        strm.avail_out = uInt(buf.size());
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            fail("gzip inflate failed with code %d", rc);
        }
        out.insert(out.end(), buf.data(), buf.data() + (buf.size() - strm.avail_out));
        if (rc == Z_OK && strm.avail_in == 0 && strm.avail_out != 0) {
            inflateEnd(&strm);
            throw std::runtime_error("gzip stream truncated");
        }
    }
    inflateEnd(&strm);
    return out;
}

std::string canonical_rows(const std::vector<Eigen::VectorXd>& x, const std::vector<int>& y) {
    std::string text;
    char buf[64];
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (Eigen::Index j = 0; j < x[i].size(); ++j) {
            snprintf(buf, sizeof buf, "%.17g,", x[i][j]);
            text += buf;
        }
        snprintf(buf, sizeof buf, "%d\n", y[i]);
        text += buf;
    }
    return text;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& text) { return fnv1a64(text.data(), text.size()); }

IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16) fail("idx image header truncated at offset %zu", bytes.size());
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kImageMagic)
        fail("idx image magic 0x%08x at offset 0 (expected 0x%08x)", magic, kImageMagic);
    const std::uint64_t count = read_be32(bytes, 4);
    const std::uint64_t rows = read_be32(bytes, 8);
    const std::uint64_t cols = read_be32(bytes, 12);
    const std::uint64_t need = 16 + count * rows * cols;
    if (bytes.size() != need)
        fail("idx image payload at offset 16 has %zu bytes (expected %llu)", bytes.size() - 16,
             static_cast<unsigned long long>(need - 16));
    IdxImages set;
    set.rows = int(rows);
    set.cols = int(cols);
    set.images.resize(count);
    const std::size_t pixels = std::size_t(rows * cols);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint8_t* base = bytes.data() + 16 + i * pixels;
        set.images[i].assign(base, base + pixels);
    }
    return set;
}

std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) fail("idx label header truncated at offset %zu", bytes.size());
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kLabelMagic)
        fail("idx label magic 0x%08x at offset 0 (expected 0x%08x)", magic, kLabelMagic);
    const std::uint64_t count = read_be32(bytes, 4);
    if (bytes.size() != 8 + count)
        fail("idx label payload at offset 8 has %zu bytes (expected %llu)", bytes.size() - 8,
             static_cast<unsigned long long>(count));
    return std::vector<std::uint8_t>(bytes.begin() + 8, bytes.end());
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& set) {
    std::vector<std::uint8_t> out;
    write_be32(out, kImageMagic);
    write_be32(out, std::uint32_t(set.images.size()));
    write_be32(out, std::uint32_t(set.rows));
    write_be32(out, std::uint32_t(set.cols));
    const std::size_t pixels = std::size_t(set.rows) * std::size_t(set.cols);
    for (const auto& img : set.images) {
        if (img.size() != pixels) throw std::invalid_argument("image pixel count mismatch");
        out.insert(out.end(), img.begin(), img.end());
    }
    return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> out;
    write_be32(out, kLabelMagic);
    write_be32(out, std::uint32_t(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes);
    return bytes;
}

PcaModel fit_pca(const std::vector<Eigen::VectorXd>& data, int n_components) {
    if (data.size() < 2) throw std::invalid_argument("pca needs at least two samples");
    const Eigen::Index dim = data[0].size();
    const Eigen::Index m = Eigen::Index(data.size());
    if (n_components < 1) throw std::invalid_argument("n_components must be positive");
    Eigen::MatrixXd x(m, dim);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (data[i].size() != dim) throw std::invalid_argument("pca sample dimension mismatch");
        x.row(i) = data[i].transpose();
    }
    PcaModel model;
    model.mean = x.colwise().mean();
    x.rowwise() -= model.mean.transpose();
    const Eigen::MatrixXd centered = x;  // kept for projection ranges
    const double total_var = x.squaredNorm() / double(m - 1);

    model.components.resize(n_components, dim);
    model.explained_variance.resize(n_components);
    RngStream rng(0x9e3779b97f4a7c15ull);
    constexpr double kTol = 1e-10;
    constexpr int kMaxIters = 10000;
    for (int c = 0; c < n_components; ++c) {
        const double residual_var = x.squaredNorm() / double(m - 1);
        if (residual_var <= 1e-12 * std::max(1.0, total_var))
            throw std::invalid_argument("n_components exceeds the rank of the data");
        Eigen::VectorXd v(dim);
        for (Eigen::Index j = 0; j < dim; ++j) v[j] = rng.normal();
        v.normalize();
        for (int it = 0; it < kMaxIters; ++it) {
            Eigen::VectorXd w = x.transpose() * (x * v) / double(m - 1);
            // Keep the iterate orthogonal to the components already found.
            for (int k = 0; k < c; ++k)
                w -= model.components.row(k).dot(w) * model.components.row(k).transpose();
            const double norm = w.norm();
            if (norm <= 1e-300) break;  // residual annihilates the iterate
            w /= norm;
            const double delta = std::min((w - v).norm(), (w + v).norm());
            v = w;
            if (delta < kTol) break;
        }
        const double lambda = (x * v).squaredNorm() / double(m - 1);
        if (lambda <= 1e-12 * std::max(1.0, total_var))
            throw std::invalid_argument("n_components exceeds the rank of the data");
        Eigen::Index peak = 0;
        v.cwiseAbs().maxCoeff(&peak);
        if (v[peak] < 0.0) v = -v;
        model.components.row(c) = v.transpose();
        model.explained_variance[c] = lambda;
        x -= (x * v) * v.transpose();
    }

    const Eigen::MatrixXd proj = centered * model.components.transpose();  // m x n_components
    model.train_min = proj.colwise().minCoeff();
    model.train_max = proj.colwise().maxCoeff();
    return model;
}

Eigen::VectorXd project_and_scale(const PcaModel& model, const Eigen::VectorXd& x, double range,
                                  int* clamped) {
    if (x.size() != model.mean.size()) throw std::invalid_argument("projection dimension mismatch");
    const Eigen::VectorXd proj = model.components * (x - model.mean);
    Eigen::VectorXd out(proj.size());
    for (Eigen::Index c = 0; c < proj.size(); ++c) {
        const double span = std::max(model.train_max[c] - model.train_min[c], 1e-300);
        double s = (proj[c] - model.train_min[c]) / span * range;
        if (s < 0.0 || s > range) {
            if (clamped != nullptr) ++*clamped;
            s = std::min(std::max(s, 0.0), range);
        }
        out[c] = s;
    }
    return out;
}

LabeledVectors load_binary_digits(const std::string& images_path, const std::string& labels_path,
                                  int limit) {
    const IdxImages images = parse_idx_images(read_file_maybe_gzip(images_path));
    const std::vector<std::uint8_t> labels = parse_idx_labels(read_file_maybe_gzip(labels_path));
    if (images.images.size() != labels.size())
        throw std::runtime_error("image/label count mismatch");
    LabeledVectors out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) continue;
        Eigen::VectorXd v(images.images[i].size());
        for (std::size_t p = 0; p < images.images[i].size(); ++p)
            v[Eigen::Index(p)] = double(images.images[i][p]) / 255.0;
        out.x.push_back(std::move(v));
        out.y.push_back(labels[i] == 0 ? 1 : -1);
        if (limit > 0 && int(out.y.size()) >= limit) break;
    }
    return out;
}

std::string encoded_dataset_to_text(const EncodedDataset& ds) {
    nlohmann::json j;
    j["n_features"] = ds.n_features;
    j["range"] = ds.range;
    char hash[32];
    snprintf(hash, sizeof hash, "%016llx",
             static_cast<unsigned long long>(fnv1a64(canonical_rows(ds.x, ds.y))));
    j["content_hash"] = hash;
    j["labels"] = ds.y;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& v : ds.x) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
        rows.push_back(std::move(row));
    }
    j["features"] = std::move(rows);
    return j.dump(2) + "\n";
}

EncodedDataset encoded_dataset_from_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    EncodedDataset ds;
    ds.n_features = j.at("n_features").get<int>();
    ds.range = j.at("range").get<double>();
    ds.y = j.at("labels").get<std::vector<int>>();
    for (const auto& row : j.at("features")) {
        Eigen::VectorXd v(row.size());
        Eigen::Index i = 0;
        for (const auto& value : row) v[i++] = value.get<double>();
        ds.x.push_back(std::move(v));
    }
    if (ds.x.size() != ds.y.size()) throw std::runtime_error("dataset rows/labels mismatch");
    ds.content_hash = fnv1a64(canonical_rows(ds.x, ds.y));
    char hash[32];
    snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ds.content_hash));
    if (j.at("content_hash").get<std::string>() != hash)
        throw std::runtime_error("dataset content hash mismatch");
    return ds;
}

}  // namespace qaml
