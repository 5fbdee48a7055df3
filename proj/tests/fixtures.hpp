#pragma once

// Synthetic 28x28 digit corpus (rings for "0", strokes for "1"), IDX/gzip
// writers, and a tiny logistic-regression oracle. Used by the data-pipeline
// tests and the image-classification acceptance checks so that no external
// dataset download is required.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include <Eigen/Dense>

#include "qaml/data.hpp"
#include "qaml/rng.hpp"

namespace fixtures {

constexpr int kSide = 28;

inline void splat(std::vector<std::uint8_t>& img, double x, double y, double radius,
                  double intensity) {
    const int lo_x = std::max(0, static_cast<int>(std::floor(x - radius - 1)));
    const int hi_x = std::min(kSide - 1, static_cast<int>(std::ceil(x + radius + 1)));
    const int lo_y = std::max(0, static_cast<int>(std::floor(y - radius - 1)));
    const int hi_y = std::min(kSide - 1, static_cast<int>(std::ceil(y + radius + 1)));
    for (int r = lo_y; r <= hi_y; ++r) {
        for (int c = lo_x; c <= hi_x; ++c) {
            const double d = std::hypot(c - x, r - y);
            const double value = intensity * std::exp(-(d * d) / (radius * radius));
            auto& pixel = img[static_cast<std::size_t>(r * kSide + c)];
            pixel = static_cast<std::uint8_t>(
                std::min(255.0, static_cast<double>(pixel) + value));
        }
    }
}

// A hand-drawn-looking ring: the "0" class.
inline std::vector<std::uint8_t> make_ring(qaml::RngStream& rng) {
    std::vector<std::uint8_t> img(kSide * kSide, 0);
    const double cx = 13.5 + rng.uniform(-1.5, 1.5);
    const double cy = 13.5 + rng.uniform(-1.5, 1.5);
    const double rx = rng.uniform(6.0, 9.0);
    const double ry = rng.uniform(7.0, 10.0);
    const double pen = rng.uniform(1.2, 1.8);
    const double bright = rng.uniform(160.0, 230.0);
    for (int step = 0; step < 80; ++step) {
        const double t = 2.0 * M_PI * step / 80.0;
        splat(img, cx + rx * std::cos(t), cy + ry * std::sin(t), pen, bright / 3.0);
    }
    return img;
}

// A near-vertical stroke: the "1" class.
inline std::vector<std::uint8_t> make_stroke(qaml::RngStream& rng) {
    std::vector<std::uint8_t> img(kSide * kSide, 0);
    const double x0 = 13.5 + rng.uniform(-3.0, 3.0);
    const double slant = rng.uniform(-0.15, 0.15);
    const double pen = rng.uniform(1.1, 1.7);
    const double bright = rng.uniform(160.0, 230.0);
    const double top = rng.uniform(3.0, 6.0);
    const double bottom = rng.uniform(22.0, 25.0);
    for (int step = 0; step < 60; ++step) {
        const double y = top + (bottom - top) * step / 59.0;
        splat(img, x0 + slant * (y - 14.0), y, pen, bright / 2.5);
    }
    return img;
}

struct SynthDigits {
    qaml::IdxImages images;
    std::vector<std::uint8_t> labels;  // 0 or 1
};

inline SynthDigits make_digits(int count, std::uint64_t seed) {
    SynthDigits out;
    out.images.rows = kSide;
    out.images.cols = kSide;
    qaml::RngStream root(seed);
    for (int i = 0; i < count; ++i) {
        qaml::RngStream rng = root.child(static_cast<std::uint64_t>(i));
        const bool one = rng.uniform() < 0.5;
        out.images.images.push_back(one ? make_stroke(rng) : make_ring(rng));
        out.labels.push_back(one ? 1 : 0);
    }
    return out;
}

inline std::vector<std::uint8_t> gzip_bytes(const std::vector<std::uint8_t>& raw) {
    z_stream strm{};
    if (deflateInit2(&strm, Z_BEST_SPEED, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    std::vector<std::uint8_t> out(compressBound(static_cast<uLong>(raw.size())) + 32);
    strm.next_in = const_cast<Bytef*>(raw.data());
    strm.avail_in = static_cast<uInt>(raw.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    if (deflate(&strm, Z_FINISH) != Z_STREAM_END) {
        deflateEnd(&strm);
        throw std::runtime_error("gzip compression failed");
    }
    out.resize(out.size() - strm.avail_out);
    deflateEnd(&strm);
    return out;
}

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

// Writes images+labels as IDX files (gzipped when `gzipped`), returning the
// two paths.
inline std::pair<std::string, std::string> write_idx_pair(const std::string& dir,
                                                          const std::string& stem,
                                                          const SynthDigits& digits,
                                                          bool gzipped) {
    std::vector<std::uint8_t> img_bytes = qaml::serialize_idx_images(digits.images);
    std::vector<std::uint8_t> lbl_bytes = qaml::serialize_idx_labels(digits.labels);
    std::string img_path = dir + "/" + stem + "-images-idx3-ubyte";
    std::string lbl_path = dir + "/" + stem + "-labels-idx1-ubyte";
    if (gzipped) {
        img_bytes = gzip_bytes(img_bytes);
        lbl_bytes = gzip_bytes(lbl_bytes);
        img_path += ".gz";
        lbl_path += ".gz";
    }
    write_bytes(img_path, img_bytes);
    write_bytes(lbl_path, lbl_bytes);
    return {img_path, lbl_path};
}

// Plain logistic regression (full-batch gradient descent with bias); an
// independent check that a feature set is linearly separable.
inline double logistic_accuracy(const std::vector<Eigen::VectorXd>& train_x,
                                const std::vector<int>& train_y,
                                const std::vector<Eigen::VectorXd>& test_x,
                                const std::vector<int>& test_y, int iters = 500,
                                double lr = 0.5) {
    if (train_x.empty()) throw std::invalid_argument("empty training set");
    const Eigen::Index dim = train_x[0].size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
    double b = 0.0;
    const double inv_n = 1.0 / static_cast<double>(train_x.size());
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(dim);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < train_x.size(); ++i) {
            const double margin = train_y[i] * (w.dot(train_x[i]) + b);
            const double coeff = -train_y[i] / (1.0 + std::exp(margin));
            grad_w += coeff * train_x[i];
            grad_b += coeff;
        }
        w -= lr * inv_n * grad_w;
        b -= lr * inv_n * grad_b;
    }
    int correct = 0;
    for (std::size_t i = 0; i < test_x.size(); ++i) {
        const double score = w.dot(test_x[i]) + b;
        if ((score >= 0.0 ? 1 : -1) == test_y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_x.size());
}

}  // namespace fixtures
