// Gait-phase classifier: a small feedforward network (4-16-16-3, tanh
// hidden units, softmax output) trained with mini-batch gradient descent
// on features derived from tracking error and ground force. Everything is
// implemented directly so gradients can be checked against finite
// differences, and training is bit-deterministic given a seed.
#pragma once

#include "srl/contact.hpp"
#include "srl/core.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace srl::nn {

struct PhaseFeatures {
    double abs_err = 0.0;  ///< rad, |hip tracking error|
    double abs_derr = 0.0; ///< rad/s
    double grf = 0.0;      ///< N, >= 0
    double grf_rate = 0.0; ///< N/s

    Vec4 vec() const { return Vec4(abs_err, abs_derr, grf, grf_rate); }

    void validate() const {
        if (!all_finite(vec()))
            throw InvalidStateError("PhaseFeatures: non-finite feature");
        if (grf < 0.0) throw InvalidStateError("PhaseFeatures: negative grf");
    }
};

struct LabeledSample {
    PhaseFeatures features;
    contact::GaitPhase label = contact::GaitPhase::Swing;
};

using W1Type = Eigen::Matrix<double, 16, 4>;
using W2Type = Eigen::Matrix<double, 16, 16>;
using W3Type = Eigen::Matrix<double, 3, 16>;
using Vec16 = Eigen::Matrix<double, 16, 1>;

struct NetworkGradients {
    W1Type dW1 = W1Type::Zero();
    Vec16 db1 = Vec16::Zero();
    W2Type dW2 = W2Type::Zero();
    Vec16 db2 = Vec16::Zero();
    W3Type dW3 = W3Type::Zero();
    Vec3 db3 = Vec3::Zero();
};

class PhaseClassifier {
  public:
    W1Type W1 = W1Type::Zero();
    Vec16 b1 = Vec16::Zero();
    W2Type W2 = W2Type::Zero();
    Vec16 b2 = Vec16::Zero();
    W3Type W3 = W3Type::Zero();
    Vec3 b3 = Vec3::Zero();
    Vec4 feat_mean = Vec4::Zero();
    Vec4 feat_std = Vec4::Ones();
    std::uint32_t epochs = 0;
    std::uint64_t seed = 0;
    double holdout_accuracy = 0.0;

    Vec4 normalize(const PhaseFeatures& f) const {
        return (f.vec() - feat_mean).cwiseQuotient(feat_std);
    }

    /// Softmax probabilities for a normalized input.
    Vec3 probabilities_normalized(const Vec4& x) const {
        const Vec16 h1 = (W1 * x + b1).array().tanh();
        const Vec16 h2 = (W2 * h1 + b2).array().tanh();
        Vec3 z = W3 * h2 + b3;
        z.array() -= z.maxCoeff();
        Vec3 p = z.array().exp();
        return p / p.sum();
    }

    Vec3 probabilities(const PhaseFeatures& f) const {
        f.validate();
        return probabilities_normalized(normalize(f));
    }

    std::pair<contact::GaitPhase, double> classify(const PhaseFeatures& f) const {
        const Vec3 p = probabilities(f);
        int idx;
        const double conf = p.maxCoeff(&idx);
        return {contact::phase_from_index(idx), conf};
    }

    /// Mean cross-entropy over a normalized batch, with gradients
    /// accumulated by backprop. Exposed so tests can difference it.
    double loss_and_gradients(const std::vector<Vec4>& x,
                              const std::vector<int>& labels,
                              NetworkGradients* grads = nullptr) const {
        double loss = 0.0;
        const double inv_n = 1.0 / static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Vec16 a1 = W1 * x[i] + b1;
            const Vec16 h1 = a1.array().tanh();
            const Vec16 a2 = W2 * h1 + b2;
            const Vec16 h2 = a2.array().tanh();
            Vec3 z = W3 * h2 + b3;
            z.array() -= z.maxCoeff();
            const Vec3 expz = z.array().exp();
            const Vec3 p = expz / expz.sum();
            loss -= std::log(std::max(p(labels[i]), 1e-300)) * inv_n;
            if (!grads) continue;

            Vec3 dz = p;
            dz(labels[i]) -= 1.0;
            dz *= inv_n;
            grads->dW3 += dz * h2.transpose();
            grads->db3 += dz;
            const Vec16 dh2 = W3.transpose() * dz;
            const Vec16 da2 = dh2.cwiseProduct(Vec16::Ones() - h2.cwiseProduct(h2));
            grads->dW2 += da2 * h1.transpose();
            grads->db2 += da2;
            const Vec16 dh1 = W2.transpose() * da2;
            const Vec16 da1 = dh1.cwiseProduct(Vec16::Ones() - h1.cwiseProduct(h1));
            grads->dW1 += da1 * x[i].transpose();
            grads->db1 += da1;
        }
        return loss;
    }

    /// Flat parameter access for finite-difference checks.
    std::vector<double> flatten() const {
        std::vector<double> v;
        auto push = [&](const double* p, std::size_t n) { v.insert(v.end(), p, p + n); };
        push(W1.data(), 64);
        push(b1.data(), 16);
        push(W2.data(), 256);
        push(b2.data(), 16);
        push(W3.data(), 48);
        push(b3.data(), 3);
        return v;
    }

    void unflatten(const std::vector<double>& v) {
        if (v.size() != 403)
            throw InvalidStateError("PhaseClassifier: wrong parameter count");
        const double* p = v.data();
        std::memcpy(W1.data(), p, 64 * sizeof(double)); p += 64;
        std::memcpy(b1.data(), p, 16 * sizeof(double)); p += 16;
        std::memcpy(W2.data(), p, 256 * sizeof(double)); p += 256;
        std::memcpy(b2.data(), p, 16 * sizeof(double)); p += 16;
        std::memcpy(W3.data(), p, 48 * sizeof(double)); p += 48;
        std::memcpy(b3.data(), p, 3 * sizeof(double));
    }

    static std::vector<double> flatten_gradients(const NetworkGradients& g) {
        PhaseClassifier tmp;
        tmp.W1 = g.dW1; tmp.b1 = g.db1;
        tmp.W2 = g.dW2; tmp.b2 = g.db2;
        tmp.W3 = g.dW3; tmp.b3 = g.db3;
        return tmp.flatten();
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("PhaseClassifier: cannot open " + path);
        const char magic[4] = {'S', 'R', 'L', 'C'};
        out.write(magic, 4);
        const std::uint8_t version = 1;
        out.write(reinterpret_cast<const char*>(&version), 1);
        const std::uint32_t dims[4] = {4, 16, 16, 3};
        out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
        auto wd = [&](const double* p, std::size_t n) {
            out.write(reinterpret_cast<const char*>(p),
                      static_cast<std::streamsize>(n * sizeof(double)));
        };
        wd(feat_mean.data(), 4);
        wd(feat_std.data(), 4);
        wd(W1.data(), 64); wd(b1.data(), 16);
        wd(W2.data(), 256); wd(b2.data(), 16);
        wd(W3.data(), 48); wd(b3.data(), 3);
        out.write(reinterpret_cast<const char*>(&epochs), sizeof(epochs));
        out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
        out.write(reinterpret_cast<const char*>(&holdout_accuracy),
                  sizeof(holdout_accuracy));
        if (!out) throw ConfigError("PhaseClassifier: write failed for " + path);
    }

    static PhaseClassifier load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("PhaseClassifier: cannot open " + path);
        char magic[4];
        in.read(magic, 4);
        if (!in || std::memcmp(magic, "SRLC", 4) != 0)
            throw ConfigError("PhaseClassifier: bad magic in " + path);
        std::uint8_t version = 0;
        in.read(reinterpret_cast<char*>(&version), 1);
        if (version != 1)
            throw ConfigError("PhaseClassifier: unsupported version " +
                              std::to_string(version));
        std::uint32_t dims[4];
        in.read(reinterpret_cast<char*>(dims), sizeof(dims));
        if (dims[0] != 4 || dims[1] != 16 || dims[2] != 16 || dims[3] != 3)
            throw ConfigError("PhaseClassifier: unexpected layer sizes");
        PhaseClassifier c;
        auto rd = [&](double* p, std::size_t n) {
            in.read(reinterpret_cast<char*>(p),
                    static_cast<std::streamsize>(n * sizeof(double)));
        };
        rd(c.feat_mean.data(), 4);
        rd(c.feat_std.data(), 4);
        rd(c.W1.data(), 64); rd(c.b1.data(), 16);
        rd(c.W2.data(), 256); rd(c.b2.data(), 16);
        rd(c.W3.data(), 48); rd(c.b3.data(), 3);
        in.read(reinterpret_cast<char*>(&c.epochs), sizeof(c.epochs));
        in.read(reinterpret_cast<char*>(&c.seed), sizeof(c.seed));
        in.read(reinterpret_cast<char*>(&c.holdout_accuracy),
                sizeof(c.holdout_accuracy));
        if (!in) throw ConfigError("PhaseClassifier: truncated file " + path);
        if (!all_finite(c.W1) || !all_finite(c.W2) || !all_finite(c.W3))
            throw ConfigError("PhaseClassifier: non-finite weights in " + path);
        return c;
    }
};

struct TrainOptions {
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    double holdout_fraction = 0.2;
};

/// Supervised training, deterministic in `seed`. 20% of the data is held
/// out (seeded shuffle) and scored after the final epoch.
inline PhaseClassifier train_classifier(const std::vector<LabeledSample>& dataset,
                                        std::uint64_t seed, std::uint32_t epochs,
                                        const TrainOptions& opt = {}) {
    if (dataset.size() < 300)
        throw InvalidStateError("train_classifier: need at least 300 samples");
    std::array<std::size_t, 3> class_counts = {0, 0, 0};
    for (const auto& s : dataset) {
        s.features.validate();
        class_counts[static_cast<std::size_t>(s.label)]++;
    }
    for (std::size_t k = 0; k < 3; ++k)
        if (class_counts[k] == 0)
            throw InvalidStateError(
                "train_classifier: class " +
                std::string(contact::to_string(contact::phase_from_index(
                    static_cast<int>(k)))) +
                " absent from dataset");

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t holdout =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     opt.holdout_fraction *
                                     static_cast<double>(dataset.size())));
    const std::size_t train_n = dataset.size() - holdout;

    PhaseClassifier clf;
    clf.seed = seed;
    clf.epochs = epochs;

    // Normalization from the training split only.
    Vec4 mean = Vec4::Zero();
    for (std::size_t i = 0; i < train_n; ++i)
        mean += dataset[order[i]].features.vec();
    mean /= static_cast<double>(train_n);
    Vec4 var = Vec4::Zero();
    for (std::size_t i = 0; i < train_n; ++i) {
        const Vec4 d = dataset[order[i]].features.vec() - mean;
        var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(train_n);
    clf.feat_mean = mean;
    clf.feat_std = var.cwiseSqrt().cwiseMax(1e-9);

    std::vector<Vec4> X(train_n);
    std::vector<int> y(train_n);
    for (std::size_t i = 0; i < train_n; ++i) {
        X[i] = clf.normalize(dataset[order[i]].features);
        y[i] = static_cast<int>(dataset[order[i]].label);
    }

    auto init = [&](double* data, std::size_t n, double fan_in, double fan_out) {
        const double r = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-r, r);
        for (std::size_t i = 0; i < n; ++i) data[i] = u(rng);
    };
    init(clf.W1.data(), 64, 4, 16);
    init(clf.W2.data(), 256, 16, 16);
    init(clf.W3.data(), 48, 16, 3);

    NetworkGradients vel; // momentum accumulator
    std::vector<std::size_t> idx(train_n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<Vec4> bx;
    std::vector<int> by;
    for (std::uint32_t epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t start = 0; start < train_n; start += opt.batch_size) {
            const std::size_t end = std::min(train_n, start + opt.batch_size);
            bx.clear();
            by.clear();
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(X[idx[i]]);
                by.push_back(y[idx[i]]);
            }
            NetworkGradients g;
            clf.loss_and_gradients(bx, by, &g);
            const double lr = opt.learning_rate;
            vel.dW1 = opt.momentum * vel.dW1 - lr * g.dW1;
            vel.db1 = opt.momentum * vel.db1 - lr * g.db1;
            vel.dW2 = opt.momentum * vel.dW2 - lr * g.dW2;
            vel.db2 = opt.momentum * vel.db2 - lr * g.db2;
            vel.dW3 = opt.momentum * vel.dW3 - lr * g.dW3;
            vel.db3 = opt.momentum * vel.db3 - lr * g.db3;
            clf.W1 += vel.dW1; clf.b1 += vel.db1;
            clf.W2 += vel.dW2; clf.b2 += vel.db2;
            clf.W3 += vel.dW3; clf.b3 += vel.db3;
        }
    }

    std::size_t correct = 0;
    for (std::size_t i = train_n; i < dataset.size(); ++i) {
        const auto& s = dataset[order[i]];
        if (clf.classify(s.features).first == s.label) ++correct;
    }
    clf.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(holdout);
    return clf;
}

/// Training-set CSV schema: `abs_err,abs_derr,grf,grf_rate,label`.
inline void save_training_csv(const std::vector<LabeledSample>& data,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("save_training_csv: cannot open " + path);
    out << "abs_err,abs_derr,grf,grf_rate,label\n";
    char buf[256];
    for (const auto& s : data) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d\n",
                      s.features.abs_err, s.features.abs_derr, s.features.grf,
                      s.features.grf_rate, static_cast<int>(s.label));
        out << buf;
    }
}

inline std::vector<LabeledSample> load_training_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvFormatError("load_training_csv: cannot open " + path, 0);
    std::string line;
    if (!std::getline(in, line)) throw CsvFormatError("load_training_csv: empty file", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "abs_err,abs_derr,grf,grf_rate,label")
        throw CsvFormatError("load_training_csv: bad header", 1);
    std::vector<LabeledSample> data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        LabeledSample s;
        int label = -1;
        const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%d",
                                    &s.features.abs_err, &s.features.abs_derr,
                                    &s.features.grf, &s.features.grf_rate, &label);
        if (got != 5)
            throw CsvFormatError("load_training_csv: malformed row", line_no);
        try {
            s.features.validate();
            s.label = contact::phase_from_index(label);
        } catch (const InvalidStateError& e) {
            throw CsvFormatError(std::string("load_training_csv: ") + e.what(), line_no);
        }
        data.push_back(s);
    }
    return data;
}

} // namespace srl::nn
