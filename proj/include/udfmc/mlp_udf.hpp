#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "field.hpp"

namespace udfmc {

/// Identifier of the positional-encoding basis written to weight files. Per
/// coordinate c the encoder emits c, then sin(2^k pi c), cos(2^k pi c) for
/// k = 0..L-1. Coordinates are encoded in x, y, z order and the latent code is
/// appended after the encoded coordinates.
inline constexpr const char* kEncodingBasis = "raw+sincos_pow2_pi_per_coord";

/// Fully-connected network phi(z, x) = |f(enc(x), z)|, optionally clamped at
/// d_max. Hidden layers use ReLU; the output layer is linear followed by an
/// absolute value. The latent code z is the parameter vector.
class MlpUdf final : public UdfField {
public:
    struct Layer {
        std::size_t in = 0;
        std::size_t out = 0;
        std::vector<double> weights;  // row-major, out x in
        std::vector<double> bias;
    };

    MlpUdf(int encoding_order, std::vector<Layer> layers, std::vector<double> latent,
           std::optional<double> d_max = std::nullopt)
        : order_(encoding_order), layers_(std::move(layers)), latent_(std::move(latent)), d_max_(d_max) {
        if (order_ < 0) throw std::invalid_argument("MlpUdf: negative encoding order");
        if (layers_.empty()) throw std::invalid_argument("MlpUdf: no layers");
        std::size_t expected_in = input_dim();
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& layer = layers_[l];
            const std::string where = "MlpUdf: layer " + std::to_string(l);
            if (layer.in != expected_in)
                throw std::invalid_argument(where + " expects " + std::to_string(layer.in) + " inputs but receives " +
                                            std::to_string(expected_in));
            if (layer.weights.size() != layer.in * layer.out)
                throw std::invalid_argument(where + " weight matrix has " + std::to_string(layer.weights.size()) +
                                            " entries, expected " + std::to_string(layer.in * layer.out));
            if (layer.bias.size() != layer.out)
                throw std::invalid_argument(where + " bias has " + std::to_string(layer.bias.size()) +
                                            " entries, expected " + std::to_string(layer.out));
            expected_in = layer.out;
        }
        if (expected_in != 1)
            throw std::invalid_argument("MlpUdf: layer " + std::to_string(layers_.size() - 1) +
                                        " must have a single output");
        if (d_max_ && !(*d_max_ > 0.0)) throw std::invalid_argument("MlpUdf: d_max must be positive");
    }

    /// Parses the weight-file JSON. Shape errors name the offending layer.
    static MlpUdf from_json(const nlohmann::json& j) {
        const int order = j.at("encoding_order").get<int>();
        if (j.contains("encoding_basis") && j.at("encoding_basis").get<std::string>() != kEncodingBasis)
            throw std::invalid_argument("MlpUdf: unsupported encoding basis '" +
                                        j.at("encoding_basis").get<std::string>() + "'");
        const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
        // Each matrix may be flat (row-major) or a list of rows.
        std::vector<std::vector<double>> weights;
        for (const auto& m : j.at("weights")) {
            auto& flat = weights.emplace_back();
            for (const auto& v : m) {
                if (v.is_array())
                    for (const auto& x : v) flat.push_back(x.get<double>());
                else
                    flat.push_back(v.get<double>());
            }
        }
        const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
        const std::size_t latent_dim = j.value("latent_dim", std::size_t{0});
        if (sizes.size() < 2) throw std::invalid_argument("MlpUdf: layer_sizes needs at least two entries");
        if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1)
            throw std::invalid_argument("MlpUdf: expected " + std::to_string(sizes.size() - 1) +
                                        " weight matrices and bias vectors");
        const std::size_t expected_in = 3 * (1 + 2 * static_cast<std::size_t>(order)) + latent_dim;
        if (sizes.front() != expected_in)
            throw std::invalid_argument("MlpUdf: layer 0 input size " + std::to_string(sizes.front()) +
                                        " does not match encoding (" + std::to_string(expected_in) + ")");
        std::vector<Layer> layers;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
            layers.push_back({sizes[l], sizes[l + 1], weights[l], biases[l]});
        std::vector<double> latent(latent_dim, 0.0);
        if (j.contains("latent")) {
            latent = j.at("latent").get<std::vector<double>>();
            if (latent.size() != latent_dim) throw std::invalid_argument("MlpUdf: latent size != latent_dim");
        }
        std::optional<double> d_max;
        if (j.contains("d_max") && !j.at("d_max").is_null()) d_max = j.at("d_max").get<double>();
        return MlpUdf(order, std::move(layers), std::move(latent), d_max);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["encoding_order"] = order_;
        j["encoding_basis"] = kEncodingBasis;
        std::vector<std::size_t> sizes{layers_.front().in};
        nlohmann::json weights = nlohmann::json::array(), biases = nlohmann::json::array();
        for (const auto& l : layers_) {
            sizes.push_back(l.out);
            weights.push_back(l.weights);
            biases.push_back(l.bias);
        }
        j["layer_sizes"] = sizes;
        j["weights"] = weights;
        j["biases"] = biases;
        j["latent_dim"] = latent_.size();
        j["latent"] = latent_;
        j["d_max"] = d_max_ ? nlohmann::json(*d_max_) : nlohmann::json(nullptr);
        return j;
    }

    std::size_t param_dim() const override { return latent_.size(); }
    std::size_t input_dim() const { return 3 * (1 + 2 * static_cast<std::size_t>(order_)) + latent_.size(); }
    int encoding_order() const { return order_; }
    const std::vector<Layer>& layers() const { return layers_; }

    double eval(const Point3& x) const override { return forward(x, nullptr); }
    Gradient grad_x(const Point3& x) const override { return sample(x).gradient; }

    FieldSample sample(const Point3& x) const override {
        std::vector<double> input_grad;
        const double d = forward(x, &input_grad);
        if (d == 0.0) return {0.0, {{}, true}};
        return {d, {spatial_gradient(x, input_grad), false}};
    }

    std::vector<double> param_sensitivity(const Point3& x) const override {
        std::vector<double> input_grad;
        forward(x, &input_grad);
        const std::size_t offset = input_dim() - latent_.size();
        return {input_grad.begin() + static_cast<std::ptrdiff_t>(offset), input_grad.end()};
    }

    std::vector<double> params() const override { return latent_; }
    std::unique_ptr<UdfField> with_params(std::span<const double> c) const override {
        detail::check_param_count(latent_.size(), c.size(), "MlpUdf");
        return std::make_unique<MlpUdf>(order_, layers_, std::vector<double>(c.begin(), c.end()), d_max_);
    }

    std::vector<double> encode(const Point3& x) const {
        std::vector<double> v;
        v.reserve(input_dim());
        for (int a = 0; a < 3; ++a) {
            v.push_back(x[a]);
            double freq = std::numbers::pi;
            for (int k = 0; k < order_; ++k, freq *= 2.0) {
                v.push_back(std::sin(freq * x[a]));
                v.push_back(std::cos(freq * x[a]));
            }
        }
        v.insert(v.end(), latent_.begin(), latent_.end());
        return v;
    }

private:
    /// Forward pass; when `input_grad` is given, also back-propagates d(phi)/d(input).
    double forward(const Point3& x, std::vector<double>* input_grad) const {
        std::vector<std::vector<double>> pre(layers_.size());
        std::vector<double> h = encode(x);
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& layer = layers_[l];
            std::vector<double> a(layer.bias);
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double* row = layer.weights.data() + o * layer.in;
                double s = 0.0;
                for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * h[i];
                a[o] += s;
            }
            if (input_grad) pre[l] = a;
            if (l + 1 < layers_.size())
                for (auto& v : a) v = std::max(v, 0.0);
            h = std::move(a);
        }
        const double y = h[0];
        double out = std::abs(y);
        bool clamped = false;
        if (d_max_ && out >= *d_max_) {
            out = *d_max_;
            clamped = true;
        }
        if (!input_grad) return out;

        std::vector<double> g{clamped ? 0.0 : detail_sign(y)};
        for (std::size_t l = layers_.size(); l-- > 0;) {
            const Layer& layer = layers_[l];
            if (l + 1 < layers_.size())
                for (std::size_t o = 0; o < layer.out; ++o)
                    if (pre[l][o] <= 0.0) g[o] = 0.0;
            std::vector<double> gin(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                if (g[o] == 0.0) continue;
                const double* row = layer.weights.data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) gin[i] += row[i] * g[o];
            }
            g = std::move(gin);
        }
        *input_grad = std::move(g);
        return out;
    }

    Vec3 spatial_gradient(const Point3& x, const std::vector<double>& input_grad) const {
        Vec3 grad;
        std::size_t idx = 0;
        for (int a = 0; a < 3; ++a) {
            double g = input_grad[idx++];
            double freq = std::numbers::pi;
            for (int k = 0; k < order_; ++k, freq *= 2.0) {
                g += input_grad[idx++] * freq * std::cos(freq * x[a]);
                g -= input_grad[idx++] * freq * std::sin(freq * x[a]);
            }
            grad[a] = g;
        }
        return grad;
    }

    static double detail_sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

    int order_;
    std::vector<Layer> layers_;
    std::vector<double> latent_;
    std::optional<double> d_max_;
};

}  // namespace udfmc
