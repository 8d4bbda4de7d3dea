#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rkm/cluster.hpp"
#include "rkm/kernels.hpp"
#include "rkm/model.hpp"

namespace rkm::cli {

struct ComponentConfig {
    double weight = 0.0;
    std::vector<double> mean;
    // Exactly one of the three is set.
    std::optional<double> isotropic;
    std::optional<std::vector<double>> diagonal;
    std::optional<std::vector<std::vector<double>>> full;

    bool operator==(const ComponentConfig&) const = default;
};

struct ModelConfig {
    /// figure1 | two_gaussians | isotropic_scales | single_gaussian | custom
    std::string kind = "figure1";
    std::optional<std::int64_t> n;
    std::optional<double> s;
    std::optional<double> separation;
    std::optional<std::vector<double>> variances;
    std::optional<std::vector<ComponentConfig>> components;

    bool operator==(const ModelConfig&) const = default;
};

struct KernelConfig {
    /// gaussian | distance | smoothed_distance | h_t
    std::string kind = "gaussian";
    std::optional<double> tau;
    std::optional<double> r0;
    std::optional<double> t;
    std::optional<double> c1;
    std::optional<double> c2;
    /// fixed | spectral_gap | bulk_median
    std::optional<std::string> threshold_rule;
    std::optional<double> radius;
    std::optional<bool> spherical;

    bool operator==(const KernelConfig&) const = default;
};

struct SamplingConfig {
    /// fixed | per_component | poisson
    std::string mode = "per_component";
    std::optional<std::uint64_t> total;
    std::optional<std::vector<std::uint64_t>> per_component;
    std::optional<double> mean;
    /// Sample size as a multiple of n where a command derives it from n.
    std::optional<std::uint64_t> size_factor;

    bool operator==(const SamplingConfig&) const = default;
};

struct ClusterConfig {
    int k = 2;
    int restarts = 10;
    bool fast_path = false;
    bool radial = false;
    /// model | plug_in | value
    std::string delta = "model";
    std::optional<double> delta_value;

    bool operator==(const ClusterConfig&) const = default;
};

struct Panel {
    std::int64_t n = 0;
    double s = 0.0;

    bool operator==(const Panel&) const = default;
};

struct ExperimentConfig {
    /// sample | figure1 | gap-scan | kpca-cluster | cov-cluster | gram-check | diag-ch
    std::string experiment;
    std::optional<ModelConfig> model;
    std::optional<KernelConfig> kernel;
    std::optional<SamplingConfig> sampling;
    std::optional<ClusterConfig> cluster;
    std::optional<std::vector<Panel>> panels;
    std::optional<std::vector<std::int64_t>> dims;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = ".";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses JSON text. Unknown keys, wrong types and malformed JSON throw
/// ValidationError naming the offending path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Pretty-printed JSON; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);

/// Built-in configuration for a subcommand, used when --config is absent.
ExperimentConfig default_config(const std::string& experiment);

/// Checks the config against the preconditions of everything the
/// experiment will call, before any computation starts.
void validate(const ExperimentConfig& config, bool allow_large);

/// Builds the mixture described by `m`, with `n_override` replacing m.n.
model::MixtureModel build_model(const ModelConfig& m, std::optional<std::int64_t> n_override = std::nullopt);
/// Kernel for dimension n; defaults tau = r0 = sqrt(n), t = 0.1.
kernels::KernelSpec build_kernel(const KernelConfig& k, Eigen::Index n);
model::SizeMode build_size_mode(const SamplingConfig& s, const model::MixtureModel& m);
cluster::ThresholdRule parse_threshold_rule(const std::string& name);

} // namespace rkm::cli
