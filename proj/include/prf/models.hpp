#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "prf/dataset.hpp"
#include "prf/geometry.hpp"
#include "prf/rng.hpp"

namespace prf {

enum class ModelKind { Toy, Purf, Bprf, Ubprf, Midpoint, Holdout };

std::string_view model_name(ModelKind kind);
// Throws ParameterError listing the valid names.
ModelKind parse_model(std::string_view name);

// Descriptor of a random-partition law.
//   toy, purf, ubprf: `k` splits, k+1 leaves
//   bprf, midpoint:   `k` is the depth p, 2^p leaves
//   holdout:          `k` is the maximal leaf count
struct ModelSpec {
    ModelKind kind = ModelKind::Toy;
    std::size_t k = 2;
    std::size_t dim = 1;
    std::vector<double> weights;  // midpoint split-coordinate weights; empty means uniform
    std::size_t n_prime = 0;      // holdout sample size; 0 means k^2
    double sigma = 0.25;          // holdout noise level
    std::size_t mtry = 0;         // 0 means max(floor(d/3), 1)

    void validate() const;
    std::size_t leaf_count() const;
    std::size_t effective_mtry() const;
    std::size_t effective_n_prime() const;
    std::vector<double> effective_weights() const;
    bool is_tree_depth() const { return kind == ModelKind::Bprf || kind == ModelKind::Midpoint; }
};

// Spec for size parameter k as used in rate sweeps: k splits for toy, purf
// and ubprf, k leaves for holdout, depth log2(k) for bprf and midpoint.
ModelSpec spec_for_k(ModelKind kind, std::size_t k, std::size_t dim);

// Samplers write into `out`, reusing its storage.
void sample_toy(std::size_t k, Engine& rng, Partition& out);
void sample_purf(std::size_t k, Engine& rng, Partition& out);
void sample_bprf(std::size_t p, std::size_t d, Engine& rng, Partition& out);
void sample_ubprf(std::size_t k, std::size_t d, Engine& rng, Partition& out);
void sample_midpoint(std::size_t p, std::size_t d, const std::vector<double>& weights, Engine& rng,
                     Partition& out);
void sample_holdout(std::size_t k, const Dataset& data, std::size_t mtry, Engine& rng, Partition& out);

// Toy partition for a given translation T in [0,1).
void toy_partition(std::size_t k, double shift, Partition& out);

// Dispatches on spec.kind. Holdout requires `holdout_data`.
void sample_partition(const ModelSpec& spec, Engine& rng, Partition& out,
                      const Dataset* holdout_data = nullptr);
Partition sample_partition(const ModelSpec& spec, Engine& rng, const Dataset* holdout_data = nullptr);

}  // namespace prf
