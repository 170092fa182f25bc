#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prf/dataset.hpp"
#include "prf/functions.hpp"
#include "prf/geometry.hpp"
#include "prf/rng.hpp"

namespace prf {

// X uniform on [0,1)^d, Y = s(X) + sigma * N(0,1).
Dataset generate_dataset(const RegressionFn& f, std::size_t n, double sigma, Engine& rng);

// Regressogram on a fixed partition; empty cells predict 0.
class TreeEstimator {
public:
    TreeEstimator(Partition partition, const Dataset& data);

    double predict(std::span<const double> x) const;
    const Partition& partition() const { return partition_; }
    const std::vector<double>& leaf_values() const { return leaf_values_; }
    const std::vector<std::size_t>& leaf_counts() const { return leaf_counts_; }
    std::size_t empty_leaves() const;

private:
    Partition partition_;
    std::vector<double> leaf_values_;
    std::vector<std::size_t> leaf_counts_;
};

TreeEstimator fit_tree(Partition partition, const Dataset& data);

class ForestEstimator {
public:
    explicit ForestEstimator(std::vector<TreeEstimator> trees);

    double predict(std::span<const double> x) const;
    std::size_t size() const { return trees_.size(); }
    const std::vector<TreeEstimator>& trees() const { return trees_; }

private:
    std::vector<TreeEstimator> trees_;
};

// Cell averages of f, one per cell.
std::vector<double> population_projection(const Partition& partition, const RegressionFn& f);
// Projection of f on the partition, evaluated at x.
double s_tilde(const Partition& partition, const RegressionFn& f, std::span<const double> x);
// Average of the projections over several partitions.
double s_tilde(std::span<const Partition> partitions, const RegressionFn& f, std::span<const double> x);

}  // namespace prf
