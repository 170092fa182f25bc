#include "prf/estimators.hpp"

#include <algorithm>

#include "prf/errors.hpp"

namespace prf {

Dataset generate_dataset(const RegressionFn& f, std::size_t n, double sigma, Engine& rng) {
    if (n < 1) throw ParameterError("dataset size must be at least 1");
    if (!(sigma >= 0.0)) throw ParameterError("noise level must be non-negative");
    Dataset data;
    data.dim = f.dim();
    data.sigma = sigma;
    data.xs.resize(n * data.dim);
    data.ys.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < data.dim; ++j) data.xs[i * data.dim + j] = uniform01(rng);
        const double noise = sigma > 0.0 ? sigma * standard_normal(rng) : 0.0;
        data.ys[i] = f.eval(data.point(i)) + noise;
    }
    return data;
}

TreeEstimator::TreeEstimator(Partition partition, const Dataset& data)
    : partition_(std::move(partition)),
      leaf_values_(partition_.size(), 0.0),
      leaf_counts_(partition_.size(), 0) {
    if (data.dim != partition_.dim()) throw ParameterError("dataset and partition dimensions differ");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t c = partition_.locate(data.point(i));
        leaf_values_[c] += data.ys[i];
        ++leaf_counts_[c];
    }
    for (std::size_t c = 0; c < leaf_values_.size(); ++c) {
        if (leaf_counts_[c] > 0) leaf_values_[c] /= static_cast<double>(leaf_counts_[c]);
    }
}

double TreeEstimator::predict(std::span<const double> x) const { return leaf_values_[partition_.locate(x)]; }

std::size_t TreeEstimator::empty_leaves() const {
    return static_cast<std::size_t>(std::count(leaf_counts_.begin(), leaf_counts_.end(), std::size_t{0}));
}

TreeEstimator fit_tree(Partition partition, const Dataset& data) { return {std::move(partition), data}; }

ForestEstimator::ForestEstimator(std::vector<TreeEstimator> trees) : trees_(std::move(trees)) {
    if (trees_.empty()) throw ParameterError("a forest needs at least one tree");
}

double ForestEstimator::predict(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(x);
    return s / static_cast<double>(trees_.size());
}

std::vector<double> population_projection(const Partition& partition, const RegressionFn& f) {
    std::vector<double> beta(partition.size());
    for (std::size_t c = 0; c < beta.size(); ++c) beta[c] = f.cell_average(partition.cell(c));
    return beta;
}

double s_tilde(const Partition& partition, const RegressionFn& f, std::span<const double> x) {
    return f.cell_average(partition.cell(partition.locate(x)));
}

double s_tilde(std::span<const Partition> partitions, const RegressionFn& f, std::span<const double> x) {
    if (partitions.empty()) throw ParameterError("need at least one partition");
    double s = 0.0;
    for (const auto& p : partitions) s += s_tilde(p, f, x);
    return s / static_cast<double>(partitions.size());
}

}  // namespace prf
