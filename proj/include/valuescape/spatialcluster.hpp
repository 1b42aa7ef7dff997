#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "valuescape/geometry.hpp"
#include "valuescape/ingest.hpp"
#include "valuescape/parallel.hpp"

namespace valuescape::cluster {

enum class Metric { euclidean_projected };

struct ClusterConfig {
    int min_cluster_size = 15;
    int min_samples = 5;
    Metric metric = Metric::euclidean_projected;

    void validate() const;
};

struct ClusterResult {
    std::vector<int> labels;          // per point, -1 = noise
    int n_clusters = 0;
    std::vector<double> stabilities;  // per cluster label
    double mst_weight = 0.0;          // total mutual-reachability MST weight

    nlohmann::ordered_json to_json() const;
};

// Distance to the k-th nearest neighbor, self excluded. Both modes return
// bitwise-identical results; openmp just spreads points across threads.
std::vector<double> core_distances(std::span<const geometry::Point> pts, int k,
                                   ExecMode mode = ExecMode::serial);

// HDBSCAN: mutual-reachability MST (Prim), single-linkage hierarchy,
// condensed tree at min_cluster_size, excess-of-mass cluster selection.
// Fewer than min_cluster_size points is not an error; everything is noise.
ClusterResult hdbscan(std::span<const geometry::Point> pts, const ClusterConfig& config,
                      ExecMode mode = ExecMode::serial);

// One public value's spatial slice: the documents that carry the value and
// a location, plus their cluster labels.
struct ValueLayer {
    std::string value_id;
    std::vector<std::string> contribution_ids;  // aligned with points
    std::vector<geometry::Point> points;
    ClusterResult clusters;
};

struct LayerInput {
    std::string contribution_id;
    std::string value_id;
};

// Independent HDBSCAN per value layer. Assignments without a projected
// point are counted in skipped_without_location.
struct LayerClustering {
    std::map<std::string, ValueLayer> layers;
    std::size_t skipped_without_location = 0;
};

LayerClustering cluster_value_layers(const std::vector<LayerInput>& assignments,
                                     const ingest::Projection& projection,
                                     const ClusterConfig& config,
                                     ExecMode mode = ExecMode::serial);

}  // namespace valuescape::cluster
