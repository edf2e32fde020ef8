#include "rolefocus/grouping.hpp"

#include "rolefocus/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rolefocus {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::size_t nearest(std::span<const Embedding> centroids, std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.size(); ++j) {
        const double d = squared_distance(centroids[j], x);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

std::vector<Embedding> kmeans_plus_plus(std::span<const CharacterProfile> profiles, std::size_t k, Rng& rng) {
    const std::size_t n = profiles.size();
    std::vector<Embedding> centroids;
    centroids.reserve(k);
    centroids.push_back(profiles[rng.below(n)].embedding);

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(profiles[i].embedding, centroids[0]);

    while (centroids.size() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (target < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        centroids.push_back(profiles[pick].embedding);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(profiles[i].embedding, centroids.back()));
    }
    return centroids;
}

double assign_all(std::span<const CharacterProfile> profiles, std::span<const Embedding> centroids,
                  std::vector<std::size_t>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        labels[i] = nearest(centroids, profiles[i].embedding);
        total += squared_distance(centroids[labels[i]], profiles[i].embedding);
    }
    return total;
}

// Recomputes centroids as member means; empty clusters take the point
// farthest from its own centroid.
void update_centroids(std::span<const CharacterProfile> profiles, const std::vector<std::size_t>& labels,
                      std::vector<Embedding>& centroids) {
    const std::size_t k = centroids.size();
    const std::size_t dim = centroids.front().size();
    std::vector<Embedding> sums(k, Embedding(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        auto& s = sums[labels[i]];
        for (std::size_t d = 0; d < dim; ++d) s[d] += profiles[i].embedding[d];
        ++counts[labels[i]];
    }

    std::vector<std::size_t> empty;
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            empty.push_back(j);
            continue;
        }
        for (std::size_t d = 0; d < dim; ++d) centroids[j][d] = sums[j][d] / static_cast<double>(counts[j]);
    }
    if (empty.empty()) return;

    std::set<std::size_t> used;
    for (std::size_t j : empty) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            if (used.contains(i)) continue;
            const double d = squared_distance(profiles[i].embedding, centroids[labels[i]]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        used.insert(far);
        centroids[j] = profiles[far].embedding;
    }
}

std::vector<std::size_t> labels_for(const GroupModel& model, std::span<const CharacterProfile> profiles) {
    std::vector<std::size_t> labels;
    labels.reserve(profiles.size());
    for (const auto& p : profiles) {
        if (p.embedding.size() != model.dimension()) throw GroupingError("embedding dimension does not match model");
        const auto g = model.group_of(p.character_id);
        labels.push_back(g ? *g : assign_group(model, p.embedding));
    }
    return labels;
}

}  // namespace

std::optional<std::size_t> GroupModel::group_of(const std::string& character_id) const {
    const auto it = assignments.find(character_id);
    if (it == assignments.end()) return std::nullopt;
    return it->second;
}

void validate_profiles(std::span<const CharacterProfile> profiles) {
    std::set<std::string_view> ids;
    for (const auto& p : profiles) {
        if (!ids.insert(p.character_id).second) throw GroupingError("duplicate character_id " + p.character_id);
        if (p.embedding.empty()) throw GroupingError("empty embedding for " + p.character_id);
        if (p.embedding.size() != profiles.front().embedding.size()) {
            throw GroupingError("inconsistent embedding dimension for " + p.character_id);
        }
        for (double v : p.embedding) {
            if (!std::isfinite(v)) throw GroupingError("non-finite embedding value for " + p.character_id);
        }
    }
}

GroupModel fit_kmeans(std::span<const CharacterProfile> profiles, std::size_t cluster_count, std::uint64_t seed,
                      int max_iters) {
    if (cluster_count < 1) throw GroupingError("cluster count must be >= 1");
    if (profiles.size() < cluster_count) {
        throw TooFewProfiles(std::to_string(profiles.size()) + " profiles cannot form " + std::to_string(cluster_count) +
                             " clusters");
    }
    validate_profiles(profiles);

    Rng rng(seed);
    GroupModel model;
    model.cluster_count = cluster_count;
    model.seed = seed;
    model.centroids = kmeans_plus_plus(profiles, cluster_count, rng);

    std::vector<std::size_t> labels(profiles.size());
    model.inertia_trace.push_back(assign_all(profiles, model.centroids, labels));
    std::vector<std::size_t> next(profiles.size());
    for (int it = 0; it < max_iters; ++it) {
        update_centroids(profiles, labels, model.centroids);
        model.inertia_trace.push_back(assign_all(profiles, model.centroids, next));
        ++model.iterations;
        const bool stable = next == labels;
        labels.swap(next);
        if (stable) break;
    }

    for (std::size_t i = 0; i < profiles.size(); ++i) model.assignments[profiles[i].character_id] = labels[i];
    return model;
}

std::size_t assign_group(const GroupModel& model, std::span<const double> embedding) {
    if (model.centroids.empty()) throw GroupingError("group model has no centroids");
    if (embedding.size() != model.dimension()) {
        throw GroupingError("embedding dimension " + std::to_string(embedding.size()) + " does not match model dimension " +
                            std::to_string(model.dimension()));
    }
    return nearest(model.centroids, embedding);
}

double inertia(const GroupModel& model, std::span<const CharacterProfile> profiles) {
    const auto labels = labels_for(model, profiles);
    double total = 0.0;
    for (std::size_t i = 0; i < profiles.size(); ++i) total += squared_distance(model.centroids[labels[i]], profiles[i].embedding);
    return total;
}

double silhouette(const GroupModel& model, std::span<const CharacterProfile> profiles) {
    const std::size_t k = model.centroids.size();
    if (k < 2) throw GroupingError("silhouette needs at least two clusters");
    if (profiles.size() < 2) throw GroupingError("silhouette needs at least two profiles");
    const auto labels = labels_for(model, profiles);

    std::vector<std::size_t> sizes(k, 0);
    for (auto g : labels) ++sizes[g];
    if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) throw GroupingError("silhouette undefined with an empty cluster");

    const std::size_t n = profiles.size();
    double total = 0.0;
    std::vector<double> sum_to(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[labels[i]] == 1) continue;
        std::fill(sum_to.begin(), sum_to.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sum_to[labels[j]] += std::sqrt(squared_distance(profiles[i].embedding, profiles[j].embedding));
        }
        const double a = sum_to[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < k; ++g) {
            if (g != labels[i]) b = std::min(b, sum_to[g] / static_cast<double>(sizes[g]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

std::vector<SweepRow> sweep_cluster_counts(std::span<const CharacterProfile> profiles,
                                           std::span<const std::size_t> cluster_counts,
                                           std::span<const std::uint64_t> seeds, int max_iters) {
    if (seeds.empty()) throw GroupingError("sweep needs at least one seed");
    std::vector<SweepRow> rows;
    for (std::size_t g : cluster_counts) {
        std::optional<GroupModel> best;
        double best_inertia = std::numeric_limits<double>::infinity();
        for (auto seed : seeds) {
            GroupModel m = fit_kmeans(profiles, g, seed, max_iters);
            const double in = inertia(m, profiles);
            if (in < best_inertia) {
                best_inertia = in;
                best = std::move(m);
            }
        }
        SweepRow row{g, best_inertia, std::nullopt};
        if (g >= 2) {
            try {
                row.silhouette = silhouette(*best, profiles);
            } catch (const GroupingError&) {
                // leave undefined (empty cluster on degenerate data)
            }
        }
        rows.push_back(row);
    }
    return rows;
}

Embedding hash_embed(std::string_view text, std::size_t dim) {
    Embedding v(dim, 0.0);
    std::string lower(text);
    for (char& c : lower) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    auto add = [&](std::string_view gram) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : gram) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        v[h % dim] += 1.0;
    };
    if (lower.size() < 3) {
        if (!lower.empty()) add(lower);
    } else {
        for (std::size_t i = 0; i + 3 <= lower.size(); ++i) add(std::string_view(lower).substr(i, 3));
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

}  // namespace rolefocus
