#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rolefocus {

using Embedding = std::vector<double>;

struct CharacterProfile {
    std::string character_id;
    std::string profile_text;
    Embedding embedding;
};

class GroupingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fewer profiles than requested clusters.
class TooFewProfiles : public GroupingError {
public:
    using GroupingError::GroupingError;
};

/// Role groups: k-means centroids over character embeddings.
struct GroupModel {
    std::size_t cluster_count = 0;
    std::uint64_t seed = 0;
    std::vector<Embedding> centroids;
    std::map<std::string, std::size_t> assignments;
    // Inertia after every assignment pass, initial assignment first.
    std::vector<double> inertia_trace;
    int iterations = 0;

    std::size_t dimension() const noexcept { return centroids.empty() ? 0 : centroids.front().size(); }
    std::optional<std::size_t> group_of(const std::string& character_id) const;
};

inline constexpr std::size_t kDefaultClusterCount = 7;
inline constexpr int kDefaultMaxIters = 100;
inline constexpr std::size_t kHashEmbeddingDim = 64;

/// Checks profile ids are unique, dimensions agree, and values are finite.
void validate_profiles(std::span<const CharacterProfile> profiles);

/// Lloyd's algorithm from a seeded k-means++ start; stops when assignments
/// no longer change or after max_iters refinement passes. Empty clusters are
/// reseeded at the point farthest from its centroid.
GroupModel fit_kmeans(std::span<const CharacterProfile> profiles, std::size_t cluster_count, std::uint64_t seed,
                      int max_iters = kDefaultMaxIters);

/// Nearest centroid by Euclidean distance, lowest index on ties.
std::size_t assign_group(const GroupModel& model, std::span<const double> embedding);

/// Sum of squared distances from each profile to its group's centroid.
double inertia(const GroupModel& model, std::span<const CharacterProfile> profiles);

/// Mean silhouette coefficient. Singleton clusters contribute 0, as do
/// points whose intra and nearest-cluster distances are both 0.
/// Throws GroupingError when G < 2, a cluster is empty, or fewer than two profiles.
double silhouette(const GroupModel& model, std::span<const CharacterProfile> profiles);

struct SweepRow {
    std::size_t cluster_count;
    double inertia;
    std::optional<double> silhouette;  // undefined for G = 1
};

/// Best-of-seeds (by inertia) fit for each cluster count.
std::vector<SweepRow> sweep_cluster_counts(std::span<const CharacterProfile> profiles,
                                           std::span<const std::size_t> cluster_counts,
                                           std::span<const std::uint64_t> seeds, int max_iters = kDefaultMaxIters);

/// Fallback embedder: hashed character trigram counts of the lowercased
/// text, L2-normalized.
Embedding hash_embed(std::string_view text, std::size_t dim = kHashEmbeddingDim);

}  // namespace rolefocus
