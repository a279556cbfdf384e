#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodygen/rng.hpp"

namespace bodygen {

struct ValueRange {
    double lo = 0.0, hi = 1.0;
    double sample(Rng& rng) const { return lo == hi ? lo : rng.uniform(lo, hi); }
};

// Counts and parameter ranges of the layered asset pools.
struct AssetCatalog {
    int hair_count = 45;
    int garment_count = 68;
    int texture_count = 1038;  // shared pool for pattern/decal/bump templates
    int accessory_count = 46;
    int guide_count = 8;  // hairstyle guide sets per template

    ValueRange hair_length{0.05, 0.6};
    ValueRange hair_curliness{0.0, 1.0};
    ValueRange mapping_offset{0.0, 1.0};
    ValueRange mapping_scale{0.5, 2.0};
    ValueRange mapping_rotation{0.0, 6.283185307179586};
    double accessory_probability = 0.3;

    void validate() const;
};

// Named scalp regions a hair template can attach to.
inline const std::array<const char*, 5>& hair_regions() {
    static const std::array<const char*, 5> regions = {"fringe", "top", "temporal", "occipital", "bottom"};
    return regions;
}

struct HairConfig {
    int template_id = 0;
    std::vector<int> regions;  // indices into hair_regions(), non-empty
    int guide_id = 0;
    double length = 0.0;
    double curliness = 0.0;
};

struct TextureConfig {
    int pattern_id = 0;
    int decal_id = 0;
    int bump_id = 0;
    std::array<double, 4> mapping{};  // offset u, offset v, scale, rotation
    std::array<double, 3> color{};    // rgb in [0, 1]
};

// One actor's layered configuration: consumed downstream as metadata; only
// body shape and attachments have geometric effect in this pipeline.
struct LayeredAssetConfig {
    HairConfig hair;
    int garment_id = 0;
    TextureConfig texture;
    std::vector<int> accessory_ids;

    void validate(const AssetCatalog& catalog) const;
};

struct ActorSpec {
    LayeredAssetConfig assets;
    int clip_id = 0;
};

struct SequenceSpec {
    std::vector<ActorSpec> actors;  // 1 to 4
    double duration_s = 2.0;       // in [2, 10]
    double fps = 30.0;
    int camera_count = 4;
    int scene_id = 0;

    void validate() const;
};

LayeredAssetConfig sample_actor_config(Rng& rng, const AssetCatalog& catalog);

SequenceSpec sample_sequence_spec(Rng& rng, const AssetCatalog& catalog, int motion_library_size,
                                  int scene_count, double fps, int camera_count);

void to_json(nlohmann::json& j, const AssetCatalog& c);
void from_json(const nlohmann::json& j, AssetCatalog& c);
void to_json(nlohmann::json& j, const LayeredAssetConfig& c);
void from_json(const nlohmann::json& j, LayeredAssetConfig& c);
void to_json(nlohmann::json& j, const SequenceSpec& s);
void from_json(const nlohmann::json& j, SequenceSpec& s);

}  // namespace bodygen
