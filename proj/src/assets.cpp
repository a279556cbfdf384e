#include "bodygen/assets.hpp"

#include <stdexcept>

namespace bodygen {

void AssetCatalog::validate() const {
    if (hair_count < 1 || garment_count < 1 || texture_count < 1 || accessory_count < 1 || guide_count < 1) {
        throw std::invalid_argument("AssetCatalog: all pool counts must be >= 1");
    }
    for (const ValueRange* r : {&hair_length, &hair_curliness, &mapping_offset, &mapping_scale, &mapping_rotation}) {
        if (r->hi < r->lo) throw std::invalid_argument("AssetCatalog: inverted parameter range");
    }
    if (accessory_probability < 0.0 || accessory_probability > 1.0) {
        throw std::invalid_argument("AssetCatalog: accessory probability must lie in [0, 1]");
    }
}

void LayeredAssetConfig::validate(const AssetCatalog& catalog) const {
    const auto in = [](int id, int count) { return id >= 0 && id < count; };
    if (!in(hair.template_id, catalog.hair_count)) throw std::invalid_argument("asset config: hair id out of range");
    if (!in(hair.guide_id, catalog.guide_count)) throw std::invalid_argument("asset config: guide id out of range");
    if (hair.regions.empty()) throw std::invalid_argument("asset config: hair region set empty");
    for (int r : hair.regions) {
        if (r < 0 || r >= static_cast<int>(hair_regions().size())) {
            throw std::invalid_argument("asset config: hair region out of range");
        }
    }
    if (hair.length < catalog.hair_length.lo || hair.length > catalog.hair_length.hi ||
        hair.curliness < catalog.hair_curliness.lo || hair.curliness > catalog.hair_curliness.hi) {
        throw std::invalid_argument("asset config: hair parameter outside declared range");
    }
    if (!in(garment_id, catalog.garment_count)) throw std::invalid_argument("asset config: garment id out of range");
    if (!in(texture.pattern_id, catalog.texture_count) || !in(texture.decal_id, catalog.texture_count) ||
        !in(texture.bump_id, catalog.texture_count)) {
        throw std::invalid_argument("asset config: texture id out of range");
    }
    for (double c : texture.color) {
        if (c < 0.0 || c > 1.0) throw std::invalid_argument("asset config: color outside [0, 1]");
    }
    for (int id : accessory_ids) {
        if (!in(id, catalog.accessory_count)) throw std::invalid_argument("asset config: accessory id out of range");
    }
}

void SequenceSpec::validate() const {
    if (actors.empty() || actors.size() > 4) throw std::invalid_argument("SequenceSpec: actor count must be 1..4");
    if (duration_s < 2.0 || duration_s > 10.0) throw std::invalid_argument("SequenceSpec: duration must be 2..10 s");
    if (!(fps > 0.0)) throw std::invalid_argument("SequenceSpec: fps must be positive");
    if (camera_count < 1) throw std::invalid_argument("SequenceSpec: camera count must be >= 1");
}

LayeredAssetConfig sample_actor_config(Rng& rng, const AssetCatalog& catalog) {
    catalog.validate();
    LayeredAssetConfig cfg;
    cfg.hair.template_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(catalog.hair_count)));
    cfg.hair.guide_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(catalog.guide_count)));
    // Non-empty region subset; each region joins with probability 1/2.
    do {
        cfg.hair.regions.clear();
        for (int r = 0; r < static_cast<int>(hair_regions().size()); ++r) {
            if (rng.bernoulli(0.5)) cfg.hair.regions.push_back(r);
        }
    } while (cfg.hair.regions.empty());
    cfg.hair.length = catalog.hair_length.sample(rng);
    cfg.hair.curliness = catalog.hair_curliness.sample(rng);

    cfg.garment_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(catalog.garment_count)));

    cfg.texture.pattern_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(catalog.texture_count)));
    cfg.texture.decal_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(catalog.texture_count)));
    cfg.texture.bump_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(catalog.texture_count)));
    cfg.texture.mapping = {catalog.mapping_offset.sample(rng), catalog.mapping_offset.sample(rng),
                           catalog.mapping_scale.sample(rng), catalog.mapping_rotation.sample(rng)};
    cfg.texture.color = {rng.uniform(), rng.uniform(), rng.uniform()};

    for (int id = 0; id < catalog.accessory_count; ++id) {
        if (rng.bernoulli(catalog.accessory_probability)) cfg.accessory_ids.push_back(id);
    }
    cfg.validate(catalog);
    return cfg;
}

SequenceSpec sample_sequence_spec(Rng& rng, const AssetCatalog& catalog, int motion_library_size,
                                  int scene_count, double fps, int camera_count) {
    if (motion_library_size < 1) throw std::invalid_argument("sample_sequence_spec: empty motion library");
    if (scene_count < 1) throw std::invalid_argument("sample_sequence_spec: empty scene list");

    SequenceSpec spec;
    spec.fps = fps;
    spec.camera_count = camera_count;
    spec.duration_s = rng.uniform(2.0, 10.0);
    spec.scene_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(scene_count)));
    const int actor_count = rng.uniform_int(1, 4);
    for (int a = 0; a < actor_count; ++a) {
        ActorSpec actor;
        actor.assets = sample_actor_config(rng, catalog);
        actor.clip_id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(motion_library_size)));
        spec.actors.push_back(std::move(actor));
    }
    spec.validate();
    return spec;
}

void to_json(nlohmann::json& j, const AssetCatalog& c) {
    const auto range = [](const ValueRange& r) { return nlohmann::json{r.lo, r.hi}; };
    j = {{"hair_count", c.hair_count},
         {"garment_count", c.garment_count},
         {"texture_count", c.texture_count},
         {"accessory_count", c.accessory_count},
         {"guide_count", c.guide_count},
         {"hair_length", range(c.hair_length)},
         {"hair_curliness", range(c.hair_curliness)},
         {"mapping_offset", range(c.mapping_offset)},
         {"mapping_scale", range(c.mapping_scale)},
         {"mapping_rotation", range(c.mapping_rotation)},
         {"accessory_probability", c.accessory_probability}};
}

void from_json(const nlohmann::json& j, AssetCatalog& c) {
    const auto range = [&j](const char* key, ValueRange fallback) {
        if (!j.contains(key)) return fallback;
        return ValueRange{j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>()};
    };
    AssetCatalog defaults;
    c.hair_count = j.value("hair_count", defaults.hair_count);
    c.garment_count = j.value("garment_count", defaults.garment_count);
    c.texture_count = j.value("texture_count", defaults.texture_count);
    c.accessory_count = j.value("accessory_count", defaults.accessory_count);
    c.guide_count = j.value("guide_count", defaults.guide_count);
    c.hair_length = range("hair_length", defaults.hair_length);
    c.hair_curliness = range("hair_curliness", defaults.hair_curliness);
    c.mapping_offset = range("mapping_offset", defaults.mapping_offset);
    c.mapping_scale = range("mapping_scale", defaults.mapping_scale);
    c.mapping_rotation = range("mapping_rotation", defaults.mapping_rotation);
    c.accessory_probability = j.value("accessory_probability", defaults.accessory_probability);
    c.validate();
}

void to_json(nlohmann::json& j, const LayeredAssetConfig& c) {
    nlohmann::json regions = nlohmann::json::array();
    for (int r : c.hair.regions) regions.push_back(hair_regions()[static_cast<std::size_t>(r)]);
    j = {{"hair",
          {{"template_id", c.hair.template_id},
           {"regions", std::move(regions)},
           {"guide_id", c.hair.guide_id},
           {"length", c.hair.length},
           {"curliness", c.hair.curliness}}},
         {"garment_id", c.garment_id},
         {"texture",
          {{"pattern_id", c.texture.pattern_id},
           {"decal_id", c.texture.decal_id},
           {"bump_id", c.texture.bump_id},
           {"mapping", c.texture.mapping},
           {"color", c.texture.color}}},
         {"accessory_ids", c.accessory_ids}};
}

void from_json(const nlohmann::json& j, LayeredAssetConfig& c) {
    const auto& hair = j.at("hair");
    c.hair.template_id = hair.at("template_id").get<int>();
    c.hair.guide_id = hair.at("guide_id").get<int>();
    c.hair.regions.clear();
    for (const auto& name : hair.at("regions")) {
        const std::string s = name.get<std::string>();
        for (std::size_t r = 0; r < hair_regions().size(); ++r) {
            if (s == hair_regions()[r]) c.hair.regions.push_back(static_cast<int>(r));
        }
    }
    c.hair.length = hair.at("length").get<double>();
    c.hair.curliness = hair.at("curliness").get<double>();
    c.garment_id = j.at("garment_id").get<int>();
    const auto& tex = j.at("texture");
    c.texture.pattern_id = tex.at("pattern_id").get<int>();
    c.texture.decal_id = tex.at("decal_id").get<int>();
    c.texture.bump_id = tex.at("bump_id").get<int>();
    c.texture.mapping = tex.at("mapping").get<std::array<double, 4>>();
    c.texture.color = tex.at("color").get<std::array<double, 3>>();
    c.accessory_ids = j.at("accessory_ids").get<std::vector<int>>();
}

void to_json(nlohmann::json& j, const SequenceSpec& s) {
    nlohmann::json actors = nlohmann::json::array();
    for (const ActorSpec& a : s.actors) {
        nlohmann::json aj;
        to_json(aj["assets"], a.assets);
        aj["clip_id"] = a.clip_id;
        actors.push_back(std::move(aj));
    }
    j = {{"actors", std::move(actors)}, {"duration_s", s.duration_s},       {"fps", s.fps},
         {"camera_count", s.camera_count}, {"scene_id", s.scene_id}};
}

void from_json(const nlohmann::json& j, SequenceSpec& s) {
    s.actors.clear();
    for (const auto& aj : j.at("actors")) {
        ActorSpec a;
        from_json(aj.at("assets"), a.assets);
        a.clip_id = aj.at("clip_id").get<int>();
        s.actors.push_back(std::move(a));
    }
    s.duration_s = j.at("duration_s").get<double>();
    s.fps = j.at("fps").get<double>();
    s.camera_count = j.at("camera_count").get<int>();
    s.scene_id = j.at("scene_id").get<int>();
    s.validate();
}

}  // namespace bodygen
