#pragma once

#include <string>

#include "json.hpp"
#include "scengen/engine.hpp"

namespace scengen {

// JSON model bundle. Doubles are written in shortest round-trip form, so a
// reloaded system is value-identical to the fitted one and generates
// byte-identical scenarios.
nlohmann::ordered_json system_to_json(const FittedSystem& system);
FittedSystem system_from_json(const nlohmann::ordered_json& j);

// Bundle text with an embedded content hash, and its inverse. Loading
// verifies the hash and throws DataError on mismatch or schema problems.
std::string save_system(const FittedSystem& system);
FittedSystem load_system(const std::string& text);

// FNV-1a over the canonical bundle payload (everything except the hash
// field itself); the fingerprint carried into scenario metadata.
std::string model_hash(const FittedSystem& system);

// Catalog sidecar: `kind,id,zone,latitude,longitude,capacity_mw` rows where
// kind is zone/wind/solar. Zone rows define the zone order.
AssetCatalog read_catalog_csv(const std::string& path);
std::string catalog_to_csv(const AssetCatalog& catalog);

}  // namespace scengen
