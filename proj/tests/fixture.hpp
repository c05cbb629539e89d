#pragma once

// The cyclone-vessel catalog assembled from the files under fixtures/.

#include <filesystem>
#include <string>

#include "vlens/catalog.hpp"
#include "vlens/ingest.hpp"

namespace fixture {

inline std::filesystem::path dir() { return VLENS_FIXTURE_DIR; }

inline std::string text(const std::string& relative) { return vlens::read_file(dir() / relative); }

inline vlens::PpcoGraph cyclone() { return vlens::parse_ppco(text("cyclone.xml")); }

inline constexpr const char* kShape = "actorx-shape";
inline constexpr const char* kManufacturing = "actorx-manufacturing";

inline vlens::Catalog catalog() {
  return vlens::Catalog::create(
      cyclone(),
      {vlens::parse_viewpoint_spec(text("viewpoints/actorx-shape.xml")),
       vlens::parse_viewpoint_spec(text("viewpoints/actorx-manufacturing.xml"))},
      {vlens::parse_mapping(text("mappings/actorx-shape-to-manufacturing.xml"))});
}

}  // namespace fixture
