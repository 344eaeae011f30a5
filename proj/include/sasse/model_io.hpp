#pragma once

#include <filesystem>
#include <iosfwd>

#include "sasse/pipeline.hpp"

namespace sasse {

// Bundle file layout: a text manifest (key-value lines ending with "end")
// followed by binary sections. Section offsets in the manifest are relative
// to the first byte after the manifest. Reals are row-major little-endian
// 8-byte doubles, column indices 4-byte little-endian unsigned, ordered:
// classifier hyperplanes, then per cluster C indices, Z, W, then the
// optional centroid diagnostic.
void save_model(const ModelBundle& bundle, std::ostream& out);
ModelBundle load_model(std::istream& in);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace sasse
