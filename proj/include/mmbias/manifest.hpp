#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mmbias/embedding.hpp"

namespace mmbias {

// A loaded, cross-validated manifest. Immutable after load_manifest returns.
//
// JSON layout (paths relative to the manifest's directory):
//   {
//     "version": 1,
//     "dims": 512,
//     "sets": [{"name": "muslim_images", "kind": "target", "modality": "image",
//               "path": "muslim.mmbe", "count": 40,
//               "rows": [...],          // optional subset of rows
//               "items": [...],         // optional per-item names
//               "sentiment": "negative" // or "sentiments": [...] per item
//             }, ...],
//     "labels": {"muslim_images": "muslim" | ["c0", "c1", ...]},   // optional
//     "itm_blocks": [{"image_set": ..., "text_set": ..., "path": ...}] // optional
//   }
// "count" is the number of rows stored in the file. Sets that name the same
// file share one matrix.
struct Manifest {
  int version = 1;
  std::size_t dims = 0;
  std::vector<StimulusSet> sets;
  std::map<std::string, std::vector<std::string>> labels;
  std::vector<ItmMatrix> itm_blocks;
  std::filesystem::path path;
  // Every file read while loading, in first-reference order.
  std::vector<std::filesystem::path> referenced_files;

  bool has_set(std::string_view name) const;
  // Throws ConfigError naming the set when absent.
  const StimulusSet& set(std::string_view name) const;
  // Explicit labels when the manifest provides them, otherwise the set name.
  std::vector<std::string> labels_for(const StimulusSet& set) const;
  // Throws ConfigError when no block covers the pair.
  const ItmMatrix& itm_block(std::string_view image_set, std::string_view text_set) const;
};

// Throws DataFormatError on any structural or consistency problem.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace mmbias
