#include "mmbias/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>

#include "mmbias/errors.hpp"
#include "mmbias/matrix_io.hpp"

namespace mmbias {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataFormatError(where + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T get_as(const json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw DataFormatError(where + ": " + e.what());
  }
}

struct MatrixCache {
  std::filesystem::path base;
  std::map<std::filesystem::path, std::shared_ptr<const EmbeddingMatrix>> loaded;
  std::vector<std::filesystem::path>* order;
  std::optional<std::pair<std::filesystem::path, std::size_t>> first_dims;

  std::shared_ptr<const EmbeddingMatrix> get(const std::string& rel, bool check_dims) {
    const auto full = (base / rel).lexically_normal();
    auto it = loaded.find(full);
    if (it != loaded.end()) return it->second;
    if (!std::filesystem::exists(full)) {
      throw DataFormatError("referenced file '" + full.string() + "' does not exist");
    }
    auto m = std::make_shared<const EmbeddingMatrix>(read_any_matrix(full));
    order->push_back(full);
    loaded.emplace(full, m);
    if (check_dims) {
      if (!first_dims) {
        first_dims.emplace(full, m->dims());
      } else if (first_dims->second != m->dims()) {
        throw DataFormatError("dims mismatch: '" + first_dims->first.string() + "' has " +
                              std::to_string(first_dims->second) + " dims but '" +
                              full.string() + "' has " + std::to_string(m->dims()));
      }
    }
    return m;
  }
};

std::vector<std::string> string_list(const json& value, std::size_t expected,
                                     const std::string& where) {
  auto list = get_as<std::vector<std::string>>(value, where);
  if (list.size() != expected) {
    throw DataFormatError(where + ": expected " + std::to_string(expected) + " entries, got " +
                          std::to_string(list.size()));
  }
  return list;
}

}  // namespace

bool Manifest::has_set(std::string_view name) const {
  for (const auto& s : sets) {
    if (s.name == name) return true;
  }
  return false;
}

const StimulusSet& Manifest::set(std::string_view name) const {
  for (const auto& s : sets) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown set '" + std::string(name) + "' (not in manifest)");
}

std::vector<std::string> Manifest::labels_for(const StimulusSet& s) const {
  auto it = labels.find(s.name);
  if (it != labels.end()) return it->second;
  return std::vector<std::string>(s.size(), s.name);
}

const ItmMatrix& Manifest::itm_block(std::string_view image_set, std::string_view text_set) const {
  for (const auto& b : itm_blocks) {
    if (b.image_set() == image_set && b.text_set() == text_set) return b;
  }
  throw ConfigError("no ITM block for (" + std::string(image_set) + ", " + std::string(text_set) +
                    ")");
}

Manifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DataFormatError("manifest '" + path.string() + "' does not exist");
  }
  json doc;
  {
    std::ifstream in(path);
    if (!in) throw DataFormatError("cannot open manifest '" + path.string() + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw DataFormatError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
  }
  const std::string where = path.string();
  if (!doc.is_object()) throw DataFormatError(where + ": manifest must be a JSON object");

  Manifest manifest;
  manifest.path = path;
  manifest.version = get_as<int>(require(doc, "version", where), where + ": version");
  if (manifest.version != 1) {
    throw DataFormatError(where + ": unsupported manifest version " +
                          std::to_string(manifest.version));
  }
  manifest.dims = get_as<std::size_t>(require(doc, "dims", where), where + ": dims");

  MatrixCache cache{path.parent_path(), {}, &manifest.referenced_files, std::nullopt};

  const json& sets = require(doc, "sets", where);
  if (!sets.is_array() || sets.empty()) throw DataFormatError(where + ": 'sets' must be a non-empty array");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const json& s = sets[i];
    const std::string sw = where + ": sets[" + std::to_string(i) + "]";
    const auto name = get_as<std::string>(require(s, "name", sw), sw + ".name");
    const std::string nw = where + ": set '" + name + "'";
    if (manifest.has_set(name)) throw DataFormatError(nw + " declared twice");
    const auto kind = parse_set_kind(get_as<std::string>(require(s, "kind", nw), nw + ".kind"));
    const auto modality =
        parse_modality(get_as<std::string>(require(s, "modality", nw), nw + ".modality"));
    const auto count = get_as<std::size_t>(require(s, "count", nw), nw + ".count");
    StimulusSet set;
    if (s.contains("path")) {
      const auto rel = get_as<std::string>(s.at("path"), nw + ".path");
      auto matrix = cache.get(rel, true);
      if (matrix->rows() != count) {
        throw DataFormatError(nw + ": declared count " + std::to_string(count) + " but '" + rel +
                              "' holds " + std::to_string(matrix->rows()) + " rows");
      }
      if (matrix->dims() != manifest.dims) {
        throw DataFormatError(nw + ": '" + rel + "' has " + std::to_string(matrix->dims()) +
                              " dims but manifest declares " + std::to_string(manifest.dims));
      }
      std::vector<std::size_t> rows;
      if (auto it = s.find("rows"); it != s.end()) {
        rows = get_as<std::vector<std::size_t>>(*it, nw + ".rows");
        if (rows.empty()) throw DataFormatError(nw + ": 'rows' must not be empty");
      }
      try {
        set = make_stimulus_set(name, kind, modality, matrix, std::move(rows), rel);
      } catch (const DataFormatError& e) {
        throw DataFormatError(where + ": " + e.what());
      }
    } else {
      // ITM-only set (fusion models expose no per-modality embeddings).
      if (count == 0) throw DataFormatError(nw + ": count must be >= 1");
      set.name = name;
      set.kind = kind;
      set.modality = modality;
      set.item_ids.resize(count);
      for (std::size_t r = 0; r < count; ++r) set.item_ids[r] = r;
    }
    if (auto it = s.find("items"); it != s.end()) {
      set.item_names = string_list(*it, set.size(), nw + ".items");
    }
    if (auto it = s.find("sentiments"); it != s.end()) {
      set.sentiments = string_list(*it, set.size(), nw + ".sentiments");
    } else if (auto it2 = s.find("sentiment"); it2 != s.end()) {
      set.sentiments.assign(set.size(), get_as<std::string>(*it2, nw + ".sentiment"));
    }
    manifest.sets.push_back(std::move(set));
  }

  if (auto it = doc.find("labels"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw DataFormatError(where + ": 'labels' must be an object");
    for (const auto& [set_name, value] : it->items()) {
      const std::string lw = where + ": labels['" + set_name + "']";
      if (!manifest.has_set(set_name)) throw DataFormatError(lw + " names an unknown set");
      const auto& s = manifest.set(set_name);
      if (value.is_string()) {
        manifest.labels[set_name] = std::vector<std::string>(s.size(), value.get<std::string>());
      } else {
        manifest.labels[set_name] = string_list(value, s.size(), lw);
      }
    }
  }

  if (auto it = doc.find("itm_blocks"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw DataFormatError(where + ": 'itm_blocks' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& b = (*it)[i];
      const std::string bw = where + ": itm_blocks[" + std::to_string(i) + "]";
      const auto image = get_as<std::string>(require(b, "image_set", bw), bw + ".image_set");
      const auto text = get_as<std::string>(require(b, "text_set", bw), bw + ".text_set");
      const auto rel = get_as<std::string>(require(b, "path", bw), bw + ".path");
      if (!manifest.has_set(image)) throw DataFormatError(bw + ": unknown image set '" + image + "'");
      if (!manifest.has_set(text)) throw DataFormatError(bw + ": unknown text set '" + text + "'");
      const auto& is = manifest.set(image);
      const auto& ts = manifest.set(text);
      auto probs = cache.get(rel, false);
      if (probs->rows() != is.size() || probs->dims() != ts.size()) {
        throw DataFormatError(bw + ": matrix is " + std::to_string(probs->rows()) + "x" +
                              std::to_string(probs->dims()) + " but sets have " +
                              std::to_string(is.size()) + " and " + std::to_string(ts.size()) +
                              " items");
      }
      try {
        manifest.itm_blocks.emplace_back(image, text, *probs);
      } catch (const DataFormatError& e) {
        throw DataFormatError(bw + ": " + e.what());
      }
    }
  }
  return manifest;
}

}  // namespace mmbias
