// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/datakit/formats.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "defectforge/common/error.hpp"
#include "json.hpp"

namespace defectforge::datakit {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(const std::string& origin, const std::string& what) {
  fail(ErrorKind::kParseError, origin + ": " + what);
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    parse_fail(origin, "line " + std::to_string(line) + ": " + e.what());
  }
}

// Typed field access that names the offending JSON path on failure.
template <typename T>
T field(const json& obj, const char* key, const std::string& where,
        const std::string& origin) {
  if (!obj.is_object() || !obj.contains(key))
    parse_fail(origin, where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    parse_fail(origin, where + "." + key + ": wrong type");
  }
}

const json& array_field(const json& obj, const char* key, const std::string& origin) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_array())
    parse_fail(origin, std::string("missing array '") + key + "'");
  return obj.at(key);
}

BoundingBox box_from(const json& arr, const std::string& where, const std::string& origin) {
  std::vector<double> v;
  try {
    v = arr.get<std::vector<double>>();
  } catch (const json::exception&) {
    parse_fail(origin, where + ".bbox: expected four numbers");
  }
  if (v.size() != 4) parse_fail(origin, where + ".bbox: expected four numbers");
  for (double c : v)
    if (c != static_cast<double>(static_cast<int>(c)))
      parse_fail(origin, where + ".bbox: coordinates must be integers");
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
          static_cast<int>(v[3])};
}

ordered_json box_json(const BoundingBox& b) { return ordered_json::array({b.x, b.y, b.w, b.h}); }

AnnotatedImage* by_id(std::vector<AnnotatedImage>& images,
                      std::map<std::int64_t, std::size_t>& index, std::int64_t id,
                      const std::string& where, const std::string& origin) {
  const auto it = index.find(id);
  if (it == index.end())
    parse_fail(origin, where + ": unknown image_id " + std::to_string(id));
  return &images[it->second];
}

void finish(Dataset& ds, const std::string& origin) {
  try {
    ds.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidBox) throw;
    parse_fail(origin, e.what());
  }
}

}  // namespace

std::string to_canonical_json(const Dataset& ds) {
  ordered_json j;
  j["classes"] = ds.classes;
  j["images"] = ordered_json::array();
  j["annotations"] = ordered_json::array();
  ordered_json prov = ordered_json::array();
  for (const auto& img : ds.images) {
    j["images"].push_back({{"id", img.id}, {"file", img.file}, {"width", img.width},
                           {"height", img.height}});
    for (const auto& a : img.annotations)
      j["annotations"].push_back(
          {{"image_id", img.id}, {"class", a.class_label}, {"bbox", box_json(a.box)}});
    for (const auto& p : img.provenance)
      prov.push_back(
          {{"image_id", img.id}, {"bed", p.bed}, {"seed", p.seed}, {"patches", p.patches}});
  }
  if (!prov.empty()) j["provenance"] = prov;
  return j.dump(2) + "\n";
}

Dataset parse_canonical_json(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  if (!j.is_object()) parse_fail(origin, "manifest must be an object");
  Dataset ds;
  ds.classes = field<std::vector<std::string>>(j, "classes", "manifest", origin);
  std::map<std::int64_t, std::size_t> index;
  const json& images = array_field(j, "images", origin);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    AnnotatedImage img;
    img.id = field<std::int64_t>(images[i], "id", where, origin);
    img.file = field<std::string>(images[i], "file", where, origin);
    img.width = field<int>(images[i], "width", where, origin);
    img.height = field<int>(images[i], "height", where, origin);
    if (!index.emplace(img.id, ds.images.size()).second)
      parse_fail(origin, where + ": duplicate id " + std::to_string(img.id));
    ds.images.push_back(std::move(img));
  }
  const json& anns = array_field(j, "annotations", origin);
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = "annotations[" + std::to_string(i) + "]";
    AnnotatedImage* img = by_id(ds.images, index,
                                field<std::int64_t>(anns[i], "image_id", where, origin),
                                where, origin);
    if (!anns[i].contains("bbox")) parse_fail(origin, where + ": missing field 'bbox'");
    img->annotations.push_back({field<std::string>(anns[i], "class", where, origin),
                                box_from(anns[i]["bbox"], where, origin)});
  }
  if (j.contains("provenance")) {
    const json& prov = array_field(j, "provenance", origin);
    for (std::size_t i = 0; i < prov.size(); ++i) {
      const std::string where = "provenance[" + std::to_string(i) + "]";
      AnnotatedImage* img = by_id(ds.images, index,
                                  field<std::int64_t>(prov[i], "image_id", where, origin),
                                  where, origin);
      img->provenance.push_back({field<std::string>(prov[i], "bed", where, origin),
                                 field<std::uint64_t>(prov[i], "seed", where, origin),
                                 field<std::vector<std::string>>(prov[i], "patches", where,
                                                                 origin)});
    }
  }
  finish(ds, origin);
  return ds;
}

std::string to_coco_json(const Dataset& ds) {
  ordered_json j;
  j["images"] = ordered_json::array();
  j["annotations"] = ordered_json::array();
  j["categories"] = ordered_json::array();
  for (std::size_t c = 0; c < ds.classes.size(); ++c)
    j["categories"].push_back({{"id", c + 1}, {"name", ds.classes[c]}});
  std::int64_t ann_id = 1;
  for (const auto& img : ds.images) {
    j["images"].push_back({{"id", img.id}, {"file_name", img.file}, {"width", img.width},
                           {"height", img.height}});
    for (const auto& a : img.annotations) {
      const auto cat = std::find(ds.classes.begin(), ds.classes.end(), a.class_label) -
                       ds.classes.begin() + 1;
      j["annotations"].push_back({{"id", ann_id++},
                                  {"image_id", img.id},
                                  {"category_id", cat},
                                  {"bbox", box_json(a.box)},
                                  {"area", static_cast<std::int64_t>(a.box.w) * a.box.h},
                                  {"iscrowd", 0}});
    }
  }
  return j.dump(2) + "\n";
}

Dataset parse_coco_json(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  Dataset ds;
  std::map<std::int64_t, std::string> categories;
  const json& cats = array_field(j, "categories", origin);
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string where = "categories[" + std::to_string(i) + "]";
    const auto name = field<std::string>(cats[i], "name", where, origin);
    categories[field<std::int64_t>(cats[i], "id", where, origin)] = name;
    ds.classes.push_back(name);
  }
  std::map<std::int64_t, std::size_t> index;
  const json& images = array_field(j, "images", origin);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    AnnotatedImage img;
    img.id = field<std::int64_t>(images[i], "id", where, origin);
    img.file = field<std::string>(images[i], "file_name", where, origin);
    img.width = field<int>(images[i], "width", where, origin);
    img.height = field<int>(images[i], "height", where, origin);
    if (!index.emplace(img.id, ds.images.size()).second)
      parse_fail(origin, where + ": duplicate id " + std::to_string(img.id));
    ds.images.push_back(std::move(img));
  }
  const json& anns = array_field(j, "annotations", origin);
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = "annotations[" + std::to_string(i) + "]";
    const auto cat = field<std::int64_t>(anns[i], "category_id", where, origin);
    if (!categories.count(cat))
      parse_fail(origin, where + ": unknown category_id " + std::to_string(cat));
    AnnotatedImage* img = by_id(ds.images, index,
                                field<std::int64_t>(anns[i], "image_id", where, origin),
                                where, origin);
    if (!anns[i].contains("bbox")) parse_fail(origin, where + ": missing field 'bbox'");
    img->annotations.push_back({categories[cat], box_from(anns[i]["bbox"], where, origin)});
  }
  finish(ds, origin);
  return ds;
}

Dataset import_voc(const fs::path& dir) {
  namespace pt = boost::property_tree;
  if (!fs::is_directory(dir)) fail(ErrorKind::kIo, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".xml")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  Dataset ds;
  std::set<std::string> classes;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string origin = files[i].string();
    pt::ptree tree;
    try {
      pt::read_xml(origin, tree);
    } catch (const pt::xml_parser_error& e) {
      parse_fail(origin, "line " + std::to_string(e.line()) + ": " + e.message());
    }
    try {
      const pt::ptree& root = tree.get_child("annotation");
      AnnotatedImage img;
      img.id = static_cast<std::int64_t>(i);
      img.file = root.get<std::string>("filename");
      img.width = root.get<int>("size.width");
      img.height = root.get<int>("size.height");
      for (const auto& [tag, obj] : root) {
        if (tag != "object") continue;
        const auto xmin = obj.get<int>("bndbox.xmin");
        const auto ymin = obj.get<int>("bndbox.ymin");
        const auto xmax = obj.get<int>("bndbox.xmax");
        const auto ymax = obj.get<int>("bndbox.ymax");
        if (xmax < xmin || ymax < ymin)
          parse_fail(origin, "object with inverted corners");
        Annotation a;
        a.class_label = obj.get<std::string>("name");
        a.box = {std::max(0, xmin - 1), std::max(0, ymin - 1), xmax - xmin + 1, ymax - ymin + 1};
        classes.insert(a.class_label);
        img.annotations.push_back(std::move(a));
      }
      ds.images.push_back(std::move(img));
    } catch (const pt::ptree_error& e) {
      parse_fail(origin, e.what());
    }
  }
  ds.classes.assign(classes.begin(), classes.end());
  finish(ds, dir.string());
  return ds;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

Dataset load_canonical(const fs::path& path) {
  return parse_canonical_json(read_text(path), path.string());
}

void save_canonical(const fs::path& path, const Dataset& ds) {
  write_text(path, to_canonical_json(ds));
}

Dataset load_any(const fs::path& path) {
  if (fs::is_directory(path)) return import_voc(path);
  const std::string text = read_text(path);
  const json j = parse_json(text, path.string());
  if (j.is_object() && j.contains("categories")) return parse_coco_json(text, path.string());
  return parse_canonical_json(text, path.string());
}

void load_pixels(Dataset& ds, const fs::path& base_dir) {
  for (auto& img : ds.images) {
    img.pixels = imaging::read_png(base_dir / img.file);
    if (img.pixels.width != img.width || img.pixels.height != img.height)
      fail(ErrorKind::kConfigInvalid,
           img.file + " is " + std::to_string(img.pixels.width) + "x" +
               std::to_string(img.pixels.height) + " but the manifest says " +
               std::to_string(img.width) + "x" + std::to_string(img.height));
  }
}

void save_dataset(const fs::path& manifest_path, const Dataset& ds) {
  const fs::path base = manifest_path.parent_path();
  for (const auto& img : ds.images)
    if (!img.pixels.empty()) {
      const fs::path target = base / img.file;
      fs::create_directories(target.parent_path());
      imaging::write_png(target, img.pixels);
    }
  save_canonical(manifest_path, ds);
}

}  // namespace defectforge::datakit
