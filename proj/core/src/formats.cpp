// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include "obx/io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace obx::io {

namespace {

using nlohmann::json;

const char* const kDotaClasses[] = {
    "plane",        "baseball-diamond", "bridge",           "ground-track-field",
    "small-vehicle", "large-vehicle",   "ship",             "tennis-court",
    "basketball-court", "storage-tank", "soccer-ball-field", "roundabout",
    "harbor",       "swimming-pool",    "helicopter",       "container-crane",
};
const char* const kDotaShortNames[] = {
    "Plane", "BD", "Bridge", "GTF", "SV", "LV", "Ship", "TC",
    "BC",    "ST", "SBF",    "RA",  "Harbor", "SP", "HC", "CC",
};

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& tok, long line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
  return v;
}

Quad quad_from_tokens(const std::vector<std::string>& tok, std::size_t first, long line) {
  std::array<Point2, 4> pts;
  for (int i = 0; i < 4; ++i) {
    pts[static_cast<std::size_t>(i)] = {parse_real(tok[first + 2 * static_cast<std::size_t>(i)], line),
                                        parse_real(tok[first + 2 * static_cast<std::size_t>(i) + 1], line)};
  }
  try {
    return Quad::from_points(pts);
  } catch (const InputError& e) {
    throw ParseError(e.what(), line);
  }
}

void append_f32(std::string& blob, const std::vector<float>& values) {
  static_assert(sizeof(float) == 4);
  const std::size_t bytes = values.size() * 4;
  const std::size_t at = blob.size();
  blob.resize(at + bytes);
  std::memcpy(blob.data() + at, values.data(), bytes);
}

std::vector<float> read_f32(const std::string& blob, std::size_t offset, std::size_t count) {
  if (offset + count * 4 > blob.size()) {
    throw ParseError("grid archive: tensor range outside blob");
  }
  std::vector<float> out(count);
  std::memcpy(out.data(), blob.data() + offset, count * 4);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Deterministic generator used by the synthetic corpus; fixed algorithm so
// the same seed yields the same bytes on every platform.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

constexpr int kManifestVersion = 1;
const char* const kRegressionChannelNames[] = {"tx", "ty", "tw", "th",
                                               "u1x", "u1y", "u2x", "u2y"};

}  // namespace

ClassTable ClassTable::dota(DotaVersion version) {
  ClassTable t;
  const int n = version == DotaVersion::kV10 ? 15 : 16;
  t.names_.assign(kDotaClasses, kDotaClasses + n);
  t.num_builtin_ = n;
  return t;
}

const std::string& ClassTable::name_of(int id) const {
  if (id < 0 || id >= size()) throw InputError("ClassTable: id out of range");
  return names_[static_cast<std::size_t>(id)];
}

std::string ClassTable::short_name_of(int id) const {
  if (id >= 0 && id < num_builtin_) return kDotaShortNames[static_cast<std::size_t>(id)];
  return name_of(id);
}

int ClassTable::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int ClassTable::id_or_add(const std::string& name) {
  const int id = find(name);
  if (id >= 0) return id;
  names_.push_back(name);
  warnings_.push_back("unknown category '" + name + "' passed through verbatim");
  return static_cast<int>(names_.size()) - 1;
}

AnnotationFile parse_annotations(const std::filesystem::path& path, ClassTable& classes) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());

  AnnotationFile file;
  file.image_id = path.stem().string();

  std::string line;
  long line_no = 0;
  bool headers_done = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (!headers_done) {
      // DOTA releases vary between zero and two header lines.
      if (line.rfind("imagesource", 0) == 0) {
        const auto colon = line.find(':');
        file.imagesource = colon == std::string::npos ? "" : line.substr(colon + 1);
        continue;
      }
      if (line.rfind("gsd", 0) == 0) {
        const auto colon = line.find(':');
        file.gsd = colon == std::string::npos ? "" : line.substr(colon + 1);
        continue;
      }
      headers_done = true;
    }

    const std::vector<std::string> tok = split_ws(line);
    if (tok.size() != 10) {
      throw ParseError("expected 10 fields (8 coordinates, category, difficult), got " +
                           std::to_string(tok.size()),
                       line_no);
    }
    Annotation ann;
    ann.image_id = file.image_id;
    ann.quad = quad_from_tokens(tok, 0, line_no);
    ann.class_id = classes.id_or_add(tok[8]);
    if (tok[9] == "0") {
      ann.difficult = false;
    } else if (tok[9] == "1") {
      ann.difficult = true;
    } else {
      throw ParseError("difficult flag must be 0 or 1, got '" + tok[9] + "'", line_no);
    }
    file.annotations.push_back(std::move(ann));
  }
  return file;
}

void write_annotations(const std::filesystem::path& path, const AnnotationFile& file,
                       const ClassTable& classes) {
  std::string out;
  if (file.imagesource) out += "imagesource:" + *file.imagesource + "\n";
  if (file.gsd) out += "gsd:" + *file.gsd + "\n";
  for (const Annotation& ann : file.annotations) {
    for (Point2 p : ann.quad.vertices()) {
      out += format_double(p.x) + " " + format_double(p.y) + " ";
    }
    out += classes.name_of(ann.class_id) + " " + (ann.difficult ? "1" : "0") + "\n";
  }
  atomic_write_file(path, out);
}

std::vector<AnnotationFile> read_annotation_dir(const std::filesystem::path& dir,
                                                ClassTable& classes) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<AnnotationFile> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(parse_annotations(p, classes));
  return out;
}

std::vector<Detection> parse_detection_dump(const std::filesystem::path& path, int class_id) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<Detection> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> tok = split_ws(line);
    if (tok.size() != 10) {
      throw ParseError("expected 10 fields (image id, score, 8 coordinates), got " +
                           std::to_string(tok.size()),
                       line_no);
    }
    Detection det;
    det.image_id = tok[0];
    det.class_id = class_id;
    det.score = parse_real(tok[1], line_no);
    if (!(det.score >= 0.0 && det.score <= 1.0)) {
      throw ParseError("score must lie in [0, 1]", line_no);
    }
    det.quad = quad_from_tokens(tok, 2, line_no);
    out.push_back(std::move(det));
  }
  return out;
}

void write_detection_dumps(const std::filesystem::path& dir, std::span<const Detection> dets,
                           const ClassTable& classes) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<const Detection*>> by_class(static_cast<std::size_t>(classes.size()));
  for (const Detection& d : dets) {
    if (d.class_id < 0 || d.class_id >= classes.size()) {
      throw InputError("write_detection_dumps: class id outside table");
    }
    by_class[static_cast<std::size_t>(d.class_id)].push_back(&d);
  }
  for (int cls = 0; cls < classes.size(); ++cls) {
    auto& group = by_class[static_cast<std::size_t>(cls)];
    if (group.empty()) continue;
    std::sort(group.begin(), group.end(), [](const Detection* a, const Detection* b) {
      if (a->image_id != b->image_id) return a->image_id < b->image_id;
      if (a->score != b->score) return a->score > b->score;
      for (int i = 0; i < 4; ++i) {
        const Point2 pa = a->quad.vertices()[static_cast<std::size_t>(i)];
        const Point2 pb = b->quad.vertices()[static_cast<std::size_t>(i)];
        if (pa.x != pb.x) return pa.x < pb.x;
        if (pa.y != pb.y) return pa.y < pb.y;
      }
      return false;
    });
    std::string out;
    for (const Detection* d : group) {
      out += d->image_id + " " + format_double(d->score);
      for (Point2 p : d->quad.vertices()) {
        out += " " + format_double(p.x) + " " + format_double(p.y);
      }
      out += "\n";
    }
    atomic_write_file(dir / ("Task1_" + classes.name_of(cls) + ".txt"), out);
  }
}

std::vector<Detection> read_detection_dir(const std::filesystem::path& dir,
                                          ClassTable& classes) {
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("Task1_", 0) == 0 &&
        entry.path().extension() == ".txt") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Detection> out;
  for (const auto& p : paths) {
    const std::string stem = p.stem().string();
    const std::string cls_name = stem.substr(6);  // after "Task1_"
    const int cls = classes.id_or_add(cls_name);
    std::vector<Detection> dets = parse_detection_dump(p, cls);
    out.insert(out.end(), std::make_move_iterator(dets.begin()),
               std::make_move_iterator(dets.end()));
  }
  return out;
}

void write_grid_archive(const std::filesystem::path& dir, const GridArchive& archive) {
  std::filesystem::create_directories(dir);
  std::string blob;
  json levels = json::array();
  for (const LabelLevel& level : archive.grids.levels) {
    const std::size_t cells =
        static_cast<std::size_t>(level.width) * static_cast<std::size_t>(level.height);

    json tensors;
    std::vector<float> state(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      state[i] = static_cast<float>(static_cast<int>(level.state[i]));
    }
    tensors["state"] = {{"offset", blob.size()}, {"count", cells}};
    append_f32(blob, state);

    std::vector<float> reg(level.regression.size());
    for (std::size_t i = 0; i < reg.size(); ++i) {
      reg[i] = static_cast<float>(level.regression[i]);
    }
    tensors["regression"] = {{"offset", blob.size()}, {"count", reg.size()}};
    append_f32(blob, reg);

    std::vector<float> gt(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      gt[i] = static_cast<float>(level.gt_index[i]);
    }
    tensors["gt_index"] = {{"offset", blob.size()}, {"count", cells}};
    append_f32(blob, gt);

    levels.push_back(json{{"level", level.level},
                          {"shape", {level.height, level.width}},
                          {"tensors", tensors}});
  }

  json manifest{
      {"version", kManifestVersion},
      {"image_id", archive.image_id},
      {"image_size", {archive.grids.image_size.width, archive.grids.image_size.height}},
      {"dtype", "float32"},
      {"regression_channels", kRegressionChannelNames},
      {"annotation_classes", archive.annotation_classes},
      {"levels", levels},
      {"total_bytes", blob.size()},
  };

  atomic_write_file(dir / (archive.image_id + ".grids.bin"), blob);
  atomic_write_file(dir / (archive.image_id + ".grids.json"), manifest.dump(2) + "\n");
}

GridArchive read_grid_archive(const std::filesystem::path& manifest_path) {
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw ParseError("grid manifest " + manifest_path.string() + ": " + e.what());
  }

  GridArchive archive;
  try {
    if (manifest.at("version").get<int>() != kManifestVersion) {
      throw ParseError("grid manifest: unsupported version");
    }
    if (manifest.at("dtype").get<std::string>() != "float32") {
      throw ParseError("grid manifest: unsupported dtype");
    }
    archive.image_id = manifest.at("image_id").get<std::string>();
    archive.grids.image_size = {manifest.at("image_size").at(0).get<int>(),
                                manifest.at("image_size").at(1).get<int>()};
    archive.annotation_classes =
        manifest.at("annotation_classes").get<std::vector<std::string>>();

    std::filesystem::path bin_path = manifest_path;
    bin_path.replace_extension(".bin");  // X.grids.json -> X.grids.bin
    const std::string blob = read_file(bin_path);
    if (blob.size() != manifest.at("total_bytes").get<std::size_t>()) {
      throw ParseError("grid archive: blob size disagrees with manifest");
    }

    for (const json& jl : manifest.at("levels")) {
      LabelLevel level;
      level.level = jl.at("level").get<int>();
      level.height = jl.at("shape").at(0).get<int>();
      level.width = jl.at("shape").at(1).get<int>();
      const std::size_t cells =
          static_cast<std::size_t>(level.width) * static_cast<std::size_t>(level.height);
      const json& tensors = jl.at("tensors");
      auto tensor = [&](const char* name, std::size_t expected) {
        const json& t = tensors.at(name);
        if (t.at("count").get<std::size_t>() != expected) {
          throw ParseError(std::string("grid archive: bad tensor size for ") + name);
        }
        return read_f32(blob, t.at("offset").get<std::size_t>(), expected);
      };
      const std::vector<float> state = tensor("state", cells);
      level.state.resize(cells);
      for (std::size_t i = 0; i < cells; ++i) {
        const int s = static_cast<int>(std::lround(state[i]));
        if (s < 0 || s > 2) throw ParseError("grid archive: invalid state value");
        level.state[i] = static_cast<PixelState>(s);
      }
      const std::vector<float> reg = tensor("regression", cells * kRegressionChannels);
      level.regression.assign(reg.begin(), reg.end());
      const std::vector<float> gt = tensor("gt_index", cells);
      level.gt_index.resize(cells);
      for (std::size_t i = 0; i < cells; ++i) {
        level.gt_index[i] = static_cast<std::int32_t>(std::lround(gt[i]));
      }
      archive.grids.levels.push_back(std::move(level));
    }
  } catch (const json::exception& e) {
    throw ParseError("grid manifest " + manifest_path.string() + ": " + e.what());
  }
  return archive;
}

std::vector<std::filesystem::path> list_grid_manifests(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 11 &&
        name.substr(name.size() - 11) == ".grids.json") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<AnnotationFile> synthesize_annotations(std::uint64_t seed, int num_images,
                                                   int max_boxes_per_image, ImageSize size,
                                                   const ClassTable& classes) {
  if (num_images < 0 || max_boxes_per_image < 1 || size.width < 64 || size.height < 64) {
    throw InputError("synthesize_annotations: bad parameters");
  }
  SplitMix64 rng{seed};
  std::vector<AnnotationFile> out;
  for (int i = 0; i < num_images; ++i) {
    AnnotationFile file;
    char name[32];
    std::snprintf(name, sizeof(name), "SYN%04d", i);
    file.image_id = name;
    file.imagesource = "synthetic";
    const int boxes = 1 + rng.below(max_boxes_per_image);
    for (int b = 0; b < boxes; ++b) {
      const double h = rng.uniform(8.0, 0.2 * std::min(size.width, size.height));
      const double w = h * rng.uniform(1.0, 4.0);
      const double theta = rng.uniform(0.0, kPi);
      const double reach = 0.5 * std::hypot(w, h) + 1.0;
      if (2.0 * reach >= std::min(size.width, size.height)) continue;
      const double cx = rng.uniform(reach, size.width - reach);
      const double cy = rng.uniform(reach, size.height - reach);
      Annotation ann;
      ann.image_id = file.image_id;
      ann.class_id = rng.below(classes.size());
      ann.quad = box_to_quad(OrientedBox::make(cx, cy, w, h, theta));
      ann.difficult = rng.uniform() < 0.05;
      file.annotations.push_back(std::move(ann));
    }
    out.push_back(std::move(file));
  }
  return out;
}

std::string report_to_json(const EvalReport& report, const ClassTable& classes) {
  json per_class = json::object();
  for (const auto& [cls, ce] : report.per_class) {
    per_class[classes.name_of(cls)] = {
        {"ap", ce.ap},
        {"num_gt", ce.num_gt},
        {"num_detections", ce.num_detections},
        {"recall", ce.curve.recall},
        {"precision", ce.curve.precision},
    };
  }
  json skipped = json::array();
  for (int cls : report.skipped_classes) skipped.push_back(classes.name_of(cls));
  const json j{
      {"metric",
       report.config.metric == ApMetric::kVoc07ElevenPoint ? "voc07" : "continuous"},
      {"iou_threshold", report.config.iou_threshold},
      {"overlap", report.config.overlap == QuadOverlapMethod::kMinAreaRect
                      ? "min-area-rect"
                      : "exact-polygon"},
      {"map", report.map},
      {"per_class", per_class},
      {"skipped_classes", skipped},
      {"unknown_class_detections", report.unknown_class_detections},
  };
  return j.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report, const ClassTable& classes) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-20s %8s %8s %8s\n", "class", "AP", "gts", "dets");
  out << line << std::string(47, '-') << "\n";
  for (const auto& [cls, ce] : report.per_class) {
    std::snprintf(line, sizeof(line), "%-20s %8.4f %8d %8d\n",
                  classes.short_name_of(cls).c_str(), ce.ap, ce.num_gt, ce.num_detections);
    out << line;
  }
  out << std::string(47, '-') << "\n";
  std::snprintf(line, sizeof(line), "%-20s %8.4f\n", "mAP", report.map);
  out << line;
  out << "(" << (report.config.metric == ApMetric::kVoc07ElevenPoint ? "voc07 11-point"
                                                                     : "continuous")
      << ", IoU >= " << format_double(report.config.iou_threshold) << ", overlap: "
      << (report.config.overlap == QuadOverlapMethod::kMinAreaRect ? "min-area-rect"
                                                                   : "exact-polygon")
      << ")\n";
  if (report.unknown_class_detections > 0) {
    out << "warning: " << report.unknown_class_detections
        << " detections of classes without ground truth were ignored\n";
  }
  return out.str();
}

unsigned worker_count() {
  if (const char* env = std::getenv("OBX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t first_error_index = n;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // fold -0
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw InputError("format_double: value not representable");
  return std::string(buf, ptr);
}

}  // namespace obx::io
